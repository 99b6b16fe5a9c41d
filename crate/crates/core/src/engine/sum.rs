//! Closed-form summation over the lattice variables, innermost first.

use serde_json::{json, Value as Json};

use super::closed::{faulhaber_terms, finite_terms, unbounded_terms};
use super::expand::{expand_terms, normalize_terms};
use super::locus::{compute_locus, terms_on_cell, tracked_for, LocusKind, LocusResult, Z};
use crate::constructible::{poly_eq0, poly_ge0, ConstructibleFunction, Mode, Term};
use crate::error::Result;
use crate::poly::Poly;
use crate::presburger::{eliminate_quantifiers, Formula};
use crate::rectilinear::{cells_1d, CellKind};

/// `g(s) = sum_y f(s, y)`, valid on the integrability locus.
#[derive(Clone, Debug)]
pub struct SumResult {
    pub g: ConstructibleFunction,
    pub validity: LocusResult,
}

impl SumResult {
    pub fn to_json(&self) -> Json {
        json!({
            "g": self.g.to_json(),
            "g_text": self.g.to_pcf("g"),
            "validity": self.validity.to_json(),
        })
    }
}

fn with_guard(t: &Term, g: Formula) -> Term {
    Term { guard: Formula::and(vec![t.guard.clone(), g]), ..t.clone() }
}

/// Sums out `y`. Monomials that do not decay on an unbounded cell are dropped:
/// wherever the total sum converges absolutely their merged coefficients vanish.
fn sum_1d(terms: &[Term], domain: &Formula, y: &str) -> Result<Vec<Term>> {
    let cells = cells_1d(y, &tracked_for(terms, domain), &Formula::True)?;
    let zs = [Z.to_string()];
    let one = Poly::from_int(1);
    let mut out = Vec::new();
    for cell in &cells {
        let on = terms_on_cell(terms, cell, y)?;
        for m in expand_terms(&on, &zs)? {
            let a = m.a[0];
            let b = &m.b[0];
            let coeff = with_guard(&m.coeff, cell.cond.clone());
            match &cell.kind {
                CellKind::Up | CellKind::Down => {
                    if b.is_constant() {
                        if b.constant_term() <= -num_rational::BigRational::from_integer(1.into()) {
                            out.extend(unbounded_terms(&coeff, a, b));
                        }
                    } else {
                        let c = with_guard(&coeff, poly_ge0(&b.neg().sub(&one))?);
                        out.extend(unbounded_terms(&c, a, b));
                    }
                }
                CellKind::Bounded(len) => {
                    if b.is_zero() {
                        out.extend(faulhaber_terms(&coeff, a, len)?);
                    } else if b.is_constant() {
                        out.extend(finite_terms(&coeff, a, b, len));
                    } else {
                        let zero = poly_eq0(b)?;
                        out.extend(faulhaber_terms(&with_guard(&coeff, zero.clone()), a, len)?);
                        out.extend(finite_terms(&with_guard(&coeff, Formula::not(zero)), a, b, len));
                    }
                }
            }
        }
    }
    Ok(normalize_terms(out))
}

/// Sums `f` over its lattice variables. The result is exact wherever the
/// validity locus holds; elsewhere it is the sum of the decaying part only.
pub fn sum_over_lattice(f: &ConstructibleFunction, mode: &Mode) -> Result<SumResult> {
    let mut ts = f.terms.clone();
    let mut dom = f.domain.clone();
    if f.vars.is_empty() {
        ts = ts.iter().map(|t| with_guard(t, dom.clone())).collect();
    }
    for y in f.vars.iter().rev() {
        ts = sum_1d(&ts, &dom, y)?;
        dom = eliminate_quantifiers(&Formula::exists(y, dom))?;
    }
    let g = ConstructibleFunction::new(f.params.clone(), vec![], Formula::True, ts)?
        .normalized()
        .pruned(mode);
    let validity = compute_locus(f, LocusKind::Integrability, mode)?;
    Ok(SumResult { g, validity })
}
