//! Loci of integrability, boundedness and identical vanishing, each returned
//! as the zero set of a constructible function on the parameter space.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::{json, Value as Json};

use super::expand::{
    equality_pairs, expand_terms, group, merged_classes, regions, restrict_terms, square_terms,
    terms_on_piece, zero_count_bound, Class, Region,
};
use crate::constructible::{poly_eq0, poly_ge0, ConstructibleFunction, Mode, Term};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::presburger::{eliminate_quantifiers, is_satisfiable, Formula};
use crate::rectilinear::{cells_1d, rectilinearize, CellKind};

pub(crate) const Z: &str = "_z";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocusKind {
    Integrability,
    Boundedness,
    Vanishing,
}

impl LocusKind {
    pub const ALL: [LocusKind; 3] = [LocusKind::Integrability, LocusKind::Boundedness, LocusKind::Vanishing];

    pub fn short(&self) -> &'static str {
        match self {
            LocusKind::Integrability => "int",
            LocusKind::Boundedness => "bdd",
            LocusKind::Vanishing => "iva",
        }
    }
}

impl fmt::Display for LocusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocusKind::Integrability => "integrability",
            LocusKind::Boundedness => "boundedness",
            LocusKind::Vanishing => "vanishing",
        })
    }
}

impl FromStr for LocusKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "int" | "integrability" => Ok(LocusKind::Integrability),
            "bdd" | "boundedness" => Ok(LocusKind::Boundedness),
            "iva" | "vanishing" => Ok(LocusKind::Vanishing),
            _ => Err(Error::InvalidArgument(format!("unknown locus kind `{s}`"))),
        }
    }
}

/// A locus, given as the zero set of `witness` (a function of the parameters).
#[derive(Clone, Debug)]
pub struct LocusResult {
    pub kind: LocusKind,
    pub witness: ConstructibleFunction,
    pub mode: Mode,
}

impl LocusResult {
    /// Whether the parameter point lies in the locus, evaluating in the result's mode.
    pub fn contains(&self, s: &[BigInt]) -> Result<bool> {
        self.contains_in(s, &self.mode)
    }

    /// Whether `witness(s) = 0` in the given mode. A formal witness may be
    /// evaluated at any fixed `q`.
    pub fn contains_in(&self, s: &[BigInt], mode: &Mode) -> Result<bool> {
        Ok(self.witness.evaluate_or_zero(s, mode)?.is_zero())
    }

    /// Whether the witness is symbolically zero: every remaining term has an
    /// unsatisfiable guard.
    pub fn is_everywhere(&self) -> Result<bool> {
        for t in &self.witness.pruned(&self.mode).terms {
            if !t.coeff.is_zero() && is_satisfiable(&t.guard)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "kind": self.kind.short(),
            "mode": self.mode.to_string(),
            "params": self.witness.params,
            "witness": self.witness.to_json(),
            "witness_text": self.witness.to_pcf("h"),
        })
    }
}

/// The locus of `kind` of `f` over its parameters, as the zero set of a
/// witness. Parameters whose fiber is empty belong to every locus.
pub fn compute_locus(f: &ConstructibleFunction, kind: LocusKind, mode: &Mode) -> Result<LocusResult> {
    let terms = match kind {
        LocusKind::Vanishing => iva_terms(&f.terms, &f.domain, &f.vars)?,
        _ => divergence_terms(f, kind)?,
    };
    let witness = ConstructibleFunction::new(f.params.clone(), vec![], Formula::True, terms)?
        .normalized()
        .pruned(mode);
    Ok(LocusResult { kind, witness, mode: mode.clone() })
}

/// Terms of `f` on a one-variable cell, written in the cell coordinate `Z`.
pub(crate) fn terms_on_cell(terms: &[Term], cell: &crate::rectilinear::Cell, y: &str) -> Result<Vec<Term>> {
    let yz = cell.y_of(&Poly::var(Z));
    let mut out = Vec::new();
    for (i, t) in terms.iter().enumerate() {
        let g = &cell.reps[i + 1];
        if *g == Formula::False {
            continue;
        }
        let t = Term { guard: g.clone(), ..t.clone() }.substitute(y, &yz)?;
        out.extend(t.normalize());
    }
    Ok(out)
}

pub(crate) fn tracked_for(terms: &[Term], domain: &Formula) -> Vec<Formula> {
    let mut tracked = vec![domain.clone()];
    tracked.extend(terms.iter().map(|t| t.guard.clone()));
    tracked
}

fn squares_of(classes: &[Class], guard: &Formula) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for c in classes {
        let coeffs = restrict_terms(&c.coeffs, guard)?;
        out.extend(square_terms(&coeffs));
    }
    Ok(out)
}

/// A nonnegative witness over the outer variables vanishing exactly where
/// `sum terms` vanishes on the whole fiber of `domain` in `y`.
fn iva_1d(terms: &[Term], domain: &Formula, y: &str) -> Result<Vec<Term>> {
    vanishing_1d(terms, domain, y, false)
}

/// A nonnegative witness over the other variables vanishing exactly where
/// `sum terms` vanishes for all sufficiently large `y`.
pub(crate) fn eventually_zero(terms: &[Term], domain: &Formula, y: &str) -> Result<Vec<Term>> {
    vanishing_1d(terms, domain, y, true)
}

fn vanishing_1d(terms: &[Term], domain: &Formula, y: &str, tail_only: bool) -> Result<Vec<Term>> {
    let cells = cells_1d(y, &tracked_for(terms, domain), &Formula::True)?;
    let zs = [Z.to_string()];
    let mut out = Vec::new();
    for cell in &cells {
        if tail_only && cell.kind != CellKind::Up {
            continue;
        }
        let on = terms_on_cell(terms, cell, y)?;
        if on.is_empty() {
            continue;
        }
        let classes = group(expand_terms(&on, &zs)?);
        match &cell.kind {
            CellKind::Up | CellKind::Down => {
                let pairs = equality_pairs(&classes, true);
                for r in regions(&cell.cond, &[], &classes, &pairs)? {
                    out.extend(squares_of(&merged_classes(&classes, &pairs, &r), &r.guard)?);
                }
            }
            CellKind::Bounded(len) => {
                let pairs = equality_pairs(&classes, false);
                for r in regions(&cell.cond, &[], &classes, &pairs)? {
                    let t = zero_count_bound(&classes, &pairs, &r);
                    let long = Formula::and(vec![r.guard.clone(), poly_ge0(&len.sub(&Poly::from_int(t as i64)))?]);
                    out.extend(squares_of(&merged_classes(&classes, &pairs, &r), &long)?);
                    for k in 1..t {
                        let short = Formula::and(vec![r.guard.clone(), poly_eq0(&len.sub(&Poly::from_int(k as i64)))?]);
                        if !is_satisfiable(&short)? {
                            continue;
                        }
                        for j in 0..k {
                            let at: Vec<Term> = on
                                .iter()
                                .map(|t| t.substitute(Z, &Poly::from_int(j as i64)))
                                .collect::<Result<_>>()?;
                            out.extend(square_terms(&restrict_terms(&at, &short)?));
                        }
                    }
                }
            }
        }
    }
    Ok(super::expand::normalize_terms(out))
}

/// A nonnegative witness over the parameters vanishing exactly where
/// `sum terms` vanishes on the whole fiber of `domain`.
pub(crate) fn iva_terms(terms: &[Term], domain: &Formula, vars: &[String]) -> Result<Vec<Term>> {
    if vars.is_empty() {
        return Ok(square_terms(&restrict_terms(terms, domain)?));
    }
    let mut ts = terms.to_vec();
    let mut dom = domain.clone();
    for y in vars.iter().rev() {
        ts = iva_1d(&ts, &dom, y)?;
        dom = eliminate_quantifiers(&Formula::exists(y, dom))?;
    }
    Ok(ts)
}

fn divergent(c: &Class, r: &Region, kind: LocusKind) -> bool {
    c.b.iter().zip(&c.a).any(|(b, a)| {
        let s = r.sign(b);
        match kind {
            LocusKind::Integrability => s >= 0,
            _ => s > 0 || (s == 0 && *a > 0),
        }
    })
}

/// Per piece and sign region, the merged monomials that break summability
/// (or boundedness) are collected into an auxiliary function of the
/// parameters and bounded coordinates, whose vanishing locus is returned.
fn divergence_terms(f: &ConstructibleFunction, kind: LocusKind) -> Result<Vec<Term>> {
    let guards: Vec<Formula> = f.terms.iter().map(|t| t.guard.clone()).collect();
    let pieces = rectilinearize(&f.domain, &f.params, &f.vars, &guards)?;
    let mut out = Vec::new();
    for piece in &pieces {
        let zs = piece.unbounded_coords();
        if zs.is_empty() {
            continue;
        }
        let terms = terms_on_piece(f, piece)?;
        let classes = group(expand_terms(&terms, &zs)?);
        let pairs = equality_pairs(&classes, true);
        let signs: Vec<Poly> = classes.iter().flat_map(|c| c.b.iter().cloned()).collect();
        let mut aux = Vec::new();
        for r in regions(&piece.bounded_part, &signs, &classes, &pairs)? {
            let bad: Vec<Class> = merged_classes(&classes, &pairs, &r)
                .into_iter()
                .filter(|c| divergent(c, &r, kind))
                .collect();
            aux.extend(squares_of(&bad, &r.guard)?);
        }
        if aux.is_empty() {
            continue;
        }
        out.extend(iva_terms(&aux, &piece.bounded_part, &piece.bounded_coords())?);
    }
    Ok(super::expand::normalize_terms(out))
}
