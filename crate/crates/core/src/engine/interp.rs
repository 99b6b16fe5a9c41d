//! Interpolation: an everywhere integrable function agreeing with `f` on its
//! integrability locus.

use std::collections::BTreeMap;

use super::expand::{equality_pairs, expand_terms, group, merged_classes, regions, terms_on_piece};
use crate::constructible::{ConstructibleFunction, Mode, Term};
use crate::error::Result;
use crate::poly::Poly;
use crate::presburger::{simplify, Formula};
use crate::rectilinear::rectilinearize;

/// Drops, piece by piece and sign region by sign region, every merged
/// monomial that is not summable. The result is integrable for all
/// parameters and equals `f` wherever `f` is integrable.
pub fn interpolate(f: &ConstructibleFunction, mode: &Mode) -> Result<ConstructibleFunction> {
    let guards: Vec<Formula> = f.terms.iter().map(|t| t.guard.clone()).collect();
    let pieces = rectilinearize(&f.domain, &f.params, &f.vars, &guards)?;
    let mut out = Vec::new();
    for piece in &pieces {
        let zs = piece.unbounded_coords();
        let terms = terms_on_piece(f, piece)?;
        let back: BTreeMap<String, Poly> =
            piece.coords.iter().cloned().zip(piece.forward.iter().cloned()).collect();
        let to_source = |t: &Term| -> Result<Term> {
            let mut t = t.clone();
            for (c, fw) in &back {
                t = t.substitute(c, fw)?;
            }
            Ok(t)
        };
        let classes = group(expand_terms(&terms, &zs)?);
        let pairs = equality_pairs(&classes, true);
        let signs: Vec<Poly> = classes.iter().flat_map(|c| c.b.iter().cloned()).collect();
        for r in regions(&piece.bounded_part, &signs, &classes, &pairs)? {
            for c in merged_classes(&classes, &pairs, &r) {
                if c.b.iter().any(|b| r.sign(b) >= 0) {
                    continue;
                }
                for t in &c.coeffs {
                    let mut t = t.clone();
                    t.guard = simplify(&Formula::and(vec![t.guard, r.guard.clone()]));
                    if t.guard == Formula::False {
                        continue;
                    }
                    for (z, (a, b)) in zs.iter().zip(c.a.iter().zip(&c.b)) {
                        t.factors.extend(std::iter::repeat(Poly::var(z)).take(*a as usize));
                        t.exponent = t.exponent.add(&b.mul(&Poly::var(z)));
                    }
                    let mut t = to_source(&t)?;
                    t.guard = Formula::and(vec![t.guard, piece.source.clone()]);
                    out.push(t);
                }
            }
        }
    }
    Ok(ConstructibleFunction::new(f.params.clone(), f.vars.clone(), f.domain.clone(), out)?
        .normalized()
        .pruned(mode))
}
