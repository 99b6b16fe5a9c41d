//! The `.pint` format:
//!
//! ```text
//! integrand NAME(s ; r1, r2) {
//!   cell (ord, ord ac in {1, 2}) where r1 <= s;
//!   cell (zero, ord ac depth 2);
//!   domain FORMULA;
//!   amplitude coeff = 1, exp = -s * r1;
//!   phase 1 * p^-2 * x1^1 : coeff = 1;
//! }
//! ```
//!
//! `r1..rm` name the valuations of `x1..xm`. Amplitude lines are summed.

use num_traits::ToPrimitive;

use super::{AcConstraint, CoordSpec, Phase, SkeletonCell, SkeletonIntegrand};
use crate::constructible::{ident_list, parse_term_fields, ConstructibleFunction};
use crate::error::{Error, Result};
use crate::presburger::{check_declared, parse_formula_at, Formula};
use crate::syntax::Cursor;

/// Parses all `integrand` blocks of a `.pint` file.
pub fn parse_pint(text: &str) -> Result<Vec<SkeletonIntegrand>> {
    let mut cur = Cursor::new(text)?;
    let mut out = Vec::new();
    while !cur.at_eof() {
        out.push(parse_integrand(&mut cur)?);
    }
    Ok(out)
}

fn small_int(cur: &mut Cursor) -> Result<i64> {
    let neg = cur.eat_sym("-");
    let n = cur.int()?;
    let n = n.to_i64().ok_or_else(|| cur.err("integer out of range"))?;
    Ok(if neg { -n } else { n })
}

fn coord_spec(cur: &mut Cursor) -> Result<CoordSpec> {
    if cur.eat_kw("zero") {
        return Ok(CoordSpec::Zero);
    }
    cur.expect_kw("ord")?;
    if !cur.eat_kw("ac") {
        return Ok(CoordSpec::Ord(AcConstraint::Any));
    }
    if cur.eat_kw("all") {
        return Ok(CoordSpec::Ord(AcConstraint::Units { depth: 1 }));
    }
    if cur.eat_kw("depth") {
        let d = small_int(cur)?;
        if d < 1 {
            return Err(cur.err("angular depth must be positive"));
        }
        return Ok(CoordSpec::Ord(AcConstraint::Units { depth: d as u32 }));
    }
    cur.expect_kw("in")?;
    cur.expect_sym("{")?;
    let mut ds = vec![small_int(cur)?];
    while cur.eat_sym(",") {
        ds.push(small_int(cur)?);
    }
    cur.expect_sym("}")?;
    Ok(CoordSpec::Ord(AcConstraint::Digits(ds)))
}

fn phase_monomial(cur: &mut Cursor, m: usize) -> Result<(i64, i64, Vec<u32>)> {
    let unit = small_int(cur)?;
    let mut p_exp = 0;
    let mut exps = vec![0u32; m];
    while cur.eat_sym("*") {
        let name = cur.ident()?;
        let e = if cur.eat_sym("^") { small_int(cur)? } else { 1 };
        if name == "p" {
            p_exp += e;
            continue;
        }
        let j = name
            .strip_prefix('x')
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|j| (1..=m).contains(j))
            .ok_or_else(|| Error::UnboundVariable(name.clone()))?;
        if e < 0 {
            return Err(cur.err("negative exponent on a coordinate"));
        }
        exps[j - 1] += e as u32;
    }
    if unit == 0 {
        return Err(cur.err("phase unit must be nonzero"));
    }
    Ok((unit, p_exp, exps))
}

fn parse_integrand(cur: &mut Cursor) -> Result<SkeletonIntegrand> {
    cur.expect_kw("integrand")?;
    let name = cur.ident()?;
    cur.expect_sym("(")?;
    let params = ident_list(cur, &[";", ")"])?;
    let rvars = if cur.eat_sym(";") { ident_list(cur, &[")"])? } else { vec![] };
    cur.expect_sym(")")?;
    cur.expect_sym("{")?;
    let m = rvars.len();
    let mut all = params.clone();
    all.extend(rvars.iter().cloned());
    let mut cells = Vec::new();
    let mut domain = Formula::True;
    let mut amp = Vec::new();
    let mut phases: Vec<Phase> = Vec::new();
    while !cur.eat_sym("}") {
        if cur.eat_kw("cell") {
            cur.expect_sym("(")?;
            let mut coords = Vec::new();
            if !cur.is_sym(")") {
                coords.push(coord_spec(cur)?);
                while cur.eat_sym(",") {
                    coords.push(coord_spec(cur)?);
                }
            }
            cur.expect_sym(")")?;
            if coords.len() != m {
                return Err(Error::ArityMismatch { expected: m, got: coords.len() });
            }
            let condition = if cur.eat_kw("where") {
                let f = parse_formula_at(cur)?;
                check_declared(&f, &all)?;
                f
            } else {
                Formula::True
            };
            cells.push(SkeletonCell { coords, condition });
        } else if cur.eat_kw("domain") {
            domain = parse_formula_at(cur)?;
            check_declared(&domain, &all)?;
        } else if cur.eat_kw("amplitude") {
            amp.push(parse_term_fields(cur, &all)?);
        } else if cur.eat_kw("phase") {
            let (unit, p_exp, exps) = phase_monomial(cur, m)?;
            cur.expect_sym(":")?;
            let t = parse_term_fields(cur, &all)?;
            match phases.iter_mut().find(|ph| ph.unit == unit && ph.p_exp == p_exp && ph.exps == exps) {
                Some(ph) => ph.coeff.terms.push(t),
                None => phases.push(Phase {
                    unit,
                    p_exp,
                    exps,
                    coeff: ConstructibleFunction::new(params.clone(), rvars.clone(), Formula::True, vec![t])?,
                }),
            }
        } else {
            return Err(cur.err("expected `cell`, `domain`, `amplitude` or `phase`"));
        }
        cur.expect_sym(";")?;
    }
    let amplitude = ConstructibleFunction::new(params.clone(), rvars.clone(), domain, amp)?;
    let f = SkeletonIntegrand { name, params, rvars, cells, amplitude, oscillation: phases };
    f.validate()?;
    Ok(f)
}
