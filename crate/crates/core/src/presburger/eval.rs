use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::formula::Formula;
use super::qe::eliminate_quantifiers;
use crate::error::{Error, Result};

pub type Env = BTreeMap<String, BigInt>;

/// Evaluates `f` under `env`. Quantifiers range over all of Z: the point is
/// substituted and the remaining closed formula decided exactly.
pub fn evaluate(f: &Formula, env: &Env) -> Result<bool> {
    if f.is_quantifier_free() {
        return eval_qf(f, env);
    }
    let mut g = f.clone();
    for v in f.free_vars() {
        let val = env.get(&v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
        g = g.substitute(&v, &super::LinearTerm::constant(val.clone()));
    }
    match eliminate_quantifiers(&g)? {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        r => Err(Error::Numeric(format!("closed formula did not reduce: {r}"))),
    }
}

/// Evaluates `f` at `point`, whose coordinates are matched positionally with `vars`.
pub fn evaluate_formula(f: &Formula, vars: &[String], point: &[BigInt]) -> Result<bool> {
    if vars.len() != point.len() {
        return Err(Error::ArityMismatch { expected: vars.len(), got: point.len() });
    }
    let env: Env = vars.iter().cloned().zip(point.iter().cloned()).collect();
    evaluate(f, &env)
}

pub(crate) fn eval_qf(f: &Formula, env: &Env) -> Result<bool> {
    let term = |t: &super::LinearTerm| -> Result<BigInt> {
        let mut missing = None;
        let v = t.eval_with(|v| {
            let r = env.get(v).cloned();
            if r.is_none() {
                missing = Some(v.to_string());
            }
            r
        });
        v.ok_or_else(|| Error::UnboundVariable(missing.unwrap_or_default()))
    };
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Ge(t) => !term(t)?.is_negative(),
        Formula::Eq(t) => term(t)?.is_zero(),
        Formula::Dvd(n, t) => term(t)?.mod_floor(n).is_zero(),
        Formula::Not(g) => !eval_qf(g, env)?,
        Formula::And(fs) => {
            for g in fs {
                if !eval_qf(g, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for g in fs {
                if eval_qf(g, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            return Err(Error::InvalidArgument("quantified formula in eval_qf".into()))
        }
    })
}

/// Evaluates `f` with every quantifier restricted to `[-radius, radius]`.
/// Agrees with [`evaluate`] only when the radius is large enough; meant for testing.
pub fn evaluate_in_box(f: &Formula, env: &Env, radius: i64) -> Result<bool> {
    match f {
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let ex = matches!(f, Formula::Exists(..));
            let mut env = env.clone();
            for k in -radius..=radius {
                env.insert(v.clone(), BigInt::from(k));
                if evaluate_in_box(g, &env, radius)? == ex {
                    return Ok(ex);
                }
            }
            Ok(!ex)
        }
        Formula::Not(g) => Ok(!evaluate_in_box(g, env, radius)?),
        Formula::And(fs) => {
            for g in fs {
                if !evaluate_in_box(g, env, radius)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(fs) => {
            for g in fs {
                if evaluate_in_box(g, env, radius)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        _ => eval_qf(f, env),
    }
}

/// Looks for a point of the box `[-r, r]^n` satisfying the quantifier-free `f`.
pub(crate) fn search_box(f: &Formula, vars: &[String], r: i64) -> Option<Vec<BigInt>> {
    let n = vars.len();
    let side = (2 * r + 1) as usize;
    let total = side.checked_pow(n as u32)?;
    let mut env = Env::new();
    for idx in 0..total {
        let mut k = idx;
        let mut pt = Vec::with_capacity(n);
        for v in vars {
            let val = BigInt::from((k % side) as i64 - r);
            k /= side;
            env.insert(v.clone(), val.clone());
            pt.push(val);
        }
        if eval_qf(f, &env).ok()? {
            return Some(pt);
        }
    }
    None
}
