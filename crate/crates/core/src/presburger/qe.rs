use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::formula::Formula;
use super::linear::LinearTerm;
use super::simplify::{nnf, simplify};
use crate::error::{Error, Result};

/// Limits for quantifier elimination.
#[derive(Clone, Debug)]
pub struct QeConfig {
    /// Maximum formula size (in nodes) tolerated for any intermediate result.
    pub max_nodes: usize,
}

impl Default for QeConfig {
    fn default() -> Self {
        let max_nodes = std::env::var("LOCI_QE_BUDGET")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(2_000_000);
        QeConfig { max_nodes }
    }
}

/// Returns a quantifier-free formula equivalent to `f` with the same free variables
/// (possibly fewer, if some turn out to be irrelevant).
pub fn eliminate_quantifiers(f: &Formula) -> Result<Formula> {
    eliminate_quantifiers_with(f, &QeConfig::default())
}

pub fn eliminate_quantifiers_with(f: &Formula, cfg: &QeConfig) -> Result<Formula> {
    f.check_scoping()?;
    let out = qe(f, cfg)?;
    Ok(simplify(&out))
}

fn qe(f: &Formula, cfg: &QeConfig) -> Result<Formula> {
    Ok(match f {
        Formula::True | Formula::False | Formula::Ge(_) | Formula::Eq(_) | Formula::Dvd(..) => {
            simplify(f)
        }
        Formula::Not(g) => simplify(&Formula::not(qe(g, cfg)?)),
        Formula::And(fs) => simplify(&Formula::and(
            fs.iter().map(|g| qe(g, cfg)).collect::<Result<_>>()?,
        )),
        Formula::Or(fs) => simplify(&Formula::or(
            fs.iter().map(|g| qe(g, cfg)).collect::<Result<_>>()?,
        )),
        Formula::Exists(x, g) => {
            let body = qe(g, cfg)?;
            exists_qf(x, &body, cfg)?
        }
        Formula::Forall(x, g) => {
            let body = qe(g, cfg)?;
            let inner = exists_qf(x, &Formula::not(body), cfg)?;
            simplify(&Formula::not(inner))
        }
    })
}

fn check_budget(f: &Formula, cfg: &QeConfig) -> Result<()> {
    let n = f.size();
    if n > cfg.max_nodes {
        return Err(Error::ResourceLimit(format!(
            "intermediate formula has {n} nodes (limit {})",
            cfg.max_nodes
        )));
    }
    Ok(())
}

/// Eliminates `exists x` from a quantifier-free body.
pub(crate) fn exists_qf(x: &str, body: &Formula, cfg: &QeConfig) -> Result<Formula> {
    let phi = simplify(&nnf(body));
    if !phi.mentions(x) {
        return Ok(phi);
    }
    let disjuncts = match phi {
        Formula::Or(ds) => ds,
        d => vec![d],
    };
    let mut out = Vec::with_capacity(disjuncts.len());
    for d in disjuncts {
        let conj = match d {
            Formula::And(cs) => cs,
            c => vec![c],
        };
        let (with_x, without_x): (Vec<_>, Vec<_>) = conj.into_iter().partition(|c| c.mentions(x));
        let r = if with_x.is_empty() {
            Formula::True
        } else if let Some(r) = eq_shortcut(x, &with_x) {
            r
        } else {
            cooper(x, with_x, cfg)?
        };
        let r = simplify(&Formula::and(vec![r, Formula::and(without_x)]));
        check_budget(&r, cfg)?;
        out.push(r);
    }
    let r = simplify(&Formula::or(out));
    check_budget(&r, cfg)?;
    Ok(r)
}

/// `exists x. (c x + t = 0 and psi)`  is  `c | t and psi[x := -t/c]`.
fn eq_shortcut(x: &str, conj: &[Formula]) -> Option<Formula> {
    let (idx, t) = conj
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match c {
            Formula::Eq(t) if t.has_var(x) => Some((i, t)),
            _ => None,
        })
        .min_by_key(|(_, t)| t.coeff(x).abs())?;
    let mut c = t.coeff(x);
    let mut rest_t = t.without(x);
    if c.is_negative() {
        c = -c;
        rest_t = rest_t.neg();
    }
    // x = -rest_t / c
    let num = rest_t.neg();
    let mut parts = Vec::new();
    if !c.is_one() {
        parts.push(Formula::dvd(c.clone(), num.clone()));
    }
    for (i, g) in conj.iter().enumerate() {
        if i != idx {
            parts.push(g.substitute_scaled(x, &num, &c));
        }
    }
    Some(simplify(&Formula::and(parts)))
}

struct Prepared {
    phi: Formula,
    delta: BigInt,
    lower: BTreeSet<LinearTerm>,
    upper: BTreeSet<LinearTerm>,
    modulus: BigInt,
}

/// Scales `phi` so that `x` has unit coefficients (renaming `delta*x` to `x`)
/// and collects its lower and upper bounds and the period of its congruences.
fn prepare(x: &str, phi: Formula) -> Prepared {
    let mut delta = BigInt::one();
    phi.map_atoms(&mut |a| {
        if let Formula::Ge(t) | Formula::Eq(t) | Formula::Dvd(_, t) = a {
            let c = t.coeff(x);
            if !c.is_zero() {
                delta = delta.lcm(&c.abs());
            }
        }
        a.clone()
    });
    let mut phi = phi.map_atoms(&mut |a| unit_scale(a, x, &delta));
    if !delta.is_one() {
        phi = Formula::and(vec![phi, Formula::dvd(delta.clone(), LinearTerm::var(x))]);
    }
    let mut lower = BTreeSet::new();
    let mut upper = BTreeSet::new();
    let mut modulus = BigInt::one();
    phi.map_atoms(&mut |a| {
        match a {
            Formula::Ge(t) if t.has_var(x) => {
                if t.coeff(x).is_positive() {
                    lower.insert(t.without(x).neg());
                } else {
                    upper.insert(t.without(x));
                }
            }
            Formula::Eq(t) if t.has_var(x) => {
                let v = if t.coeff(x).is_positive() {
                    t.without(x).neg()
                } else {
                    t.without(x)
                };
                lower.insert(v.clone());
                upper.insert(v);
            }
            Formula::Dvd(n, t) if t.has_var(x) => modulus = modulus.lcm(n),
            _ => {}
        }
        a.clone()
    });
    Prepared { phi, delta, lower, upper, modulus }
}

/// Candidate values `num / den` for `x` such that, whenever the quantifier-free
/// `phi` has exactly one solution in `x`, that solution is among the candidates.
pub(crate) fn point_candidates(x: &str, phi: &Formula) -> Result<Vec<(LinearTerm, BigInt)>> {
    let Prepared { delta, lower, upper, modulus, .. } = prepare(x, simplify(&nnf(phi)));
    let d: u64 = modulus
        .try_into()
        .map_err(|_| Error::ResourceLimit("modulus too large".into()))?;
    let use_lower = !lower.is_empty() && (lower.len() <= upper.len() || upper.is_empty());
    let (pts, sign) = if use_lower { (&lower, 1i64) } else { (&upper, -1) };
    let mut out = Vec::new();
    for b in pts {
        for j in 0..d as i64 {
            out.push((b.add_constant(sign * j), delta.clone()));
        }
    }
    Ok(out)
}

fn cooper(x: &str, conj: Vec<Formula>, cfg: &QeConfig) -> Result<Formula> {
    let Prepared { phi, lower, upper, modulus, .. } = prepare(x, Formula::and(conj));
    let use_lower = lower.len() <= upper.len();
    let points = if use_lower { &lower } else { &upper };
    let d: u64 = modulus
        .try_into()
        .map_err(|_| Error::ResourceLimit("modulus too large".into()))?;
    let work = (points.len() as u128 + 1) * d as u128 * phi.size() as u128;
    if work > cfg.max_nodes as u128 * 8 {
        return Err(Error::ResourceLimit(format!(
            "elimination of `{x}` would enumerate {} candidates",
            (points.len() as u128 + 1) * d as u128
        )));
    }
    let inf = simplify(&phi.map_atoms(&mut |a| match a {
        Formula::Ge(t) if t.has_var(x) => {
            if t.coeff(x).is_positive() != use_lower {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Eq(t) if t.has_var(x) => Formula::False,
        a => a.clone(),
    }));
    let sign = if use_lower { BigInt::one() } else { -BigInt::one() };
    let mut out = Vec::new();
    for j in 0..d {
        let jj = &sign * BigInt::from(j);
        if inf.mentions(x) {
            out.push(simplify(&inf.substitute(x, &LinearTerm::constant(jj.clone()))));
        } else if j == 0 {
            out.push(inf.clone());
        }
        for b in points {
            out.push(simplify(&phi.substitute(x, &b.add_constant(jj.clone()))));
        }
        if out.iter().any(|f| *f == Formula::True) {
            return Ok(Formula::True);
        }
    }
    let r = simplify(&Formula::or(out));
    check_budget(&r, cfg)?;
    Ok(r)
}

fn unit_scale(a: &Formula, x: &str, delta: &BigInt) -> Formula {
    let scale = |t: &LinearTerm| -> (BigInt, LinearTerm) {
        let c = t.coeff(x);
        let k = delta / c.abs();
        let s = t.without(x).scale(&k);
        let unit = if c.is_positive() { BigInt::one() } else { -BigInt::one() };
        (k, s.add(&LinearTerm::scaled_var(x, unit)))
    };
    match a {
        Formula::Ge(t) if t.has_var(x) => Formula::Ge(scale(t).1),
        Formula::Eq(t) if t.has_var(x) => Formula::Eq(scale(t).1),
        Formula::Dvd(n, t) if t.has_var(x) => {
            let (k, s) = scale(t);
            Formula::dvd(n * k, s)
        }
        a => a.clone(),
    }
}

/// Decides satisfiability of `f` over the integers (free variables existentially closed).
pub fn is_satisfiable(f: &Formula) -> Result<bool> {
    is_satisfiable_with(f, &QeConfig::default())
}

pub fn is_satisfiable_with(f: &Formula, cfg: &QeConfig) -> Result<bool> {
    let vars = f.free_vars();
    if f.is_quantifier_free() && vars.len() <= 3 && super::eval::search_box(f, &vars, 3).is_some() {
        return Ok(true);
    }
    let closed = Formula::exists_all(&vars, f.clone());
    match eliminate_quantifiers_with(&closed, cfg)? {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        g => Err(Error::Numeric(format!("closed formula did not reduce: {g}"))),
    }
}

/// Truth of `f` for all integer values of its free variables.
pub fn is_valid(f: &Formula) -> Result<bool> {
    Ok(!is_satisfiable(&Formula::not(f.clone()))?)
}

pub fn equivalent(a: &Formula, b: &Formula) -> Result<bool> {
    is_valid(&Formula::iff(a.clone(), b.clone()))
}
