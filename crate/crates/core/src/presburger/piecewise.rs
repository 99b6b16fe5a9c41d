use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::eval::{eval_qf, Env};
use super::formula::Formula;
use super::linear::LinearTerm;
use super::qe::{eliminate_quantifiers, is_satisfiable, is_valid, point_candidates};
use super::simplify::{nnf, simplify};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// One piece of a piecewise-affine function: a quantifier-free guard over the
/// inputs and one rational affine value per output, integral on the guard.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePiece {
    pub guard: Formula,
    pub values: Vec<Poly>,
}

/// A Presburger function given by disjoint guards and affine values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseAffine {
    pub inputs: Vec<String>,
    pub pieces: Vec<AffinePiece>,
}

impl PiecewiseAffine {
    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    pub fn domain(&self) -> Formula {
        simplify(&Formula::or(self.pieces.iter().map(|p| p.guard.clone()).collect()))
    }

    /// Value at `point`, or `None` outside the domain.
    pub fn eval(&self, point: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
        if point.len() != self.inputs.len() {
            return Err(Error::ArityMismatch { expected: self.inputs.len(), got: point.len() });
        }
        let env: Env = self.inputs.iter().cloned().zip(point.iter().cloned()).collect();
        for p in &self.pieces {
            if eval_qf(&p.guard, &env)? {
                let vals = p
                    .values
                    .iter()
                    .map(|v| {
                        let r = v.eval_int(&env)?;
                        if !r.is_integer() {
                            return Err(Error::Numeric(format!("non-integral value {r} of {v}")));
                        }
                        Ok(r.to_integer())
                    })
                    .collect::<Result<Vec<_>>>()?;
                return Ok(Some(vals));
            }
        }
        Ok(None)
    }

    /// The graph as a quantifier-free formula in `inputs` and `outputs`.
    pub fn graph(&self, outputs: &[String]) -> Result<Formula> {
        let mut parts = Vec::new();
        for p in &self.pieces {
            let mut conj = vec![p.guard.clone()];
            for (y, v) in outputs.iter().zip(&p.values) {
                conj.push(value_eq(y, v)?);
            }
            parts.push(Formula::and(conj));
        }
        Ok(simplify(&Formula::or(parts)))
    }
}

impl fmt::Display for PiecewiseAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let vals: Vec<String> = p.values.iter().map(|v| v.to_string()).collect();
            write!(f, "{} : {}", p.guard, vals.join(", "))?;
        }
        Ok(())
    }
}

/// `y = v` for a rational affine `v`.
fn value_eq(y: &str, v: &Poly) -> Result<Formula> {
    let (t, d) = v.to_linear_scaled()?;
    Ok(Formula::Eq(LinearTerm::scaled_var(y, d).sub(&t)))
}

/// `phi[y := num/den]` together with `den | num`.
fn at_value(phi: &Formula, y: &str, num: &LinearTerm, den: &BigInt) -> Formula {
    let mut parts = vec![phi.substitute_scaled(y, num, den)];
    if !den.is_one() {
        parts.push(Formula::dvd(den.clone(), num.clone()));
    }
    simplify(&Formula::and(parts))
}

fn fresh(base: &str, taken: &[String]) -> String {
    let mut k = 0;
    loop {
        let name = format!("_{base}{k}");
        if !taken.contains(&name) {
            return name;
        }
        k += 1;
    }
}

/// Drops top-level conjuncts of `f` implied by the remaining ones and `context`.
fn reduce_in_context(f: &Formula, context: &Formula) -> Result<Formula> {
    let mut parts = match simplify(f) {
        Formula::And(v) => v,
        g => return Ok(g),
    };
    let mut i = 0;
    while i < parts.len() {
        let others: Vec<Formula> =
            parts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
        let hyp = Formula::and(vec![context.clone(), Formula::and(others)]);
        if is_valid(&Formula::implies(hyp, parts[i].clone()))? {
            parts.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(simplify(&Formula::and(parts)))
}

/// Recovers a piecewise-affine description of the function whose graph is `graph`.
///
/// `domain`, when given, must be contained in the projection of the graph;
/// otherwise the projection is used.
pub fn extract_piecewise_affine(
    graph: &Formula,
    inputs: &[String],
    outputs: &[String],
    domain: Option<&Formula>,
) -> Result<PiecewiseAffine> {
    let mut declared: Vec<String> = inputs.to_vec();
    declared.extend(outputs.iter().cloned());
    super::formula::check_declared(graph, &declared)?;
    let g = eliminate_quantifiers(graph)?;

    // functionality
    let primed: Vec<String> = outputs.iter().map(|y| fresh(y, &declared)).collect();
    let mut g2 = g.clone();
    for (y, y2) in outputs.iter().zip(&primed) {
        g2 = g2.rename(y, y2);
    }
    let differ = Formula::or(
        outputs
            .iter()
            .zip(&primed)
            .map(|(y, y2)| Formula::not(Formula::eq(LinearTerm::var(y), LinearTerm::var(y2))))
            .collect(),
    );
    if is_satisfiable(&Formula::and(vec![g.clone(), g2, differ]))? {
        return Err(Error::NotAFunction(format!("{graph}")));
    }

    let projection = eliminate_quantifiers(&Formula::exists_all(outputs, g.clone()))?;
    let dom = match domain {
        Some(d) => {
            if !is_valid(&Formula::implies(d.clone(), projection.clone()))? {
                return Err(Error::NotTotal(format!("{d}")));
            }
            simplify(d)
        }
        None => projection,
    };

    let mut components = Vec::new();
    for (k, y) in outputs.iter().enumerate() {
        let others: Vec<String> =
            outputs.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| v.clone()).collect();
        let gk = eliminate_quantifiers(&Formula::exists_all(&others, g.clone()))?;
        components.push(extract_single(&gk, y, &dom)?);
    }
    // common refinement
    let mut pieces: Vec<AffinePiece> = vec![AffinePiece { guard: dom.clone(), values: vec![] }];
    for comp in components {
        let mut next = Vec::new();
        for p in &pieces {
            for (guard, v) in &comp {
                let both = simplify(&Formula::and(vec![p.guard.clone(), guard.clone()]));
                if both == Formula::False || !is_satisfiable(&both)? {
                    continue;
                }
                let both = reduce_in_context(&both, &Formula::True)?;
                let mut values = p.values.clone();
                values.push(v.clone());
                next.push(AffinePiece { guard: both, values });
            }
        }
        pieces = next;
    }
    Ok(PiecewiseAffine { inputs: inputs.to_vec(), pieces })
}

/// Single-output extraction on `dom`, from a quantifier-free graph.
fn extract_single(g: &Formula, y: &str, dom: &Formula) -> Result<Vec<(Formula, Poly)>> {
    let body = simplify(&nnf(g));
    let cands = point_candidates(y, &body)?;
    // region of the domain where each candidate is the function value
    let mut regions: Vec<(Formula, Poly)> = Vec::new();
    for (num, den) in cands {
        let value = Poly::from_linear(&num).scale(&BigRational::new(BigInt::one(), den.clone()));
        if regions.iter().any(|(_, v)| *v == value) {
            continue;
        }
        let r = simplify(&Formula::and(vec![dom.clone(), at_value(&body, y, &num, &den)]));
        if r == Formula::False || !is_satisfiable(&r)? {
            continue;
        }
        regions.push((r, value));
    }
    // drop regions covered by the others, simplest values first
    let mut order: Vec<usize> = (0..regions.len()).collect();
    order.sort_by_key(|&i| (regions[i].1.vars().len(), regions[i].1.to_string().len()));
    let mut alive = vec![true; regions.len()];
    for i in order {
        let others = Formula::or(
            (0..regions.len())
                .filter(|&j| j != i && alive[j])
                .map(|j| regions[j].0.clone())
                .collect(),
        );
        if is_valid(&Formula::implies(regions[i].0.clone(), others))? {
            alive[i] = false;
        }
    }
    let mut regions: Vec<(Formula, Poly)> =
        regions.into_iter().zip(alive).filter(|(_, a)| *a).map(|(r, _)| r).collect();
    regions.sort_by_key(|(_, v)| {
        let neg = v.terms().iter().rev().any(|(m, c)| !m.is_empty() && c < &BigRational::from_integer(0.into()));
        (v.vars().len(), neg, v.to_string())
    });
    let covered = Formula::or(regions.iter().map(|r| r.0.clone()).collect());
    if !is_valid(&Formula::implies(dom.clone(), covered))? {
        return Err(Error::Numeric("piecewise extraction missed part of the domain".into()));
    }
    // make disjoint
    let mut out = Vec::new();
    let mut seen = Vec::new();
    for (r, v) in regions {
        let guard = simplify(&nnf(&Formula::and(vec![
            r.clone(),
            Formula::not(Formula::or(seen.clone())),
        ])));
        seen.push(r);
        if guard == Formula::False || !is_satisfiable(&guard)? {
            continue;
        }
        out.push((reduce_in_context(&guard, &Formula::True)?, v));
    }
    Ok(out)
}

/// Presburger functions `H_1..H_M` of the parameters whose graphs cover `set`.
///
/// `H_k(s)` is the k-th smallest element of the fiber over `s`, or its largest
/// element when the fiber has fewer than `k` points.
pub fn definable_choice(
    set: &Formula,
    params: &[String],
    y: &str,
    m: usize,
    param_set: Option<&Formula>,
) -> Result<Vec<PiecewiseAffine>> {
    if m == 0 {
        return Err(Error::InvalidArgument("bound must be at least 1".into()));
    }
    let mut declared = params.to_vec();
    declared.push(y.to_string());
    super::formula::check_declared(set, &declared)?;
    let mut taken = declared.clone();
    taken.extend(set.atoms().iter().flat_map(|a| a.free_vars()));
    let zs: Vec<String> = (0..=m)
        .map(|_| {
            let z = fresh("c", &taken);
            taken.push(z.clone());
            z
        })
        .collect();
    let in_set = |z: &str| set.rename(y, z);
    let chain = |n: usize, below: Option<&str>| -> Formula {
        // z_0 < ... < z_{n-1} (< below), all in the set
        let mut conj = Vec::new();
        for i in 0..n {
            conj.push(in_set(&zs[i]));
            if i + 1 < n {
                conj.push(Formula::lt(LinearTerm::var(&zs[i]), LinearTerm::var(&zs[i + 1])));
            }
        }
        if let (Some(b), true) = (below, n > 0) {
            conj.push(Formula::lt(LinearTerm::var(&zs[n - 1]), LinearTerm::var(b)));
        }
        Formula::exists_all(&zs[..n], Formula::and(conj))
    };

    let projection = eliminate_quantifiers(&Formula::exists(y, set.clone()))?;
    let dom = match param_set {
        Some(d) => {
            if !is_valid(&Formula::implies(d.clone(), projection.clone()))? {
                return Err(Error::EmptyFiber);
            }
            simplify(d)
        }
        None => projection,
    };
    let too_many = Formula::and(vec![dom.clone(), chain(m + 1, None)]);
    if is_satisfiable(&too_many)? {
        return Err(Error::FiberTooLarge(m));
    }

    let is_max = Formula::not(Formula::exists(
        &zs[0],
        Formula::and(vec![in_set(&zs[0]), Formula::lt(LinearTerm::var(y), LinearTerm::var(&zs[0]))]),
    ));
    let mut out = Vec::new();
    for k in 1..=m {
        let exactly = Formula::and(vec![chain(k - 1, Some(y)), Formula::not(chain(k, Some(y)))]);
        let short = Formula::and(vec![is_max.clone(), Formula::not(chain(k - 1, Some(y)))]);
        let graph = Formula::and(vec![set.clone(), Formula::or(vec![exactly, short])]);
        let g = eliminate_quantifiers(&graph)?;
        out.push(extract_piecewise_affine(&g, params, &[y.to_string()], Some(&dom))?);
    }
    Ok(out)
}

/// Checks that `f` maps into integers on every guard, and that guards are disjoint.
pub fn check_piecewise(f: &PiecewiseAffine) -> Result<bool> {
    for (i, a) in f.pieces.iter().enumerate() {
        for b in &f.pieces[i + 1..] {
            if is_satisfiable(&Formula::and(vec![a.guard.clone(), b.guard.clone()]))? {
                return Ok(false);
            }
        }
        for v in &a.values {
            let (t, d) = v.to_linear_scaled()?;
            if !d.is_one()
                && !is_valid(&Formula::implies(a.guard.clone(), Formula::dvd(d, t)))?
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

