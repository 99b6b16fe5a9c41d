//! Riemann sums over residue classes modulo `p^k`, for `Q_p` and `F_p((t))`.
//!
//! A class is a digit string of length `k` per coordinate (`p`-adic digits
//! or Laurent coefficients). Its valuation and angular component are read off
//! the first nonzero digit; the all-zero class of a coordinate is unresolved.
//! Without phases the integrand depends only on valuations and first digits,
//! so classes with equal `(ord, ac)` are summed together.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde_json::{json, Value as Json};

use super::{CoordSpec, Phase, SkeletonIntegrand};
use crate::engine::LocusKind;
use crate::error::{Error, Result};
use crate::presburger::evaluate_formula;

pub const SUPPORTED_PRIMES: &[u64] = &[2, 3, 5, 7, 11, 13];

/// Default largest number of joint classes enumerated in one integral,
/// overridden by `LOCI_CLASS_BUDGET`.
pub const CLASS_BUDGET: u64 = 1 << 22;

pub fn default_class_budget() -> u64 {
    std::env::var("LOCI_CLASS_BUDGET").ok().and_then(|s| s.parse().ok()).unwrap_or(CLASS_BUDGET)
}

/// Absolute error below which a truncated integral counts as convergent.
pub const INTEGRABLE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendKind {
    /// The `p`-adic numbers.
    Qp,
    /// Formal Laurent series over `F_p`.
    Fpt,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Qp => "qp",
            BackendKind::Fpt => "fpt",
        })
    }
}

impl FromStr for BackendKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qp" | "Qp" => Ok(BackendKind::Qp),
            "fpt" | "Fpt" | "laurent" => Ok(BackendKind::Fpt),
            _ => Err(Error::InvalidArgument(format!("unknown backend `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalFieldBackend {
    pub kind: BackendKind,
    pub p: u64,
    pub depth: u32,
    /// Cap on the number of joint classes.
    pub budget: u64,
}

impl LocalFieldBackend {
    pub fn new(kind: BackendKind, p: u64, depth: u32) -> Result<Self> {
        if !SUPPORTED_PRIMES.contains(&p) {
            return Err(Error::InvalidArgument(format!("unsupported prime {p}")));
        }
        if depth == 0 {
            return Err(Error::InvalidArgument("truncation depth must be at least 1".into()));
        }
        Ok(LocalFieldBackend { kind, p, depth, budget: default_class_budget() })
    }

    /// Smallest depth with `p^-k <= 2^-14`.
    pub fn default_depth(p: u64) -> u32 {
        let mut k = 1;
        while (p as f64).powi(k as i32) < 16384.0 {
            k += 1;
        }
        k
    }

    /// The lattice data the integral reduces to. It does not depend on the
    /// backend; the prime only enters through the validity of angular lists.
    pub fn reduce(&self, f: &SkeletonIntegrand) -> Result<crate::constructible::ConstructibleFunction> {
        f.validate_for(self.p)?;
        f.reduction()
    }

    /// `psi(h(x))` on the class of `x`, or `None` when the class is too
    /// coarse to fix it. `x[j] < p^k` is the class representative.
    fn psi(&self, ph: &Phase, x: &[u64], r: &[u32]) -> Option<Complex64> {
        let k = self.depth as i64;
        let total: i64 = ph.exps.iter().zip(r).map(|(e, r)| *e as i64 * *r as i64).sum();
        for (e, rj) in ph.exps.iter().zip(r) {
            if *e > 0 && ph.p_exp + k + total - (*rj as i64) < 1 {
                return None;
            }
        }
        if ph.exps.iter().all(|e| *e == 0) && ph.p_exp < 0 {
            return None;
        }
        let p = self.p as u128;
        let turn = |num: u128, den: u128| Complex64::from_polar(1.0, std::f64::consts::TAU * num as f64 / den as f64);
        match self.kind {
            BackendKind::Qp => {
                // psi(h) = exp(2 pi i {h/p}_p)
                let w = ph.p_exp - 1 + total;
                if w >= 0 {
                    return Some(Complex64::new(1.0, 0.0));
                }
                let m = p.pow((-w) as u32);
                let mut acc = (ph.unit.rem_euclid(m as i64)) as u128;
                for ((e, xj), rj) in ph.exps.iter().zip(x).zip(r) {
                    let unit = (*xj as u128 / p.pow(*rj)) % m;
                    for _ in 0..*e {
                        acc = acc * unit % m;
                    }
                }
                Some(turn(acc, m))
            }
            BackendKind::Fpt => {
                // psi(h) = exp(2 pi i a_0(h) / p), a_0 the constant coefficient
                if ph.p_exp > 0 {
                    return Some(Complex64::new(1.0, 0.0));
                }
                let d = (-ph.p_exp) as usize;
                let mut acc = vec![0u128; d + 1];
                acc[0] = ph.unit.rem_euclid(self.p as i64) as u128;
                for (e, xj) in ph.exps.iter().zip(x) {
                    let mut digits = vec![0u128; d + 1];
                    let mut v = *xj as u128;
                    for slot in digits.iter_mut() {
                        *slot = v % p;
                        v /= p;
                    }
                    for _ in 0..*e {
                        let mut next = vec![0u128; d + 1];
                        for (i, a) in acc.iter().enumerate() {
                            for (j, b) in digits.iter().enumerate().take(d + 1 - i) {
                                next[i + j] = (next[i + j] + a * b) % p;
                            }
                        }
                        acc = next;
                    }
                }
                Some(turn(acc[d], p))
            }
        }
    }
}

/// A truncated integral with its error estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericIntegral {
    pub value: Complex64,
    /// Unresolved measure times a local sup bound of `|f|` on it.
    pub error: f64,
    pub unresolved_mass: f64,
    /// Number of joint classes visited.
    pub classes: u64,
}

impl NumericIntegral {
    pub fn to_json(&self) -> Json {
        json!({
            "re": self.value.re,
            "im": self.value.im,
            "error": self.error,
            "unresolved_mass": self.unresolved_mass,
            "classes": self.classes,
        })
    }
}

#[derive(Clone, Copy, Debug)]
struct Atom {
    r: Option<u32>,
    digit: u64,
    value: u64,
    weight: f64,
}

fn atoms(p: u64, k: u32, full: bool) -> Vec<Atom> {
    let pk = p.pow(k);
    let unit = 1.0 / pk as f64;
    let mut out = vec![Atom { r: None, digit: 0, value: 0, weight: unit }];
    if full {
        for x in 1..pk {
            let (mut r, mut y) = (0, x);
            while y % p == 0 {
                y /= p;
                r += 1;
            }
            out.push(Atom { r: Some(r), digit: y % p, value: x, weight: unit });
        }
    } else {
        for r in 0..k {
            for d in 1..p {
                out.push(Atom { r: Some(r), digit: d, value: d * p.pow(r), weight: (p as f64).powi(-(r as i32) - 1) });
            }
        }
    }
    out
}

struct Scan {
    value: Complex64,
    error: f64,
    unresolved: f64,
    classes: u64,
    /// Largest `|f|` seen, local bounds included.
    sup: f64,
    /// Largest `|f|` on resolved classes.
    sup_resolved: f64,
}

struct Eval<'a> {
    f: &'a SkeletonIntegrand,
    b: LocalFieldBackend,
    s: Vec<BigInt>,
    vars: Vec<String>,
    q: f64,
    conds: HashMap<Vec<i64>, Vec<bool>>,
    amps: HashMap<Vec<i64>, (f64, Vec<f64>)>,
    local: HashMap<(Vec<Option<u32>>, u32), f64>,
}

impl<'a> Eval<'a> {
    fn point(&self, r: &[i64]) -> Vec<BigInt> {
        self.s.iter().cloned().chain(r.iter().map(|x| BigInt::from(*x))).collect()
    }

    fn conds(&mut self, r: &[i64]) -> Result<Vec<bool>> {
        if let Some(c) = self.conds.get(r) {
            return Ok(c.clone());
        }
        let pt = self.point(r);
        let mut out = Vec::new();
        for c in &self.f.cells {
            let ok = !c.has_zero_center() && evaluate_formula(&c.condition, &self.vars, &pt)?;
            out.push(ok);
        }
        self.conds.insert(r.to_vec(), out.clone());
        Ok(out)
    }

    /// Amplitude and phase coefficients at `r`.
    fn amps(&mut self, r: &[i64]) -> Result<(f64, Vec<f64>)> {
        if let Some(a) = self.amps.get(r) {
            return Ok(a.clone());
        }
        let pt = self.point(r);
        let a = self.f.amplitude.evaluate_scalar(&pt, &self.q)?;
        let gs = self
            .f
            .oscillation
            .iter()
            .map(|ph| ph.coeff.evaluate_scalar(&pt, &self.q))
            .collect::<Result<Vec<_>>>()?;
        self.amps.insert(r.to_vec(), (a, gs.clone()));
        Ok((a, gs))
    }

    fn magnitude(&mut self, r: &[i64]) -> Result<f64> {
        if !self.conds(r)?.iter().any(|b| *b) {
            return Ok(0.0);
        }
        let (a, gs) = self.amps(r)?;
        Ok(a.abs() + gs.iter().map(|g| g.abs()).sum::<f64>())
    }

    /// Sup of `|f|` with the unresolved valuations ranging over `[lo, lo + 2k]`.
    fn local_sup(&mut self, pattern: &[Option<u32>], lo: u32) -> Result<f64> {
        let key = (pattern.to_vec(), lo);
        if let Some(v) = self.local.get(&key) {
            return Ok(*v);
        }
        let v = self.local_sup_uncached(pattern, lo)?;
        self.local.insert(key, v);
        Ok(v)
    }

    fn local_sup_uncached(&mut self, pattern: &[Option<u32>], lo: u32) -> Result<f64> {
        let k = self.b.depth as i64;
        let lo = lo as i64;
        let free: Vec<usize> = (0..pattern.len()).filter(|i| pattern[*i].is_none()).collect();
        let mut per = 2 * k + 1;
        let mut step = 1;
        while per.pow(free.len() as u32) > 20000 {
            step += 1;
            per = 2 * k / step + 1;
        }
        let mut r: Vec<i64> = pattern.iter().map(|x| x.map_or(lo, |v| v as i64)).collect();
        let mut best = 0.0f64;
        loop {
            best = best.max(self.magnitude(&r)?);
            let mut i = 0;
            loop {
                if i == free.len() {
                    return Ok(best);
                }
                let j = free[i];
                if r[j] + step <= lo + 2 * k {
                    r[j] += step;
                    break;
                }
                r[j] = lo;
                i += 1;
            }
        }
    }

    /// Resolves the class `picked` below the truncation, valuations
    /// `k..k + T` of its unresolved coordinates at a time. Only valid when
    /// every phase is trivial there. What remains below `k + T` is bounded
    /// by the local sup on the deeper window.
    fn tail(&mut self, picked: &[Atom], out: &mut Scan) -> Result<()> {
        let (p, k) = (self.b.p, self.b.depth);
        let top = k + tail_depth(p);
        let base: f64 = picked.iter().filter(|a| a.r.is_some()).map(|a| a.weight).product();
        let free: Vec<usize> = (0..picked.len()).filter(|i| picked[*i].r.is_none()).collect();
        let mut options: Vec<(Option<u32>, u64, f64)> = Vec::new();
        for r in k..top {
            for d in 1..p {
                options.push((Some(r), d, (p as f64).powi(-(r as i32) - 1)));
            }
        }
        options.push((None, 0, (p as f64).powi(-(top as i32))));
        let mut idx = vec![0usize; free.len()];
        let mut pattern: Vec<Option<u32>> = picked.iter().map(|a| a.r).collect();
        let mut digits: Vec<u64> = picked.iter().map(|a| a.digit).collect();
        loop {
            let mut w = base;
            for (slot, i) in free.iter().zip(&idx) {
                let (r, d, wt) = options[*i];
                pattern[*slot] = r;
                digits[*slot] = d;
                w *= wt;
            }
            if pattern.iter().any(|r| r.is_none()) {
                let bound = self.local_sup(&pattern, top)?;
                out.unresolved += w;
                out.error += w * bound;
                out.sup = out.sup.max(bound);
            } else {
                let ri: Vec<i64> = pattern.iter().map(|x| x.unwrap() as i64).collect();
                let conds = self.conds(&ri)?;
                let hit = self.f.cells.iter().zip(&conds).any(|(c, ok)| {
                    *ok && c.coords.iter().zip(&digits).all(|(spec, d)| match spec {
                        CoordSpec::Ord(ac) => ac.allows(*d, p),
                        CoordSpec::Zero => false,
                    })
                });
                if hit {
                    let (a, gs) = self.amps(&ri)?;
                    let mag = a.abs() + gs.iter().map(|g| g.abs()).sum::<f64>();
                    out.sup = out.sup.max(mag);
                    out.sup_resolved = out.sup_resolved.max(mag);
                    out.value += Complex64::new(a + gs.iter().sum::<f64>(), 0.0) * w;
                }
            }
            let mut i = 0;
            loop {
                if i == idx.len() {
                    return Ok(());
                }
                idx[i] += 1;
                if idx[i] < options.len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }
}

/// Extra valuations resolved below the truncation: the smallest `T` with
/// `p^-T <= 2^-40`.
fn tail_depth(p: u64) -> u32 {
    let mut t = 1;
    while (p as f64).powi(t as i32) < 2f64.powi(40) {
        t += 1;
    }
    t
}

/// Whether every phase is identically 1 on the classes of `pattern`, with
/// the unresolved valuations at least `k`.
fn phases_trivial_below(f: &SkeletonIntegrand, pattern: &[Option<u32>], k: u32) -> bool {
    f.oscillation.iter().all(|ph| {
        let v: i64 = ph.exps.iter().zip(pattern).map(|(e, r)| *e as i64 * r.unwrap_or(k) as i64).sum();
        ph.p_exp + v >= 1
    })
}

fn scan(f: &SkeletonIntegrand, b: &LocalFieldBackend, s: &[BigInt]) -> Result<Scan> {
    f.validate()?;
    f.validate_for(b.p)?;
    if s.len() != f.params.len() {
        return Err(Error::ArityMismatch { expected: f.params.len(), got: s.len() });
    }
    let full = !f.oscillation.is_empty();
    let atoms = atoms(b.p, b.depth, full);
    let m = f.dim();
    let joint = (atoms.len() as u64).checked_pow(m as u32).filter(|n| *n <= b.budget);
    let joint = joint.ok_or_else(|| {
        Error::ResourceLimit(format!("{}^{m} classes exceed the budget {}", atoms.len(), b.budget))
    })?;
    let mut ev = Eval {
        f,
        b: *b,
        s: s.to_vec(),
        vars: f.params.iter().chain(&f.rvars).cloned().collect(),
        q: b.p as f64,
        conds: HashMap::new(),
        amps: HashMap::new(),
        local: HashMap::new(),
    };
    let mut out = Scan {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
        unresolved: 0.0,
        classes: joint,
        sup: 0.0,
        sup_resolved: 0.0,
    };
    let mut resolved_any = false;
    let mut idx = vec![0usize; m];
    'classes: loop {
        let picked: Vec<Atom> = idx.iter().map(|i| atoms[*i]).collect();
        let weight: f64 = picked.iter().map(|a| a.weight).product();
        let pattern: Vec<Option<u32>> = picked.iter().map(|a| a.r).collect();
        let advance = |idx: &mut Vec<usize>| -> bool {
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < atoms.len() {
                    return true;
                }
                *slot = 0;
            }
            false
        };
        if pattern.iter().any(|r| r.is_none()) {
            if phases_trivial_below(f, &pattern, b.depth) {
                ev.tail(&picked, &mut out)?;
            } else {
                let bound = ev.local_sup(&pattern, b.depth)?;
                out.unresolved += weight;
                out.error += weight * bound;
                out.sup = out.sup.max(bound);
            }
            if !advance(&mut idx) {
                break;
            }
            continue;
        }
        resolved_any = true;
        let r: Vec<u32> = pattern.iter().map(|x| x.unwrap()).collect();
        let ri: Vec<i64> = r.iter().map(|x| *x as i64).collect();
        let conds = ev.conds(&ri)?;
        let hit = f.cells.iter().zip(&conds).any(|(c, ok)| {
            *ok && c.coords.iter().zip(&picked).all(|(spec, a)| match spec {
                CoordSpec::Ord(ac) => ac.allows(a.digit, b.p),
                CoordSpec::Zero => false,
            })
        });
        if hit {
            let (a, gs) = ev.amps(&ri)?;
            let mag = a.abs() + gs.iter().map(|g| g.abs()).sum::<f64>();
            out.sup = out.sup.max(mag);
            out.sup_resolved = out.sup_resolved.max(mag);
            let mut v = Complex64::new(a, 0.0);
            let xs: Vec<u64> = picked.iter().map(|a| a.value).collect();
            for (ph, g) in f.oscillation.iter().zip(&gs) {
                if *g == 0.0 {
                    continue;
                }
                match b.psi(ph, &xs, &r) {
                    Some(z) => v += z * *g,
                    None => {
                        out.unresolved += weight;
                        out.error += weight * mag;
                        if !advance(&mut idx) {
                            break 'classes;
                        }
                        continue 'classes;
                    }
                }
            }
            out.value += v * weight;
        }
        if !advance(&mut idx) {
            break;
        }
    }
    if m > 0 && !resolved_any {
        return Err(Error::Numeric("truncation depth too small to resolve any class".into()));
    }
    Ok(out)
}

/// `integral_{O_K^m} f(s, x) |dx|` truncated at depth `k`.
pub fn numeric_integrate(f: &SkeletonIntegrand, backend: &LocalFieldBackend, s: &[BigInt]) -> Result<NumericIntegral> {
    let sc = scan(f, backend, s)?;
    Ok(NumericIntegral { value: sc.value, error: sc.error, unresolved_mass: sc.unresolved, classes: sc.classes })
}

/// Numeric verdict on whether `s` lies in the locus of `kind`: integrable
/// when the tail bound is below [`INTEGRABLE_TOL`], bounded when refining the
/// truncation does not raise the sup, vanishing when no sampled value is
/// nonzero.
pub fn numeric_verdict(f: &SkeletonIntegrand, backend: &LocalFieldBackend, s: &[BigInt], kind: LocusKind) -> Result<bool> {
    let sc = scan(f, backend, s)?;
    Ok(match kind {
        LocusKind::Integrability => sc.error < INTEGRABLE_TOL,
        LocusKind::Boundedness => sc.sup <= sc.sup_resolved * (1.0 + 1e-9),
        LocusKind::Vanishing => sc.sup == 0.0,
    })
}
