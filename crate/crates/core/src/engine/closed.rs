//! Closed forms for one-variable sums of `z^a * x^z` with `x = L^b`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::constructible::{poly_ge0, ConstructibleFunction, Term};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::presburger::{Formula, LinearTerm, PiecewiseAffine};
use crate::ring::AElement;

/// Numerators of `sum_{z >= 0} z^k x^z = N_k(x) / (1 - x)^(k+1)` for `k = 0..=a`,
/// as coefficient lists in `x`.
pub(crate) fn eulerian(a: u32) -> Vec<Vec<BigInt>> {
    let mut out = vec![vec![BigInt::one()]];
    for k in 1..=a as usize {
        let prev = &out[k - 1];
        // N_k = x(1-x) N'_{k-1} + k x N_{k-1}
        let mut next = vec![BigInt::zero(); prev.len() + 1];
        for (i, c) in prev.iter().enumerate() {
            if i > 0 {
                let d = c * BigInt::from(i);
                next[i] += &d;
                next[i + 1] -= &d;
            }
            next[i + 1] += c * BigInt::from(k);
        }
        while next.last().is_some_and(|c| c.is_zero()) {
            next.pop();
        }
        out.push(next);
    }
    out
}

/// `sum_{y >= 0} y^a L^(b*y)` for `b <= -1`.
pub fn sum_geometric_closed_form(a: u32, b: i64) -> Result<AElement> {
    if b >= 0 {
        return Err(Error::InvalidArgument(format!("geometric ratio L^{b} does not decay")));
    }
    let n = &eulerian(a)[a as usize];
    let mut num = AElement::zero();
    for (j, c) in n.iter().enumerate() {
        num = &num + &(&AElement::from_int(c.clone()) * &AElement::l_pow(b * j as i64));
    }
    Ok(&num * &AElement::geometric_inv(b)?.pow(a + 1))
}

fn scaled(t: &Term, c: &BigInt, exp: &Poly, factors: Vec<Poly>, geometric: Vec<Poly>) -> Term {
    let mut out = t.clone();
    out.coeff = &out.coeff * &AElement::from_int(c.clone());
    out.exponent = out.exponent.add(exp);
    out.factors.extend(factors);
    out.geometric.extend(geometric);
    out
}

/// `coeff * sum_{z >= 0} z^a L^(b z)`, valid where `b <= -1`.
pub(crate) fn unbounded_terms(coeff: &Term, a: u32, b: &Poly) -> Vec<Term> {
    let n = &eulerian(a)[a as usize];
    n.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| {
            let e = b.scale(&BigRational::from_integer(BigInt::from(j)));
            scaled(coeff, c, &e, vec![], vec![b.clone(); a as usize + 1])
        })
        .collect()
}

/// `coeff * sum_{z=0}^{len-1} z^a L^(b z)`, valid where `b != 0` and `len >= 0`.
pub(crate) fn finite_terms(coeff: &Term, a: u32, b: &Poly, len: &Poly) -> Vec<Term> {
    let eul = eulerian(a);
    let mut out = unbounded_terms(coeff, a, b);
    // minus x^len * sum_k C(a,k) len^(a-k) N_k(x) / (1-x)^(k+1)
    for k in 0..=a {
        let binom = binomial(a, k);
        for (j, c) in eul[k as usize].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = b.mul(&len.add(&Poly::from_int(j as i64)));
            out.push(scaled(
                coeff,
                &(-(c * &binom)),
                &e,
                vec![len.clone(); (a - k) as usize],
                vec![b.clone(); k as usize + 1],
            ));
        }
    }
    out
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

fn stirling2(a: u32, k: u32) -> BigInt {
    let mut row = vec![BigInt::one()];
    for n in 1..=a as usize {
        let mut next = vec![BigInt::zero(); n + 1];
        for j in 1..=n {
            let mut v = if j - 1 < row.len() { row[j - 1].clone() } else { BigInt::zero() };
            if j < row.len() {
                v += &row[j] * BigInt::from(j);
            }
            next[j] = v;
        }
        row = next;
    }
    row.get(k as usize).cloned().unwrap_or_default()
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn valuation(p: u64, n: &BigInt) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `t == rho (mod m)` for a rational affine `t` that is integral where used.
pub(crate) fn poly_congruent(t: &Poly, m: &BigInt, rho: &BigInt) -> Result<Formula> {
    let (lin, den) = t.to_linear_scaled()?;
    Ok(Formula::dvd(m * &den, lin.sub(&LinearTerm::constant(rho * &den))))
}

/// `coeff * sum_{z=0}^{len-1} z^a` for `len >= 0`, as terms whose factors are
/// integer valued: each binomial `C(len, k+1)` is split by the residue of `len`
/// so that the denominator is absorbed into the individual factors.
pub(crate) fn faulhaber_terms(coeff: &Term, a: u32, len: &Poly) -> Result<Vec<Term>> {
    if a == 0 {
        return Ok(vec![scaled(coeff, &BigInt::one(), &Poly::zero(), vec![len.clone()], vec![])]);
    }
    let mut out = Vec::new();
    for k in 1..=a {
        // S(a,k) k! C(len, k+1) = c * len (len-1) ... (len-k) / m
        let c0 = stirling2(a, k) * factorial(k);
        let full = factorial(k + 1);
        let g = c0.gcd(&full);
        let c = &c0 / &g;
        let m = &full / &g;
        let mu = m.to_u64().ok_or_else(|| Error::ResourceLimit("Faulhaber modulus".into()))?;
        let primes = prime_factors(mu);
        for rho in 0..mu {
            let mut divisors = vec![BigInt::one(); k as usize + 1];
            for &(p, e) in &primes {
                let mut left = e;
                for (i, d) in divisors.iter_mut().enumerate() {
                    if left == 0 {
                        break;
                    }
                    let r = (BigInt::from(rho) - BigInt::from(i)).mod_floor(&m);
                    let take = valuation(p, &r).min(e).min(left);
                    *d *= BigInt::from(p).pow(take);
                    left -= take;
                }
                debug_assert_eq!(left, 0);
            }
            let factors = divisors
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    len.sub(&Poly::from_int(i as i64)).scale(&BigRational::new(BigInt::one(), d.clone()))
                })
                .collect();
            let mut t = scaled(coeff, &c, &Poly::zero(), factors, vec![]);
            if mu > 1 {
                t.guard = Formula::and(vec![t.guard, poly_congruent(len, &m, &BigInt::from(rho))?]);
            }
            out.push(t);
        }
    }
    Ok(out)
}

/// `sum_{y=0}^{upper(s)} y^a L^(b y)` as a constructible function of the inputs
/// of `upper`; zero where `upper < 0`.
pub fn sum_finite_range(a: u32, b: i64, upper: &PiecewiseAffine) -> Result<ConstructibleFunction> {
    let mut terms = Vec::new();
    let bp = Poly::from_int(b);
    for piece in &upper.pieces {
        let u = piece.values.first().ok_or_else(|| Error::ArityMismatch { expected: 1, got: 0 })?;
        let len = u.add(&Poly::from_int(1));
        let base = Term::new(AElement::one())
            .with_guard(Formula::and(vec![piece.guard.clone(), poly_ge0(u)?]));
        if b == 0 {
            terms.extend(faulhaber_terms(&base, a, &len)?);
        } else {
            terms.extend(finite_terms(&base, a, &bp, &len));
        }
    }
    Ok(ConstructibleFunction::new(upper.inputs.clone(), vec![], Formula::True, terms)?.normalized())
}
