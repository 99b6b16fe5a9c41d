//! Dense univariate polynomials over Z in the symbol `L`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::Scalar;

/// Coefficients low degree first; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct UPoly(Vec<BigInt>);

impl UPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly(coeffs)
    }

    pub fn from_i64s(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        UPoly(Vec::new())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    /// `L^k`
    pub fn monomial(k: usize) -> Self {
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = BigInt::one();
        UPoly(v)
    }

    /// `L^k - 1`
    pub fn l_pow_minus_one(k: usize) -> Self {
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = BigInt::one();
        v[0] -= 1;
        UPoly(v)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    /// Index of the lowest nonzero coefficient.
    pub fn low_degree(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    pub fn shift_down(&self, k: usize) -> Self {
        UPoly::new(self.0.iter().skip(k).cloned().collect())
    }

    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![BigInt::zero(); k];
        v.extend(self.0.iter().cloned());
        UPoly(v)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let mut v = vec![BigInt::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            v[i] += c;
        }
        for (i, c) in o.0.iter().enumerate() {
            v[i] += c;
        }
        UPoly::new(v)
    }

    pub fn neg(&self) -> Self {
        UPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut v = vec![BigInt::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        UPoly::new(v)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        UPoly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = UPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact division by a monic polynomial; `None` if the remainder is nonzero.
    pub fn div_exact_monic(&self, d: &Self) -> Option<Self> {
        let dd = d.degree()?;
        debug_assert!(d.0[dd].is_one());
        if self.is_zero() {
            return Some(UPoly::zero());
        }
        let sd = self.degree().unwrap();
        if sd < dd {
            return None;
        }
        let mut rem = self.0.clone();
        let mut q = vec![BigInt::zero(); sd - dd + 1];
        for k in (0..=sd - dd).rev() {
            let c = rem[k + dd].clone();
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.0.iter().enumerate() {
                rem[k + j] -= &c * dc;
            }
            q[k] = c;
        }
        if rem.iter().all(Zero::is_zero) {
            Some(UPoly::new(q))
        } else {
            None
        }
    }

    /// Gcd of the coefficients (nonnegative).
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn eval<T: Scalar>(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.0.iter().rev() {
            acc = acc * x.clone() + T::from_bigint(c);
        }
        acc
    }

    pub fn is_constant_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_one()
    }

    pub fn is_constant_minus_one(&self) -> bool {
        self.0.len() == 1 && self.0[0] == -BigInt::one()
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "L")?,
                (1, false) => write!(f, "{a}*L")?,
                (_, true) => write!(f, "L^{i}")?,
                (_, false) => write!(f, "{a}*L^{i}")?,
            }
        }
        Ok(())
    }
}

fn cyclo_cache() -> &'static Mutex<BTreeMap<usize, UPoly>> {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, UPoly>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// The `n`-th cyclotomic polynomial, `n >= 1`.
pub fn cyclotomic(n: usize) -> UPoly {
    assert!(n >= 1);
    if let Some(p) = cyclo_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut p = UPoly::l_pow_minus_one(n);
    for d in 1..n {
        if n % d == 0 {
            p = p
                .div_exact_monic(&cyclotomic(d))
                .expect("cyclotomic divisibility");
        }
    }
    cyclo_cache().lock().unwrap().insert(n, p.clone());
    p
}

/// Euler's totient.
pub fn totient(mut n: usize) -> usize {
    let mut r = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if n > 1 {
        r -= r / n;
    }
    r
}

/// Writes `p = ±L^k · ∏ Φ_d^{m_d}` if possible.
pub fn factor_l_cyclotomic(p: &UPoly) -> Option<(bool, usize, BTreeMap<usize, u32>)> {
    let k = p.low_degree()?;
    let mut rest = p.shift_down(k);
    let mut mult = BTreeMap::new();
    let deg = rest.degree().unwrap_or(0);
    let bound = 2 * deg * deg + 2;
    let mut d = 1;
    while rest.degree().unwrap_or(0) > 0 && d <= bound {
        if totient(d) <= rest.degree().unwrap() {
            let phi = cyclotomic(d);
            while let Some(q) = rest.div_exact_monic(&phi) {
                rest = q;
                *mult.entry(d).or_insert(0) += 1;
            }
        }
        d += 1;
    }
    if rest.is_constant_one() {
        Some((false, k, mult))
    } else if rest.is_constant_minus_one() {
        Some((true, k, mult))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomics_small() {
        assert_eq!(cyclotomic(1), UPoly::from_i64s(&[-1, 1]));
        assert_eq!(cyclotomic(2), UPoly::from_i64s(&[1, 1]));
        assert_eq!(cyclotomic(4), UPoly::from_i64s(&[1, 0, 1]));
        assert_eq!(cyclotomic(6), UPoly::from_i64s(&[1, -1, 1]));
        let mut prod = UPoly::one();
        for d in [1, 2, 3, 4, 6, 12] {
            prod = prod.mul(&cyclotomic(d));
        }
        assert_eq!(prod, UPoly::l_pow_minus_one(12));
    }

    #[test]
    fn factor_detects_non_cyclotomic() {
        assert!(factor_l_cyclotomic(&UPoly::from_i64s(&[-2, 1])).is_none());
        let (neg, k, m) = factor_l_cyclotomic(&UPoly::from_i64s(&[0, 1, 0, -1])).unwrap();
        // L - L^3 = -L (L-1)(L+1)
        assert!(neg);
        assert_eq!(k, 1);
        assert_eq!(m.get(&1), Some(&1));
        assert_eq!(m.get(&2), Some(&1));
    }

    #[test]
    fn display() {
        assert_eq!(UPoly::from_i64s(&[1, 0, -3]).to_string(), "-3*L^2 + 1");
        assert_eq!(UPoly::from_i64s(&[0, 1]).to_string(), "L");
    }
}
