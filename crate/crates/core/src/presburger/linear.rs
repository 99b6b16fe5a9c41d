use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// An integer affine form `sum c_v * v + constant`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinearTerm {
    coeffs: BTreeMap<String, BigInt>,
    constant: BigInt,
}

impl LinearTerm {
    pub fn new(coeffs: BTreeMap<String, BigInt>, constant: BigInt) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        LinearTerm { coeffs, constant }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        LinearTerm { coeffs: BTreeMap::new(), constant: c.into() }
    }

    pub fn var(name: &str) -> Self {
        Self::scaled_var(name, 1)
    }

    pub fn scaled_var(name: &str, c: impl Into<BigInt>) -> Self {
        Self::new(BTreeMap::from([(name.to_string(), c.into())]), BigInt::zero())
    }

    pub fn coeffs(&self) -> &BTreeMap<String, BigInt> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &BigInt {
        &self.constant
    }

    pub fn coeff(&self, v: &str) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_default()
    }

    pub fn has_var(&self, v: &str) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut c = self.coeffs.clone();
        for (v, k) in &o.coeffs {
            *c.entry(v.clone()).or_default() += k;
        }
        Self::new(c, &self.constant + &o.constant)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigInt::one())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(
            self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            &self.constant * k,
        )
    }

    pub fn add_constant(&self, k: impl Into<BigInt>) -> Self {
        let mut t = self.clone();
        t.constant += k.into();
        t
    }

    /// The term without variable `v`.
    pub fn without(&self, v: &str) -> Self {
        let mut t = self.clone();
        t.coeffs.remove(v);
        t
    }

    /// The term without its constant.
    pub fn linear_part(&self) -> Self {
        LinearTerm { coeffs: self.coeffs.clone(), constant: BigInt::zero() }
    }

    pub fn substitute(&self, v: &str, by: &LinearTerm) -> Self {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(c) => self.without(v).add(&by.scale(c)),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> Self {
        self.substitute(from, &LinearTerm::var(to))
    }

    /// Nonnegative gcd of the variable coefficients.
    pub fn coeff_gcd(&self) -> BigInt {
        self.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn eval_with(&self, mut lookup: impl FnMut(&str) -> Option<BigInt>) -> Option<BigInt> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * lookup(v)?;
        }
        Some(acc)
    }

    /// Sum of absolute values of the coefficients and the constant.
    pub fn norm1(&self) -> BigInt {
        self.coeffs.values().map(|c| c.abs()).sum::<BigInt>() + self.constant.abs()
    }

    pub(crate) fn fmt_linear(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
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
            if a.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{a}*{v}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "{}", self.constant);
        }
        self.fmt_linear(f)?;
        if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() { "-" } else { "+" };
            write!(f, " {sign} {}", self.constant.abs())?;
        }
        Ok(())
    }
}
