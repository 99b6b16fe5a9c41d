//! Multivariate polynomials with rational coefficients.
//!
//! Used for exponents and linear factors of constructible functions and for
//! rational affine pieces of Presburger functions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::presburger::LinearTerm;
use crate::scalar::Scalar;
use crate::syntax::{Cursor, Tok};

/// A monomial: variable name to positive exponent.
pub type Monomial = BTreeMap<String, u32>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::new(), c);
        }
        p
    }

    pub fn from_int(c: impl Into<BigInt>) -> Self {
        Poly::constant(BigRational::from_integer(c.into()))
    }

    pub fn var(v: &str) -> Self {
        let mut m = Monomial::new();
        m.insert(v.to_string(), 1);
        let mut p = Poly::zero();
        p.terms.insert(m, BigRational::one());
        p
    }

    pub fn from_linear(t: &LinearTerm) -> Self {
        let mut p = Poly::from_int(t.constant_part().clone());
        for (v, c) in t.coeffs() {
            p = p.add(&Poly::var(v).scale(&BigRational::from_integer(c.clone())));
        }
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.insert_add(m, c);
        }
        p
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_empty())
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms.get(&Monomial::new()).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.values().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: &str) -> u32 {
        self.terms.keys().map(|m| m.get(v).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn is_affine(&self) -> bool {
        self.total_degree() <= 1
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = self.terms.keys().flat_map(|m| m.keys().cloned()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.terms.keys().any(|m| m.contains_key(v))
    }

    /// Coefficient of the degree-one monomial `v`.
    pub fn linear_coeff(&self, v: &str) -> BigRational {
        let mut m = Monomial::new();
        m.insert(v.to_string(), 1);
        self.terms.get(&m).cloned().unwrap_or_else(BigRational::zero)
    }

    fn insert_add(&mut self, m: Monomial, c: BigRational) {
        let e = self.terms.entry(m).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.insert_add(m.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m = m1.clone();
                for (v, e) in m2 {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                r.insert_add(m, c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::from_int(1);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Replaces `v` by `by`.
    pub fn substitute(&self, v: &str, by: &Poly) -> Poly {
        if !self.mentions(v) {
            return self.clone();
        }
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let e = rest.remove(v).unwrap_or(0);
            let base = Poly { terms: BTreeMap::from([(rest, c.clone())]) };
            r = r.add(&base.mul(&by.pow(e)));
        }
        r
    }

    pub fn substitute_all(&self, map: &BTreeMap<String, Poly>) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for (v, e) in m {
                let f = map.get(v).cloned().unwrap_or_else(|| Poly::var(v));
                t = t.mul(&f.pow(*e));
            }
            r = r.add(&t);
        }
        r
    }

    pub fn rename(&self, from: &str, to: &str) -> Poly {
        self.substitute(from, &Poly::var(to))
    }

    /// Coefficients of `self` viewed as a polynomial in `v`: entry k multiplies `v^k`.
    pub fn coefficients_in(&self, v: &str) -> Vec<Poly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(); d + 1];
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let e = rest.remove(v).unwrap_or(0) as usize;
            out[e].insert_add(rest, c.clone());
        }
        out
    }

    /// Exact evaluation at an integer or rational point. Missing variables are an error.
    pub fn eval_rational(&self, env: &BTreeMap<String, BigRational>) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m {
                let x = env.get(v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
                t *= num_traits::pow(x.clone(), *e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_int(&self, env: &BTreeMap<String, BigInt>) -> Result<BigRational> {
        let env: BTreeMap<String, BigRational> =
            env.iter().map(|(k, v)| (k.clone(), BigRational::from_integer(v.clone()))).collect();
        self.eval_rational(&env)
    }

    /// Evaluation in any scalar type.
    pub fn eval<T: Scalar>(&self, env: &BTreeMap<String, T>) -> Result<T> {
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = T::from_rational(c);
            for (v, e) in m {
                let x = env.get(v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
                t = t * x.powi(*e as i64);
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// For an affine polynomial, returns `(t, d)` with `self = t / d`, `t` integral, `d > 0` minimal.
    pub fn to_linear_scaled(&self) -> Result<(LinearTerm, BigInt)> {
        if !self.is_affine() {
            return Err(Error::NonAffine(self.to_string()));
        }
        let d = self.terms.values().fold(BigInt::one(), |d, c| d.lcm(c.denom()));
        let mut coeffs = BTreeMap::new();
        let mut constant = BigInt::zero();
        for (m, c) in &self.terms {
            let k = (c * BigRational::from_integer(d.clone())).to_integer();
            match m.iter().next() {
                None => constant = k,
                Some((v, _)) => {
                    coeffs.insert(v.clone(), k);
                }
            }
        }
        Ok((LinearTerm::new(coeffs, constant), d))
    }

    /// Integer value at an integer point, if the value is integral.
    pub fn eval_to_i64(&self, env: &BTreeMap<String, BigInt>) -> Result<Option<i64>> {
        let r = self.eval_int(env)?;
        Ok(if r.is_integer() { r.to_integer().to_i64() } else { None })
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest total degree first, constant last
        let mut items: Vec<(&Monomial, &BigRational)> = self.terms.iter().collect();
        items.sort_by(|a, b| {
            let da: u32 = a.0.values().sum();
            let db: u32 = b.0.values().sum();
            db.cmp(&da).then_with(|| a.0.cmp(b.0))
        });
        for (i, (m, c)) in items.into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mono: Vec<String> = m
                .iter()
                .map(|(v, e)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            let mono = mono.join("*");
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else if a.is_integer() {
                write!(f, "{a}*{mono}")?;
            } else if a.numer().is_one() {
                write!(f, "{mono}/{}", a.denom())?;
            } else {
                write!(f, "{}*{mono}/{}", a.numer(), a.denom())?;
            }
        }
        Ok(())
    }
}

impl FromStr for Poly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s)?;
        let p = parse_poly(&mut cur)?;
        if !cur.at_eof() {
            return Err(cur.err("unexpected trailing input"));
        }
        Ok(p)
    }
}

pub(crate) fn parse_poly(cur: &mut Cursor) -> Result<Poly> {
    let mut acc = if cur.eat_sym("-") { parse_term(cur)?.neg() } else { parse_term(cur)? };
    loop {
        if cur.eat_sym("+") {
            acc = acc.add(&parse_term(cur)?);
        } else if cur.eat_sym("-") {
            acc = acc.sub(&parse_term(cur)?);
        } else {
            return Ok(acc);
        }
    }
}

fn parse_term(cur: &mut Cursor) -> Result<Poly> {
    let mut acc = parse_factor(cur)?;
    loop {
        if cur.eat_sym("*") {
            acc = acc.mul(&parse_factor(cur)?);
        } else if cur.eat_sym("/") {
            let d = cur.int()?;
            if d.is_zero() {
                return Err(cur.err("division by zero"));
            }
            acc = acc.scale(&BigRational::new(BigInt::one(), d));
        } else {
            return Ok(acc);
        }
    }
}

fn parse_factor(cur: &mut Cursor) -> Result<Poly> {
    let base = match cur.peek().clone() {
        Tok::Int(n) => {
            cur.bump();
            Poly::from_int(n)
        }
        Tok::Ident(_) => Poly::var(&cur.ident()?),
        Tok::Sym("(") => {
            cur.bump();
            let p = parse_poly(cur)?;
            cur.expect_sym(")")?;
            p
        }
        Tok::Sym("-") => {
            cur.bump();
            return Ok(parse_factor(cur)?.neg());
        }
        _ => return Err(cur.err("expected polynomial")),
    };
    if cur.eat_sym("^") {
        let e = cur.int()?;
        let e = e.to_u32().ok_or_else(|| cur.err("bad exponent"))?;
        return Ok(base.pow(e));
    }
    Ok(base)
}
