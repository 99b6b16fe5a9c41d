//! Elements of `A = Z[L, L^-1, 1/(1 - L^-i)]`.
//!
//! An element is stored as `num / (L^shift * prod Phi_d(L)^m_d)` with `Phi_d`
//! the cyclotomic polynomials. Every `L^i - 1` splits into distinct `Phi_d`,
//! so once no `Phi_d` of the denominator divides the numerator and the
//! numerator has a nonzero constant term, the fraction is in lowest terms and
//! equality of elements is structural equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::upoly::{cyclotomic, factor_l_cyclotomic, UPoly};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::syntax::{Cursor, Tok};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AElement {
    num: UPoly,
    shift: i64,
    den: BTreeMap<usize, u32>,
}

/// A fixed base `q > 1`, restricted to rationals so zero tests stay exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixedQ(BigRational);

impl FixedQ {
    pub fn new(q: BigRational) -> Result<Self> {
        if q <= BigRational::one() {
            return Err(Error::InvalidArgument(format!("q must exceed 1, got {q}")));
        }
        Ok(FixedQ(q))
    }

    pub fn from_int(q: i64) -> Result<Self> {
        Self::new(BigRational::from_integer(q.into()))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }
}

impl FromStr for FixedQ {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let q = if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| Error::InvalidArgument(s.into()))?;
            let d: BigInt = d.trim().parse().map_err(|_| Error::InvalidArgument(s.into()))?;
            if d.is_zero() {
                return Err(Error::InvalidArgument(s.into()));
            }
            BigRational::new(n, d)
        } else {
            BigRational::from_integer(s.parse().map_err(|_| Error::InvalidArgument(s.into()))?)
        };
        FixedQ::new(q)
    }
}

impl fmt::Display for FixedQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl AElement {
    fn canonical(num: UPoly, shift: i64, den: BTreeMap<usize, u32>) -> Self {
        let Some(low) = num.low_degree() else {
            return AElement::zero();
        };
        let mut num = num.shift_down(low);
        let shift = shift - low as i64;
        let mut out = BTreeMap::new();
        for (d, mut m) in den {
            let phi = cyclotomic(d);
            while m > 0 {
                match num.div_exact_monic(&phi) {
                    Some(q) => {
                        num = q;
                        m -= 1;
                    }
                    None => break,
                }
            }
            if m > 0 {
                out.insert(d, m);
            }
        }
        AElement { num, shift, den: out }
    }

    pub fn zero() -> Self {
        AElement { num: UPoly::zero(), shift: 0, den: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::canonical(UPoly::constant(n.into()), 0, BTreeMap::new())
    }

    pub fn from_poly(p: UPoly) -> Self {
        Self::canonical(p, 0, BTreeMap::new())
    }

    /// `L^e` for any integer `e`.
    pub fn l_pow(e: i64) -> Self {
        AElement { num: UPoly::one(), shift: -e, den: BTreeMap::new() }
    }

    /// `1 / (1 - L^b)`, `b != 0`.
    pub fn geometric_inv(b: i64) -> Result<Self> {
        if b == 0 {
            return Err(Error::InvalidArgument("1/(1 - L^0) is undefined".into()));
        }
        let k = b.unsigned_abs() as usize;
        let den: BTreeMap<usize, u32> = (1..=k).filter(|d| k % d == 0).map(|d| (d, 1)).collect();
        Ok(if b < 0 {
            // L^k / (L^k - 1)
            Self::canonical(UPoly::monomial(k), 0, den)
        } else {
            Self::canonical(UPoly::constant(-BigInt::one()), 0, den)
        })
    }

    /// Builds `num / (L^shift * prod (L^i - 1)^m)`.
    pub fn from_parts(num: UPoly, shift: i64, pairs: &[(usize, u32)]) -> Result<Self> {
        let mut den = BTreeMap::new();
        for &(i, m) in pairs {
            if i == 0 {
                return Err(Error::InvalidArgument("denominator factor L^0 - 1 vanishes".into()));
            }
            for d in (1..=i).filter(|d| i % d == 0) {
                *den.entry(d).or_insert(0) += m;
            }
        }
        Ok(Self::canonical(num, shift, den))
    }

    /// Canonical presentation `(num, shift >= 0, [(i, m)])` with `(L^i - 1)` factors.
    pub fn to_parts(&self) -> (UPoly, i64, Vec<(usize, u32)>) {
        let mut num = self.num.clone();
        for (&d, &m) in &self.den {
            let cof = UPoly::l_pow_minus_one(d).div_exact_monic(&cyclotomic(d)).unwrap();
            num = num.mul(&cof.pow(m));
        }
        let mut shift = self.shift;
        if shift < 0 {
            num = num.shift_up((-shift) as usize);
            shift = 0;
        }
        (num, shift, self.den.iter().map(|(&d, &m)| (d, m)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one()
    }

    /// The integer value, if this element is a constant integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        (self.shift == 0 && self.den.is_empty() && self.num.degree() == Some(0))
            .then(|| self.num.coeffs()[0].clone())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplicative inverse, when it lies in `A`.
    pub fn try_inverse(&self) -> Option<Self> {
        let (neg, k, mult) = factor_l_cyclotomic(&self.num)?;
        // self = ±L^k prod Phi^mult / (L^shift prod Phi^den)
        let mut num = UPoly::one();
        for (&d, &m) in &self.den {
            num = num.mul(&cyclotomic(d).pow(m));
        }
        if neg {
            num = num.neg();
        }
        let shift = k as i64 - self.shift;
        Some(Self::canonical(num.shift_up(0), shift, mult))
    }

    /// Value at `L = q`. The denominators `q^i - 1` never vanish for `q > 1`.
    pub fn evaluate<T: Scalar>(&self, q: &T) -> T {
        let mut den = q.powi(self.shift);
        for (&d, &m) in &self.den {
            den = den * cyclotomic(d).eval(q).powi(m as i64);
        }
        self.num.eval(q) / den
    }

    pub fn evaluate_at(&self, q: &FixedQ) -> BigRational {
        self.evaluate(q.value())
    }

    pub fn to_json(&self) -> Value {
        let (num, shift, pairs) = self.to_parts();
        json!({
            "numerator": num.coeffs().iter().map(bigint_json).collect::<Vec<_>>(),
            "shift": shift,
            "denominator": pairs.iter().map(|&(i, m)| json!([i, m])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidArgument(format!("AElement JSON: {m}"));
        let num = v
            .get("numerator")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("numerator"))?
            .iter()
            .map(|c| bigint_from_json(c).ok_or_else(|| bad("coefficient")))
            .collect::<Result<Vec<_>>>()?;
        let shift = v.get("shift").and_then(Value::as_i64).unwrap_or(0);
        let mut pairs = Vec::new();
        if let Some(arr) = v.get("denominator").and_then(Value::as_array) {
            for p in arr {
                let i = p.get(0).and_then(Value::as_u64).ok_or_else(|| bad("pair"))?;
                let m = p.get(1).and_then(Value::as_u64).ok_or_else(|| bad("pair"))?;
                pairs.push((i as usize, m as u32));
            }
        }
        Self::from_parts(UPoly::new(num), shift, &pairs)
    }
}

pub(crate) fn bigint_json(c: &BigInt) -> Value {
    match c.to_i64() {
        Some(x) => json!(x),
        None => json!(c.to_string()),
    }
}

pub(crate) fn bigint_from_json(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

impl Add for &AElement {
    type Output = AElement;
    fn add(self, o: &AElement) -> AElement {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let shift = self.shift.max(o.shift);
        let mut den = self.den.clone();
        for (&d, &m) in &o.den {
            let e = den.entry(d).or_insert(0);
            *e = (*e).max(m);
        }
        let lift = |x: &AElement| {
            let mut n = x.num.shift_up((shift - x.shift) as usize);
            for (&d, &m) in &den {
                let have = x.den.get(&d).copied().unwrap_or(0);
                n = n.mul(&cyclotomic(d).pow(m - have));
            }
            n
        };
        let num = lift(self).add(&lift(o));
        AElement::canonical(num, shift, den)
    }
}

impl Neg for &AElement {
    type Output = AElement;
    fn neg(self) -> AElement {
        AElement { num: self.num.neg(), shift: self.shift, den: self.den.clone() }
    }
}

impl Sub for &AElement {
    type Output = AElement;
    fn sub(self, o: &AElement) -> AElement {
        self + &(-o)
    }
}

impl Mul for &AElement {
    type Output = AElement;
    fn mul(self, o: &AElement) -> AElement {
        if self.is_zero() || o.is_zero() {
            return AElement::zero();
        }
        let mut den = self.den.clone();
        for (&d, &m) in &o.den {
            *den.entry(d).or_insert(0) += m;
        }
        AElement::canonical(self.num.mul(&o.num), self.shift + o.shift, den)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for AElement {
            type Output = AElement;
            fn $m(self, o: AElement) -> AElement {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for AElement {
    type Output = AElement;
    fn neg(self) -> AElement {
        -&self
    }
}

impl From<i64> for AElement {
    fn from(n: i64) -> Self {
        AElement::from_int(n)
    }
}

impl fmt::Display for AElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (num, shift, pairs) = self.to_parts();
        if shift == 0 && pairs.is_empty() {
            return write!(f, "{num}");
        }
        let mut factors = Vec::new();
        if shift != 0 {
            factors.push(format!("L^{shift}"));
        }
        for (i, m) in pairs {
            let base = if i == 1 { "(L - 1)".to_string() } else { format!("(L^{i} - 1)") };
            factors.push(if m == 1 { base } else { format!("{base}^{m}") });
        }
        let terms = num.coeffs().iter().filter(|c| !c.is_zero()).count();
        let n = if terms > 1 { format!("({num})") } else { num.to_string() };
        if factors.len() == 1 {
            write!(f, "{n}/{}", factors[0])
        } else {
            write!(f, "{n}/({})", factors.join(" * "))
        }
    }
}

impl FromStr for AElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s)?;
        let v = parse_aelement(&mut cur)?;
        if !cur.at_eof() {
            return Err(cur.err("trailing input"));
        }
        Ok(v)
    }
}

/// Parses an element written with `L`, integers, `+ - * /`, `^` and parentheses.
pub(crate) fn parse_aelement(cur: &mut Cursor) -> Result<AElement> {
    let mut acc = a_term(cur)?;
    loop {
        if cur.eat_sym("+") {
            acc = &acc + &a_term(cur)?;
        } else if cur.eat_sym("-") {
            acc = &acc - &a_term(cur)?;
        } else {
            return Ok(acc);
        }
    }
}

fn a_term(cur: &mut Cursor) -> Result<AElement> {
    let mut acc = a_unary(cur)?;
    loop {
        if cur.eat_sym("*") {
            acc = &acc * &a_unary(cur)?;
        } else if cur.eat_sym("/") {
            let t = a_unary(cur)?;
            let inv = t
                .try_inverse()
                .ok_or_else(|| cur.err("denominator is not of the form L^e * prod (L^i - 1)^m"))?;
            acc = &acc * &inv;
        } else {
            return Ok(acc);
        }
    }
}

fn a_unary(cur: &mut Cursor) -> Result<AElement> {
    if cur.eat_sym("-") {
        return Ok(-a_unary(cur)?);
    }
    let base = a_atom(cur)?;
    if cur.eat_sym("^") {
        let neg = cur.eat_sym("-");
        let e = cur.int()?.to_u32().ok_or_else(|| cur.err("exponent too large"))?;
        let p = base.pow(e);
        return if neg {
            p.try_inverse().ok_or_else(|| cur.err("negative power of a non-invertible element"))
        } else {
            Ok(p)
        };
    }
    Ok(base)
}

fn a_atom(cur: &mut Cursor) -> Result<AElement> {
    match cur.peek().clone() {
        Tok::Ident(name) if name == "L" => {
            cur.bump();
            Ok(AElement::l_pow(1))
        }
        Tok::Int(n) => {
            cur.bump();
            Ok(AElement::from_int(n))
        }
        Tok::Sym("(") => {
            cur.bump();
            let v = parse_aelement(cur)?;
            cur.expect_sym(")")?;
            Ok(v)
        }
        _ => Err(cur.err("expected `L`, integer or `(`")),
    }
}
