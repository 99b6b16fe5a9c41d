//! Presburger constructible functions: finite sums of guarded terms
//! `a * 1_guard * L^beta * prod alpha_j * prod 1/(1 - L^gamma_k)`.
//!
//! `beta`, `alpha_j` and `gamma_k` are polynomials in the variables; on the
//! guard they are integer-valued. Input functions use affine `beta` and
//! `alpha_j`; sums over parameter-dependent exponents produce quadratic
//! exponents and the `gamma_k` factors.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::poly::{parse_poly, Poly};
use crate::presburger::{
    check_declared, eval_qf, parse_formula_at, simplify, Env, Formula,
};
use crate::ring::{parse_aelement, AElement, FixedQ};
use crate::scalar::Scalar;
use crate::syntax::Cursor;

/// Whether `L` stays formal or is specialized to a rational `q > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Formal,
    Fixed(FixedQ),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Formal => write!(f, "formal"),
            Mode::Fixed(q) => write!(f, "q={q}"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "formal" => Ok(Mode::Formal),
            t => match t.strip_prefix("q=") {
                Some(q) => Ok(Mode::Fixed(q.parse()?)),
                None => Err(Error::InvalidArgument(format!("unknown mode `{s}`"))),
            },
        }
    }
}

/// A value of a constructible function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Formal(AElement),
    Fixed(BigRational),
}

impl Value {
    pub fn is_zero(&self) -> bool {
        match self {
            Value::Formal(a) => a.is_zero(),
            Value::Fixed(r) => r.is_zero(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Formal(a) => write!(f, "{a}"),
            Value::Fixed(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: AElement,
    pub guard: Formula,
    pub exponent: Poly,
    pub factors: Vec<Poly>,
    pub geometric: Vec<Poly>,
}

fn int_value(p: &Poly, env: &Env, what: &str) -> Result<BigInt> {
    let r = p.eval_int(env)?;
    if !r.is_integer() {
        return Err(Error::Numeric(format!("{what} `{p}` takes the non-integer value {r}")));
    }
    Ok(r.to_integer())
}

fn small(n: &BigInt, what: &str) -> Result<i64> {
    n.to_i64().ok_or_else(|| Error::Numeric(format!("{what} {n} out of range")))
}

impl Term {
    pub fn new(coeff: AElement) -> Self {
        Term {
            coeff,
            guard: Formula::True,
            exponent: Poly::zero(),
            factors: vec![],
            geometric: vec![],
        }
    }

    pub fn with_exponent(mut self, e: Poly) -> Self {
        self.exponent = e;
        self
    }

    pub fn with_factors(mut self, f: Vec<Poly>) -> Self {
        self.factors = f;
        self
    }

    pub fn with_guard(mut self, g: Formula) -> Self {
        self.guard = g;
        self
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = self.guard.free_vars();
        for p in std::iter::once(&self.exponent).chain(&self.factors).chain(&self.geometric) {
            out.extend(p.vars());
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.guard.mentions(v)
            || self.exponent.mentions(v)
            || self.factors.iter().chain(&self.geometric).any(|p| p.mentions(v))
    }

    /// Value in `A`, ignoring the guard.
    pub fn eval_formal(&self, env: &Env) -> Result<AElement> {
        let e = small(&int_value(&self.exponent, env, "exponent")?, "exponent")?;
        let mut v = &self.coeff * &AElement::l_pow(e);
        for f in &self.factors {
            v = &v * &AElement::from_int(int_value(f, env, "factor")?);
        }
        for g in &self.geometric {
            let b = small(&int_value(g, env, "geometric exponent")?, "geometric exponent")?;
            v = &v * &AElement::geometric_inv(b)?;
        }
        Ok(v)
    }

    /// Value with `L` replaced by `q`, ignoring the guard.
    pub fn eval_scalar<T: Scalar>(&self, env: &Env, q: &T) -> Result<T> {
        let e = small(&int_value(&self.exponent, env, "exponent")?, "exponent")?;
        let mut v = self.coeff.evaluate(q) * q.powi(e);
        for f in &self.factors {
            v = v * T::from_bigint(&int_value(f, env, "factor")?);
        }
        for g in &self.geometric {
            let b = small(&int_value(g, env, "geometric exponent")?, "geometric exponent")?;
            if b == 0 {
                return Err(Error::Numeric("geometric factor 1/(1 - L^0)".into()));
            }
            v = v / (T::one() - q.powi(b));
        }
        Ok(v)
    }

    pub fn mul(&self, o: &Term) -> Term {
        let mut factors = self.factors.clone();
        factors.extend(o.factors.iter().cloned());
        let mut geometric = self.geometric.clone();
        geometric.extend(o.geometric.iter().cloned());
        Term {
            coeff: &self.coeff * &o.coeff,
            guard: Formula::and(vec![self.guard.clone(), o.guard.clone()]),
            exponent: self.exponent.add(&o.exponent),
            factors,
            geometric,
        }
    }

    /// Substitutes `v := by`, where `by` is affine and integral wherever it is used.
    pub fn substitute(&self, v: &str, by: &Poly) -> Result<Term> {
        let guard = if self.guard.mentions(v) {
            let (num, den) = by.to_linear_scaled()?;
            self.guard.substitute_scaled(v, &num, &den)
        } else {
            self.guard.clone()
        };
        Ok(Term {
            coeff: self.coeff.clone(),
            guard,
            exponent: self.exponent.substitute(v, by),
            factors: self.factors.iter().map(|f| f.substitute(v, by)).collect(),
            geometric: self.geometric.iter().map(|f| f.substitute(v, by)).collect(),
        })
    }

    /// Folds constant parts into the coefficient and sorts factors.
    /// Returns `None` for a term that is identically zero.
    pub fn normalize(&self) -> Option<Term> {
        let guard = simplify(&self.guard);
        if guard == Formula::False || self.coeff.is_zero() {
            return None;
        }
        let mut coeff = self.coeff.clone();
        let mut factors = Vec::new();
        for f in &self.factors {
            if f.is_zero() {
                return None;
            }
            let c = f.constant_term();
            if f.is_constant() && c.is_integer() {
                coeff = &coeff * &AElement::from_int(c.to_integer());
                continue;
            }
            let lead_neg = f
                .terms()
                .iter()
                .find(|(m, _)| !m.is_empty())
                .is_some_and(|(_, c)| c.is_negative());
            if lead_neg {
                coeff = -coeff;
                factors.push(f.neg());
            } else {
                factors.push(f.clone());
            }
        }
        let mut geometric = Vec::new();
        for g in &self.geometric {
            let c = g.constant_term();
            if g.is_constant() && c.is_integer() && !c.is_zero() {
                if let Some(b) = c.to_integer().to_i64() {
                    coeff = &coeff * &AElement::geometric_inv(b).ok()?;
                    continue;
                }
            }
            geometric.push(g.clone());
        }
        let mut exponent = self.exponent.clone();
        let e0 = exponent.constant_term();
        if e0.is_integer() {
            if let Some(e) = e0.to_integer().to_i64() {
                coeff = &coeff * &AElement::l_pow(e);
                exponent = exponent.sub(&Poly::constant(e0));
            }
        }
        factors.sort();
        geometric.sort();
        Some(Term { coeff, guard, exponent, factors, geometric })
    }

    fn key(&self) -> (Formula, Poly, Vec<Poly>, Vec<Poly>) {
        (self.guard.clone(), self.exponent.clone(), self.factors.clone(), self.geometric.clone())
    }

    pub(crate) fn to_text(&self) -> String {
        let list = |v: &[Poly]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ");
        let mut s = format!("term coeff = {}, exp = {}, factors = [{}]", self.coeff, self.exponent, list(&self.factors));
        if !self.geometric.is_empty() {
            s.push_str(&format!(", geometric = [{}]", list(&self.geometric)));
        }
        if self.guard != Formula::True {
            s.push_str(&format!(", guard = {}", self.guard));
        }
        s
    }

    pub fn to_json(&self) -> Json {
        json!({
            "coeff": self.coeff.to_json(),
            "coeff_text": self.coeff.to_string(),
            "guard": self.guard.to_string(),
            "exponent": self.exponent.to_string(),
            "factors": self.factors.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "geometric": self.geometric.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// A constructible function on the set `domain` of `params x Z^vars`.
/// Outside its domain the function is taken to be zero by the summation and
/// locus operations; direct evaluation there is an error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructibleFunction {
    pub params: Vec<String>,
    pub vars: Vec<String>,
    pub domain: Formula,
    pub terms: Vec<Term>,
}

impl ConstructibleFunction {
    pub fn new(params: Vec<String>, vars: Vec<String>, domain: Formula, terms: Vec<Term>) -> Result<Self> {
        let f = ConstructibleFunction { params, vars, domain, terms };
        let all = f.all_vars();
        check_declared(&f.domain, &all)?;
        for t in &f.terms {
            if let Some(v) = t.vars().into_iter().find(|v| !all.contains(v)) {
                return Err(Error::UnboundVariable(v));
            }
        }
        Ok(f)
    }

    pub fn zero(params: Vec<String>, vars: Vec<String>, domain: Formula) -> Self {
        ConstructibleFunction { params, vars, domain, terms: vec![] }
    }

    pub fn constant(params: Vec<String>, vars: Vec<String>, domain: Formula, c: AElement) -> Self {
        ConstructibleFunction { params, vars, domain, terms: vec![Term::new(c)] }
    }

    pub fn all_vars(&self) -> Vec<String> {
        let mut v = self.params.clone();
        v.extend(self.vars.iter().cloned());
        v
    }

    pub fn is_syntactically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn env(&self, point: &[BigInt]) -> Result<Env> {
        let all = self.all_vars();
        if point.len() != all.len() {
            return Err(Error::ArityMismatch { expected: all.len(), got: point.len() });
        }
        Ok(all.into_iter().zip(point.iter().cloned()).collect())
    }

    pub fn in_domain(&self, point: &[BigInt]) -> Result<bool> {
        let env = self.env(point)?;
        crate::presburger::evaluate(&self.domain, &env)
    }

    /// Value at `point` (parameters first, then lattice variables).
    pub fn evaluate(&self, point: &[BigInt], mode: &Mode) -> Result<Value> {
        let env = self.env(point)?;
        if !crate::presburger::evaluate(&self.domain, &env)? {
            return Err(Error::OutsideDomain);
        }
        self.evaluate_unchecked(&env, mode)
    }

    /// Value at `point`, zero outside the domain.
    pub fn evaluate_or_zero(&self, point: &[BigInt], mode: &Mode) -> Result<Value> {
        let env = self.env(point)?;
        if !crate::presburger::evaluate(&self.domain, &env)? {
            return Ok(match mode {
                Mode::Formal => Value::Formal(AElement::zero()),
                Mode::Fixed(_) => Value::Fixed(BigRational::zero()),
            });
        }
        self.evaluate_unchecked(&env, mode)
    }

    fn evaluate_unchecked(&self, env: &Env, mode: &Mode) -> Result<Value> {
        match mode {
            Mode::Formal => {
                let mut acc = AElement::zero();
                for t in &self.terms {
                    if eval_guard(&t.guard, env)? {
                        acc = &acc + &t.eval_formal(env)?;
                    }
                }
                Ok(Value::Formal(acc))
            }
            Mode::Fixed(q) => {
                let mut acc = BigRational::zero();
                for t in &self.terms {
                    if eval_guard(&t.guard, env)? {
                        acc += t.eval_scalar(env, q.value())?;
                    }
                }
                Ok(Value::Fixed(acc))
            }
        }
    }

    /// Value with `L = q` in any scalar type; zero outside the domain.
    pub fn evaluate_scalar<T: Scalar>(&self, point: &[BigInt], q: &T) -> Result<T> {
        let env = self.env(point)?;
        if !crate::presburger::evaluate(&self.domain, &env)? {
            return Ok(T::zero());
        }
        let mut acc = T::zero();
        for t in &self.terms {
            if eval_guard(&t.guard, &env)? {
                acc = acc + t.eval_scalar(&env, q)?;
            }
        }
        Ok(acc)
    }

    fn same_space(&self, o: &Self) -> Result<()> {
        if self.params != o.params || self.vars != o.vars || self.domain != o.domain {
            return Err(Error::DomainMismatch(format!(
                "({}; {}) on {} vs ({}; {}) on {}",
                self.params.join(", "),
                self.vars.join(", "),
                self.domain,
                o.params.join(", "),
                o.vars.join(", "),
                o.domain
            )));
        }
        Ok(())
    }

    fn with_terms(&self, terms: Vec<Term>) -> Self {
        ConstructibleFunction {
            params: self.params.clone(),
            vars: self.vars.clone(),
            domain: self.domain.clone(),
            terms,
        }
        .normalized()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_space(o)?;
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Ok(self.with_terms(terms))
    }

    pub fn neg(&self) -> Self {
        self.scale(&AElement::from_int(-1))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn scale(&self, a: &AElement) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coeff: &t.coeff * a, ..t.clone() })
            .collect();
        self.with_terms(terms)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_space(o)?;
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                terms.push(a.mul(b));
            }
        }
        Ok(self.with_terms(terms))
    }

    pub fn square(&self) -> Self {
        self.mul(self).expect("same space")
    }

    /// Multiplies every term by the indicator of `guard`.
    pub fn restrict(&self, guard: &Formula) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { guard: Formula::and(vec![t.guard.clone(), guard.clone()]), ..t.clone() })
            .collect();
        self.with_terms(terms)
    }

    /// Merges terms that differ only in their coefficient and drops zero terms.
    pub fn normalized(&self) -> Self {
        let mut acc: BTreeMap<(Formula, Poly, Vec<Poly>, Vec<Poly>), AElement> = BTreeMap::new();
        let mut order = Vec::new();
        for t in &self.terms {
            let Some(t) = t.normalize() else { continue };
            let k = t.key();
            match acc.get_mut(&k) {
                Some(c) => *c = &*c + &t.coeff,
                None => {
                    order.push(k.clone());
                    acc.insert(k, t.coeff);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|k| {
                let c = acc.remove(&k)?;
                if c.is_zero() {
                    return None;
                }
                let (guard, exponent, factors, geometric) = k;
                Some(Term { coeff: c, guard, exponent, factors, geometric })
            })
            .collect();
        ConstructibleFunction {
            params: self.params.clone(),
            vars: self.vars.clone(),
            domain: self.domain.clone(),
            terms,
        }
    }

    /// In fixed mode, drops terms whose coefficient vanishes at `q`.
    pub fn pruned(&self, mode: &Mode) -> Self {
        match mode {
            Mode::Formal => self.clone(),
            Mode::Fixed(q) => {
                let mut f = self.clone();
                f.terms.retain(|t| !t.coeff.evaluate_at(q).is_zero());
                f
            }
        }
    }

    /// Substitutes `v := by` in the terms and the domain.
    pub fn substitute(&self, v: &str, by: &Poly) -> Result<Self> {
        let terms = self.terms.iter().map(|t| t.substitute(v, by)).collect::<Result<Vec<_>>>()?;
        let domain = if self.domain.mentions(v) {
            let (num, den) = by.to_linear_scaled()?;
            self.domain.substitute_scaled(v, &num, &den)
        } else {
            self.domain.clone()
        };
        Ok(ConstructibleFunction { domain, terms, ..self.clone() }.normalized())
    }

    pub fn to_pcf(&self, name: &str) -> String {
        let mut s = format!("func {name}({} ; {}) {{\n", self.params.join(", "), self.vars.join(", "));
        for t in &self.terms {
            s.push_str(&format!("  {};\n", t.to_text()));
        }
        s.push_str(&format!("  domain {};\n}}\n", self.domain));
        s
    }

    pub fn to_json(&self) -> Json {
        json!({
            "params": self.params,
            "vars": self.vars,
            "domain": self.domain.to_string(),
            "terms": self.terms.iter().map(Term::to_json).collect::<Vec<_>>(),
        })
    }
}

fn eval_guard(g: &Formula, env: &Env) -> Result<bool> {
    if g.is_quantifier_free() {
        eval_qf(g, env)
    } else {
        crate::presburger::evaluate(g, env)
    }
}

impl fmt::Display for ConstructibleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{}]", t.to_text().trim_start_matches("term "))?;
        }
        Ok(())
    }
}

/// Set operation realized on zero loci.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroOp {
    Intersection,
    Union,
}

/// `Z(result)` is the intersection (sum of squares) or union (product) of the `Z(h_i)`.
///
/// The sum-of-squares form is exact both at real `q > 1` and formally, since
/// `Q(L)` admits an ordering.
pub fn combine_zero_loci(op: ZeroOp, hs: &[ConstructibleFunction]) -> Result<ConstructibleFunction> {
    let Some(first) = hs.first() else {
        let empty = ConstructibleFunction::zero(vec![], vec![], Formula::True);
        return Ok(match op {
            ZeroOp::Intersection => empty,
            ZeroOp::Union => ConstructibleFunction { terms: vec![Term::new(AElement::one())], ..empty },
        });
    };
    for h in &hs[1..] {
        first.same_space(h)?;
    }
    Ok(match op {
        ZeroOp::Intersection => {
            let mut terms = Vec::new();
            for h in hs {
                terms.extend(h.square().terms);
            }
            first.with_terms(terms)
        }
        ZeroOp::Union => {
            let mut acc = first.clone();
            for h in &hs[1..] {
                acc = acc.mul(h)?;
            }
            acc
        }
    })
}

/// Parses a `.pcf` file: a sequence of
/// `func NAME(params ; vars) { term ...; domain FORMULA; }` blocks.
pub fn parse_pcf(text: &str) -> Result<Vec<(String, ConstructibleFunction)>> {
    let mut cur = Cursor::new(text)?;
    let mut out = Vec::new();
    while !cur.at_eof() {
        out.push(parse_func(&mut cur)?);
    }
    Ok(out)
}

pub(crate) fn ident_list(cur: &mut Cursor, stop: &[&str]) -> Result<Vec<String>> {
    let mut v = Vec::new();
    if stop.iter().any(|s| cur.is_sym(s)) {
        return Ok(v);
    }
    v.push(cur.ident()?);
    while cur.eat_sym(",") {
        v.push(cur.ident()?);
    }
    Ok(v)
}

fn poly_list(cur: &mut Cursor) -> Result<Vec<Poly>> {
    cur.expect_sym("[")?;
    let mut v = Vec::new();
    if cur.eat_sym("]") {
        return Ok(v);
    }
    v.push(parse_poly(cur)?);
    while cur.eat_sym(",") {
        v.push(parse_poly(cur)?);
    }
    cur.expect_sym("]")?;
    Ok(v)
}

fn parse_func(cur: &mut Cursor) -> Result<(String, ConstructibleFunction)> {
    cur.expect_kw("func")?;
    let name = cur.ident()?;
    cur.expect_sym("(")?;
    let params = ident_list(cur, &[";", ")"])?;
    let vars = if cur.eat_sym(";") { ident_list(cur, &[")"])? } else { vec![] };
    cur.expect_sym(")")?;
    cur.expect_sym("{")?;
    let mut all = params.clone();
    all.extend(vars.iter().cloned());
    let mut terms = Vec::new();
    let mut domain = Formula::True;
    loop {
        if cur.eat_sym("}") {
            break;
        }
        if cur.eat_kw("domain") {
            domain = parse_formula_at(cur)?;
            check_declared(&domain, &all)?;
            cur.expect_sym(";")?;
            continue;
        }
        cur.expect_kw("term")?;
        terms.push(parse_term_fields(cur, &all)?);
        cur.expect_sym(";")?;
    }
    Ok((name, ConstructibleFunction { params, vars, domain, terms }))
}

/// Parses `coeff = A, exp = P, factors = [..], geometric = [..], guard = F`
/// (any subset, any order) over the declared variables.
pub(crate) fn parse_term_fields(cur: &mut Cursor, all: &[String]) -> Result<Term> {
    let mut t = Term::new(AElement::one());
    loop {
        let key = cur.ident()?;
        cur.expect_sym("=")?;
        match key.as_str() {
            "coeff" => t.coeff = parse_aelement(cur)?,
            "exp" => t.exponent = parse_poly(cur)?,
            "factors" => t.factors = poly_list(cur)?,
            "geometric" => t.geometric = poly_list(cur)?,
            "guard" => t.guard = parse_formula_at(cur)?,
            _ => return Err(cur.err(format!("unknown term field `{key}`"))),
        }
        if !cur.eat_sym(",") {
            break;
        }
    }
    if let Some(v) = t.vars().into_iter().find(|v| !all.contains(v)) {
        return Err(Error::UnboundVariable(v));
    }
    Ok(t)
}

/// `t >= 0` for a rational affine `t`.
pub(crate) fn poly_ge0(p: &Poly) -> Result<Formula> {
    let (t, _) = p.to_linear_scaled()?;
    Ok(Formula::Ge(t))
}

/// `t = 0` for a rational affine `t`.
pub(crate) fn poly_eq0(p: &Poly) -> Result<Formula> {
    let (t, _) = p.to_linear_scaled()?;
    Ok(Formula::Eq(t))
}



#[cfg(test)]
mod tests {
    use super::*;
    use crate::presburger::parse_formula;
    use proptest::prelude::*;

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn q(n: i64) -> Mode {
        Mode::Fixed(FixedQ::from_int(n).unwrap())
    }

    fn one_fn(src: &str) -> ConstructibleFunction {
        parse_pcf(src).unwrap().remove(0).1
    }

    #[test]
    fn evaluate_examples() {
        let f = one_fn("func f(s) { term exp = s; }");
        assert_eq!(f.evaluate(&bi(&[3]), &q(2)).unwrap(), Value::Fixed(BigRational::from_integer(8.into())));
        let f = one_fn("func f(s) { term exp = -s, factors = [s]; }");
        assert_eq!(
            f.evaluate(&bi(&[2]), &Mode::Formal).unwrap(),
            Value::Formal("2*L^-2".parse().unwrap())
        );
        let f = one_fn("func f(s) { term factors = [s, s - 1]; }");
        assert!(f.evaluate(&bi(&[1]), &Mode::Formal).unwrap().is_zero());
        let f = one_fn("func f(s; y) { term exp = -y; domain y >= 0; }");
        assert_eq!(f.evaluate(&bi(&[0, -1]), &Mode::Formal), Err(Error::OutsideDomain));
    }

    #[test]
    fn pcf_round_trip() {
        let src = "func g(s ; y) {\n  term coeff = 2/(L - 1), exp = s*y - y, factors = [y, s + 1], guard = y mod 2 = 1;\n  term coeff = -1, exp = 0, factors = [], geometric = [s];\n  domain (y >= 0 and s <= -1);\n}\n";
        let (name, f) = parse_pcf(src).unwrap().remove(0);
        assert_eq!(f.to_pcf(&name), src);
        assert!(matches!(
            parse_pcf("func f(s) { term exp = t; }"),
            Err(Error::UnboundVariable(v)) if v == "t"
        ));
    }

    #[test]
    fn zero_loci_combinators() {
        let s = vec!["s".to_string()];
        let h1 = one_fn("func h(s) { term factors = [s]; }");
        let h2 = one_fn("func h(s) { term factors = [s - 1]; }");
        let inter = combine_zero_loci(ZeroOp::Intersection, &[h1.clone(), h2.clone()]).unwrap();
        let uni = combine_zero_loci(ZeroOp::Union, &[h1.clone(), h2.clone()]).unwrap();
        for v in -5..=5 {
            let p = bi(&[v]);
            for m in [q(2), q(3), Mode::Formal] {
                assert!(!inter.evaluate(&p, &m).unwrap().is_zero());
                assert_eq!(uni.evaluate(&p, &m).unwrap().is_zero(), v == 0 || v == 1);
            }
        }
        // s^2 + (s-1)^2 at s = 2 is 5
        assert_eq!(inter.evaluate(&bi(&[2]), &q(2)).unwrap(), Value::Fixed(BigRational::from_integer(5.into())));
        let empty = combine_zero_loci(ZeroOp::Intersection, &[]).unwrap();
        assert!(empty.is_syntactically_zero());
        let other = ConstructibleFunction::zero(s, vec![], parse_formula("s >= 0").unwrap());
        assert!(matches!(combine_zero_loci(ZeroOp::Union, &[h1, other]), Err(Error::DomainMismatch(_))));
    }

    fn term_strategy() -> impl Strategy<Value = Term> {
        (-3i64..=3, -2i64..=2, -2i64..=2, proptest::option::of(-2i64..=2), 0u8..3).prop_map(
            |(c, es, ey, fac, g)| {
                let mut t = Term::new(AElement::from_int(c))
                    .with_exponent(Poly::var("s").scale(&BigRational::from_integer(es.into())).add(&Poly::var("y").scale(&BigRational::from_integer(ey.into()))));
                if let Some(k) = fac {
                    t.factors.push(Poly::var("y").add(&Poly::from_int(k)));
                }
                t.guard = match g {
                    0 => Formula::True,
                    1 => parse_formula("y >= s").unwrap(),
                    _ => parse_formula("s + y mod 2 = 0").unwrap(),
                };
                t
            },
        )
    }

    fn fn_strategy() -> impl Strategy<Value = ConstructibleFunction> {
        proptest::collection::vec(term_strategy(), 0..4).prop_map(|terms| ConstructibleFunction {
            params: vec!["s".into()],
            vars: vec!["y".into()],
            domain: Formula::True,
            terms,
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn evaluation_is_a_ring_homomorphism(f in fn_strategy(), g in fn_strategy(), s in -3i64..3, y in -3i64..3) {
            let p = bi(&[s, y]);
            let fv = |h: &ConstructibleFunction, m: &Mode| h.evaluate(&p, m).unwrap();
            for m in [Mode::Formal, q(2), Mode::Fixed("5/2".parse().unwrap())] {
                let (a, b) = (fv(&f, &m), fv(&g, &m));
                let sum = fv(&f.add(&g).unwrap(), &m);
                let prod = fv(&f.mul(&g).unwrap(), &m);
                match (a, b, sum, prod) {
                    (Value::Formal(a), Value::Formal(b), Value::Formal(s), Value::Formal(p)) => {
                        prop_assert_eq!(&a + &b, s);
                        prop_assert_eq!(&a * &b, p);
                    }
                    (Value::Fixed(a), Value::Fixed(b), Value::Fixed(s), Value::Fixed(p)) => {
                        prop_assert_eq!(&a + &b, s);
                        prop_assert_eq!(a * b, p);
                    }
                    _ => prop_assert!(false),
                }
            }
            // the generic path agrees with exact fixed evaluation
            let exact = f.evaluate_scalar(&p, &BigRational::from_integer(3.into())).unwrap();
            let float: f64 = f.evaluate_scalar(&p, &3.0f64).unwrap();
            prop_assert!((num_traits::ToPrimitive::to_f64(&exact).unwrap() - float).abs() < 1e-9 * (1.0 + float.abs()));
        }

        #[test]
        fn normalization_preserves_values(f in fn_strategy(), s in -3i64..3, y in -3i64..3) {
            let p = bi(&[s, y]);
            prop_assert_eq!(f.evaluate(&p, &Mode::Formal).unwrap(), f.normalized().evaluate(&p, &Mode::Formal).unwrap());
        }
    }
}
