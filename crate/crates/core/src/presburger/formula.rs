use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use super::linear::LinearTerm;
use crate::error::{Error, Result};
use crate::syntax::{Cursor, Tok};

/// First-order Presburger formulas.
///
/// Atoms are `t >= 0`, `t = 0` and `n | t` (printed `t' mod n = r`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Ge(LinearTerm),
    Eq(LinearTerm),
    Dvd(BigInt, LinearTerm),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    /// `a >= b`
    pub fn ge(a: LinearTerm, b: LinearTerm) -> Self {
        Formula::Ge(a.sub(&b))
    }

    /// `a <= b`
    pub fn le(a: LinearTerm, b: LinearTerm) -> Self {
        Formula::Ge(b.sub(&a))
    }

    /// `a < b`
    pub fn lt(a: LinearTerm, b: LinearTerm) -> Self {
        Formula::Ge(b.sub(&a).add_constant(-1))
    }

    pub fn eq(a: LinearTerm, b: LinearTerm) -> Self {
        Formula::Eq(a.sub(&b))
    }

    /// `n | t`, with the constant of `t` normalized into `(-n, 0]`.
    pub fn dvd(n: BigInt, t: LinearTerm) -> Self {
        let c = t.constant_part().clone();
        let r = (-&c).mod_floor(&n);
        let t = t.add_constant(-&r - c);
        Formula::Dvd(n, t)
    }

    pub fn not(f: Formula) -> Self {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            g => Formula::Not(Box::new(g)),
        }
    }

    pub fn and(parts: Vec<Formula>) -> Self {
        let mut v = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(xs) => v.extend(xs),
                p => v.push(p),
            }
        }
        match v.len() {
            0 => Formula::True,
            1 => v.pop().unwrap(),
            _ => Formula::And(v),
        }
    }

    pub fn or(parts: Vec<Formula>) -> Self {
        let mut v = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(xs) => v.extend(xs),
                p => v.push(p),
            }
        }
        match v.len() {
            0 => Formula::False,
            1 => v.pop().unwrap(),
            _ => Formula::Or(v),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(vec![Formula::not(a), b])
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(vec![
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        ])
    }

    pub fn exists(v: &str, body: Formula) -> Self {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Self {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    pub fn exists_all(vars: &[String], body: Formula) -> Self {
        vars.iter().rev().fold(body, |b, v| Formula::exists(v, b))
    }

    pub fn forall_all(vars: &[String], body: Formula) -> Self {
        vars.iter().rev().fold(body, |b, v| Formula::forall(v, b))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let mut push = |t: &LinearTerm, bound: &Vec<String>| {
            for v in t.vars() {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Ge(t) | Formula::Eq(t) | Formula::Dvd(_, t) => push(t, bound),
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.free_vars().iter().any(|x| x == v)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => false,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            _ => true,
        }
    }

    /// Number of nodes, used for resource limits.
    pub fn size(&self) -> usize {
        match self {
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Applies `g` to every atom, rebuilding the tree. Quantified variables are not special-cased.
    pub fn map_atoms(&self, g: &mut impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Ge(_) | Formula::Eq(_) | Formula::Dvd(..) => g(self),
            Formula::Not(f) => Formula::not(f.map_atoms(g)),
            Formula::And(fs) => Formula::and(fs.iter().map(|f| f.map_atoms(g)).collect()),
            Formula::Or(fs) => Formula::or(fs.iter().map(|f| f.map_atoms(g)).collect()),
            Formula::Exists(v, f) => Formula::exists(v, f.map_atoms(g)),
            Formula::Forall(v, f) => Formula::forall(v, f.map_atoms(g)),
        }
    }

    pub fn atoms(&self) -> Vec<Formula> {
        let mut out = BTreeSet::new();
        self.map_atoms(&mut |a| {
            out.insert(a.clone());
            a.clone()
        });
        out.into_iter().collect()
    }

    /// Replaces free occurrences of `v` by `by`. `by` must not mention bound variables of `self`.
    pub fn substitute(&self, v: &str, by: &LinearTerm) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Ge(t) => Formula::Ge(t.substitute(v, by)),
            Formula::Eq(t) => Formula::Eq(t.substitute(v, by)),
            Formula::Dvd(n, t) => Formula::dvd(n.clone(), t.substitute(v, by)),
            Formula::Not(f) => Formula::not(f.substitute(v, by)),
            Formula::And(fs) => Formula::and(fs.iter().map(|f| f.substitute(v, by)).collect()),
            Formula::Or(fs) => Formula::or(fs.iter().map(|f| f.substitute(v, by)).collect()),
            Formula::Exists(x, f) if x == v => self.clone(),
            Formula::Forall(x, f) if x == v => self.clone(),
            Formula::Exists(x, f) => Formula::exists(x, f.substitute(v, by)),
            Formula::Forall(x, f) => Formula::forall(x, f.substitute(v, by)),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> Formula {
        self.substitute(from, &LinearTerm::var(to))
    }

    /// Substitutes `v := (num) / den` for `den > 0`, scaling atoms to stay integral.
    /// Sound wherever the substituted value is an integer.
    pub fn substitute_scaled(&self, v: &str, num: &LinearTerm, den: &BigInt) -> Formula {
        if den.is_one() {
            return self.substitute(v, num);
        }
        self.map_atoms(&mut |a| match a {
            Formula::Ge(t) if t.has_var(v) => {
                Formula::Ge(t.without(v).scale(den).add(&num.scale(&t.coeff(v))))
            }
            Formula::Eq(t) if t.has_var(v) => {
                Formula::Eq(t.without(v).scale(den).add(&num.scale(&t.coeff(v))))
            }
            Formula::Dvd(n, t) if t.has_var(v) => Formula::dvd(
                n * den,
                t.without(v).scale(den).add(&num.scale(&t.coeff(v))),
            ),
            a => a.clone(),
        })
    }

    /// Checks that no quantifier rebinds a variable already in scope and no bound variable also occurs free.
    pub fn check_scoping(&self) -> Result<()> {
        let free: BTreeSet<String> = self.free_vars().into_iter().collect();
        let mut seen = BTreeSet::new();
        self.check_scoping_rec(&free, &mut seen)
    }

    fn check_scoping_rec(&self, free: &BTreeSet<String>, seen: &mut BTreeSet<String>) -> Result<()> {
        match self {
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                if free.contains(v) || !seen.insert(v.clone()) {
                    return Err(Error::InvalidArgument(format!(
                        "variable `{v}` is rebound in its own scope or also occurs free"
                    )));
                }
                let r = f.check_scoping_rec(free, seen);
                seen.remove(v);
                r
            }
            Formula::Not(f) => f.check_scoping_rec(free, seen),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().try_for_each(|f| f.check_scoping_rec(free, seen))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Ge(t) if t.coeffs().values().next().is_some_and(|c| c.is_negative()) => {
                t.neg().fmt_linear(f)?;
                write!(f, " <= {}", t.constant_part())
            }
            Formula::Ge(t) | Formula::Eq(t) => {
                let op = if matches!(self, Formula::Ge(_)) { ">=" } else { "=" };
                if t.is_constant() {
                    write!(f, "{} {op} 0", t.constant_part())
                } else {
                    t.fmt_linear(f)?;
                    write!(f, " {op} {}", -t.constant_part())
                }
            }
            Formula::Dvd(n, t) => {
                t.fmt_linear(f)?;
                write!(f, " mod {n} = {}", (-t.constant_part()).mod_floor(n))
            }
            Formula::Not(g) => write!(f, "not ({g})"),
            Formula::And(fs) | Formula::Or(fs) => {
                let sep = if matches!(self, Formula::And(_)) { " and " } else { " or " };
                write!(f, "(")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ")")
            }
            Formula::Exists(v, g) => write!(f, "(exists {v}. {g})"),
            Formula::Forall(v, g) => write!(f, "(forall {v}. {g})"),
        }
    }
}

impl FromStr for Formula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_formula(s)
    }
}

/// Parses a formula; free variables are whatever occurs free.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut cur = Cursor::new(text)?;
    let f = parse_formula_at(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.err("unexpected trailing input"));
    }
    f.check_scoping()?;
    Ok(f)
}

/// Parses a formula whose free variables must all be among `declared`.
pub fn parse_formula_in(text: &str, declared: &[String]) -> Result<Formula> {
    let f = parse_formula(text)?;
    check_declared(&f, declared)?;
    Ok(f)
}

pub(crate) fn check_declared(f: &Formula, declared: &[String]) -> Result<()> {
    match f.free_vars().into_iter().find(|v| !declared.contains(v)) {
        Some(v) => Err(Error::UnboundVariable(v)),
        None => Ok(()),
    }
}

pub(crate) fn parse_formula_at(cur: &mut Cursor) -> Result<Formula> {
    let lhs = parse_or(cur)?;
    if cur.eat_sym("->") {
        let rhs = parse_formula_at(cur)?;
        return Ok(Formula::Or(vec![Formula::Not(Box::new(lhs)), rhs]));
    }
    Ok(lhs)
}

fn parse_or(cur: &mut Cursor) -> Result<Formula> {
    let mut parts = vec![parse_and(cur)?];
    while cur.eat_kw("or") {
        parts.push(parse_and(cur)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
}

fn parse_and(cur: &mut Cursor) -> Result<Formula> {
    let mut parts = vec![parse_unary(cur)?];
    while cur.eat_kw("and") {
        parts.push(parse_unary(cur)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
}

fn parse_unary(cur: &mut Cursor) -> Result<Formula> {
    if cur.eat_kw("not") {
        return Ok(Formula::Not(Box::new(parse_unary(cur)?)));
    }
    for (kw, is_ex) in [("exists", true), ("forall", false)] {
        if cur.eat_kw(kw) {
            let mut vars = vec![cur.ident()?];
            while cur.eat_sym(",") {
                vars.push(cur.ident()?);
            }
            cur.expect_sym(".")?;
            let body = parse_formula_at(cur)?;
            return Ok(vars.iter().rev().fold(body, |b, v| {
                if is_ex {
                    Formula::exists(v, b)
                } else {
                    Formula::forall(v, b)
                }
            }));
        }
    }
    if cur.eat_kw("true") {
        return Ok(Formula::True);
    }
    if cur.eat_kw("false") {
        return Ok(Formula::False);
    }
    if cur.eat_sym("(") {
        let f = parse_formula_at(cur)?;
        cur.expect_sym(")")?;
        return Ok(f);
    }
    parse_atom(cur)
}

fn parse_atom(cur: &mut Cursor) -> Result<Formula> {
    let lhs = parse_linterm(cur)?;
    if cur.eat_kw("mod") {
        let n = cur.int()?;
        if n < BigInt::from(2) {
            return Err(Error::BadModulus(n.to_string()));
        }
        cur.expect_sym("=")?;
        let r = cur.int()?;
        return Ok(Formula::dvd(n, lhs.add_constant(-r)));
    }
    let op = match cur.peek() {
        Tok::Sym(s @ ("=" | "<=" | ">=" | "<" | ">" | "!=")) => *s,
        _ => return Err(cur.err("expected comparison or `mod`")),
    };
    cur.bump();
    let rhs = parse_linterm(cur)?;
    Ok(match op {
        "=" => Formula::eq(lhs, rhs),
        "<=" => Formula::le(lhs, rhs),
        ">=" => Formula::ge(lhs, rhs),
        "<" => Formula::lt(lhs, rhs),
        ">" => Formula::lt(rhs, lhs),
        _ => Formula::Not(Box::new(Formula::eq(lhs, rhs))),
    })
}

pub(crate) fn parse_linterm(cur: &mut Cursor) -> Result<LinearTerm> {
    let mut acc = LinearTerm::default();
    let mut sign = BigInt::one();
    if cur.eat_sym("-") {
        sign = -sign;
    }
    loop {
        let t = match cur.peek().clone() {
            Tok::Int(n) => {
                cur.bump();
                if cur.eat_sym("*") {
                    LinearTerm::scaled_var(&cur.ident()?, n)
                } else {
                    LinearTerm::constant(n)
                }
            }
            Tok::Ident(_) => LinearTerm::var(&cur.ident()?),
            _ => return Err(cur.err("expected term")),
        };
        acc = acc.add(&t.scale(&sign));
        if cur.eat_sym("+") {
            sign = BigInt::one();
        } else if cur.eat_sym("-") {
            sign = -BigInt::one();
        } else {
            return Ok(acc);
        }
    }
}


