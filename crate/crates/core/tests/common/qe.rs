//! Random Presburger formulas with an exact evaluator.
//!
//! A quantifier whose body is quantifier-free ranges over all of Z and is
//! decided exactly: between consecutive boundary points of its atoms the body
//! is periodic with the lcm of the divisibility periods. Quantifiers with
//! quantified bodies carry explicit bounds `[-K, K]`, so a finite search is
//! exact for them as well.

use loci::presburger::Formula as LibFormula;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const NAMES: [&str; 5] = ["a", "b", "x", "y", "z"];
pub const K: i64 = 5;

#[derive(Clone, Debug)]
pub struct Lin {
    pub coeffs: [i64; 5],
    pub constant: i64,
}

impl Lin {
    fn eval(&self, env: &[i64; 5]) -> i64 {
        self.coeffs.iter().zip(env).map(|(c, v)| c * v).sum::<i64>() + self.constant
    }

    /// Value with slot `v` set to zero.
    fn rest(&self, v: usize, env: &[i64; 5]) -> i64 {
        self.eval(env) - self.coeffs[v] * env[v]
    }

    fn text(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            if s.is_empty() {
                s = format!("{c}*{}", NAMES[i]);
            } else if *c < 0 {
                s.push_str(&format!(" - {}*{}", -c, NAMES[i]));
            } else {
                s.push_str(&format!(" + {c}*{}", NAMES[i]));
            }
        }
        if s.is_empty() {
            return self.constant.to_string();
        }
        match self.constant {
            0 => s,
            c if c < 0 => format!("{s} - {}", -c),
            c => format!("{s} + {c}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum F {
    /// `t >= 0`
    Ge(Lin),
    /// `t = 0`
    Eq(Lin),
    /// `t mod n = 0`
    Dvd(i64, Lin),
    Not(Box<F>),
    And(Vec<F>),
    Or(Vec<F>),
    Exists(usize, bool, Box<F>),
    Forall(usize, bool, Box<F>),
}

impl F {
    pub fn has_quantifier(&self) -> bool {
        match self {
            F::Ge(_) | F::Eq(_) | F::Dvd(..) => false,
            F::Not(g) => g.has_quantifier(),
            F::And(gs) | F::Or(gs) => gs.iter().any(|g| g.has_quantifier()),
            F::Exists(..) | F::Forall(..) => true,
        }
    }

    pub fn quantifiers(&self) -> usize {
        match self {
            F::Ge(_) | F::Eq(_) | F::Dvd(..) => 0,
            F::Not(g) => g.quantifiers(),
            F::And(gs) | F::Or(gs) => gs.iter().map(|g| g.quantifiers()).sum(),
            F::Exists(_, _, g) | F::Forall(_, _, g) => 1 + g.quantifiers(),
        }
    }

    pub fn free_slots(&self) -> Vec<usize> {
        let mut used = [false; 5];
        self.mark(&mut used, &mut [false; 5]);
        (0..5).filter(|i| used[*i]).collect()
    }

    fn mark(&self, used: &mut [bool; 5], bound: &mut [bool; 5]) {
        match self {
            F::Ge(t) | F::Eq(t) | F::Dvd(_, t) => {
                for i in 0..5 {
                    if t.coeffs[i] != 0 && !bound[i] {
                        used[i] = true;
                    }
                }
            }
            F::Not(g) => g.mark(used, bound),
            F::And(gs) | F::Or(gs) => gs.iter().for_each(|g| g.mark(used, bound)),
            F::Exists(v, _, g) | F::Forall(v, _, g) => {
                let was = bound[*v];
                bound[*v] = true;
                g.mark(used, bound);
                bound[*v] = was;
            }
        }
    }

    pub fn text(&self) -> String {
        match self {
            F::Ge(t) => format!("{} >= 0", t.text()),
            F::Eq(t) => format!("{} = 0", t.text()),
            F::Dvd(n, t) => format!("{} mod {n} = 0", t.text()),
            F::Not(g) => format!("not ({})", g.text()),
            F::And(gs) => format!("({})", gs.iter().map(|g| g.text()).collect::<Vec<_>>().join(" and ")),
            F::Or(gs) => format!("({})", gs.iter().map(|g| g.text()).collect::<Vec<_>>().join(" or ")),
            F::Exists(v, bounded, g) => {
                let n = NAMES[*v];
                if *bounded {
                    format!("(exists {n}. ({n} >= -{K} and {n} <= {K} and {}))", g.text())
                } else {
                    format!("(exists {n}. {})", g.text())
                }
            }
            F::Forall(v, bounded, g) => {
                let n = NAMES[*v];
                if *bounded {
                    format!("(forall {n}. (not ({n} >= -{K} and {n} <= {K}) or {}))", g.text())
                } else {
                    format!("(forall {n}. {})", g.text())
                }
            }
        }
    }

    pub fn eval(&self, env: &mut [i64; 5]) -> bool {
        match self {
            F::Ge(t) => t.eval(env) >= 0,
            F::Eq(t) => t.eval(env) == 0,
            F::Dvd(n, t) => t.eval(env).rem_euclid(*n) == 0,
            F::Not(g) => !g.eval(env),
            F::And(gs) => gs.iter().all(|g| g.eval(env)),
            F::Or(gs) => gs.iter().any(|g| g.eval(env)),
            F::Exists(v, bounded, g) => exists(*v, *bounded, g, env),
            F::Forall(v, bounded, g) => !exists(*v, *bounded, &F::Not(g.clone()), env),
        }
    }

    fn atoms<'a>(&'a self, out: &mut Vec<&'a F>) {
        match self {
            F::Ge(_) | F::Eq(_) | F::Dvd(..) => out.push(self),
            F::Not(g) => g.atoms(out),
            F::And(gs) | F::Or(gs) => gs.iter().for_each(|g| g.atoms(out)),
            F::Exists(_, _, g) | F::Forall(_, _, g) => g.atoms(out),
        }
    }
}

fn exists(v: usize, bounded: bool, body: &F, env: &mut [i64; 5]) -> bool {
    let saved = env[v];
    let candidates: Vec<i64> = if bounded {
        (-K..=K).collect()
    } else {
        assert!(!body.has_quantifier(), "unbounded quantifier over a quantified body");
        let mut atoms = Vec::new();
        body.atoms(&mut atoms);
        let mut period = 1i64;
        let mut marks = Vec::new();
        for a in atoms {
            match a {
                F::Ge(t) | F::Eq(t) if t.coeffs[v] != 0 => {
                    let (c, r) = (t.coeffs[v], t.rest(v, env));
                    marks.push(Integer::div_floor(&-r, &c));
                    marks.push(Integer::div_ceil(&-r, &c));
                }
                F::Dvd(n, t) if t.coeffs[v] != 0 => {
                    period = period.lcm(&(n / n.gcd(&t.coeffs[v])));
                }
                _ => {}
            }
        }
        if marks.is_empty() {
            (0..period).collect()
        } else {
            let mut c: Vec<i64> = marks.iter().flat_map(|m| (m - period)..=(m + period)).collect();
            c.sort_unstable();
            c.dedup();
            c
        }
    };
    let mut found = false;
    for x in candidates {
        env[v] = x;
        if body.eval(env) {
            found = true;
            break;
        }
    }
    env[v] = saved;
    found
}

/// Evaluates a quantifier-free formula produced by the library.
pub fn eval_lib(f: &LibFormula, env: &[i64; 5]) -> bool {
    let lin = |t: &loci::LinearTerm| -> i64 {
        let mut acc = t.constant_part().to_i64().unwrap();
        for (name, c) in t.coeffs() {
            let slot = NAMES.iter().position(|n| n == name).expect("known variable");
            acc += c.to_i64().unwrap() * env[slot];
        }
        acc
    };
    match f {
        LibFormula::True => true,
        LibFormula::False => false,
        LibFormula::Ge(t) => lin(t) >= 0,
        LibFormula::Eq(t) => lin(t) == 0,
        LibFormula::Dvd(n, t) => lin(t).rem_euclid(n.to_i64().unwrap()) == 0,
        LibFormula::Not(g) => !eval_lib(g, env),
        LibFormula::And(gs) => gs.iter().all(|g| eval_lib(g, env)),
        LibFormula::Or(gs) => gs.iter().any(|g| eval_lib(g, env)),
        LibFormula::Exists(..) | LibFormula::Forall(..) => panic!("quantifier left in output"),
    }
}

fn lin(rng: &mut ChaCha8Rng, scope: &[usize]) -> Lin {
    let mut coeffs = [0i64; 5];
    let k = rng.gen_range(1..=scope.len().min(3));
    for _ in 0..k {
        let v = scope[rng.gen_range(0..scope.len())];
        coeffs[v] = rng.gen_range(-5..=5);
    }
    if coeffs.iter().all(|c| *c == 0) {
        coeffs[scope[0]] = 1;
    }
    Lin { coeffs, constant: rng.gen_range(-10..=10) }
}

fn atom(rng: &mut ChaCha8Rng, scope: &[usize]) -> F {
    let t = lin(rng, scope);
    match rng.gen_range(0..6) {
        0 => F::Eq(t),
        1 => F::Dvd(rng.gen_range(2..=5), t),
        2 => F::Not(Box::new(F::Ge(t))),
        _ => F::Ge(t),
    }
}

fn gen(rng: &mut ChaCha8Rng, quants: usize, scope: &mut Vec<usize>, next: &mut usize) -> F {
    if quants > 0 && (rng.gen_bool(0.6) || scope.len() < 2) {
        let v = 2 + *next;
        *next += 1;
        scope.push(v);
        let body = gen(rng, quants - 1, scope, next);
        scope.pop();
        let bounded = body.has_quantifier();
        let body = Box::new(F::And(vec![body, atom(rng, &[scope.clone(), vec![v]].concat())]));
        return if rng.gen_bool(0.5) { F::Exists(v, bounded, body) } else { F::Forall(v, bounded, body) };
    }
    if quants > 0 {
        let left = quants / 2 + quants % 2;
        let a = gen(rng, left, scope, next);
        let b = gen(rng, quants - left, scope, next);
        return if rng.gen_bool(0.5) { F::And(vec![a, b]) } else { F::Or(vec![a, b]) };
    }
    let n = rng.gen_range(1..=3);
    let parts: Vec<F> = (0..n).map(|_| atom(rng, scope)).collect();
    if n == 1 {
        parts.into_iter().next().unwrap()
    } else if rng.gen_bool(0.5) {
        F::And(parts)
    } else {
        F::Or(parts)
    }
}

/// A formula with 1 to 3 quantifiers over the free variables `a` (and `b`).
pub fn random_formula(rng: &mut ChaCha8Rng) -> F {
    let quants = rng.gen_range(1..=3);
    let mut scope = if rng.gen_bool(0.5) { vec![0] } else { vec![0, 1] };
    let mut next = 0;
    gen(rng, quants, &mut scope, &mut next)
}
