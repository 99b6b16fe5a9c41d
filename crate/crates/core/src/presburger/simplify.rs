use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::formula::Formula;
use super::linear::LinearTerm;

/// Negation normal form. Quantifiers are kept, negations are pushed to atoms,
/// and only `not (n | t)` survives as a negated atom.
pub fn nnf(f: &Formula) -> Formula {
    nnf_rec(f, false)
}

fn nnf_rec(f: &Formula, neg: bool) -> Formula {
    match (f, neg) {
        (Formula::True, false) | (Formula::False, true) => Formula::True,
        (Formula::True, true) | (Formula::False, false) => Formula::False,
        (Formula::Ge(_) | Formula::Eq(_) | Formula::Dvd(..), false) => f.clone(),
        (Formula::Ge(t), true) => Formula::Ge(t.neg().add_constant(-1)),
        (Formula::Eq(t), true) => Formula::Or(vec![
            Formula::Ge(t.add_constant(-1)),
            Formula::Ge(t.neg().add_constant(-1)),
        ]),
        (Formula::Dvd(..), true) => Formula::Not(Box::new(f.clone())),
        (Formula::Not(g), _) => nnf_rec(g, !neg),
        (Formula::And(fs), false) | (Formula::Or(fs), true) => {
            Formula::and(fs.iter().map(|g| nnf_rec(g, neg)).collect())
        }
        (Formula::Or(fs), false) | (Formula::And(fs), true) => {
            Formula::or(fs.iter().map(|g| nnf_rec(g, neg)).collect())
        }
        (Formula::Exists(v, g), false) | (Formula::Forall(v, g), true) => {
            Formula::exists(v, nnf_rec(g, neg))
        }
        (Formula::Forall(v, g), false) | (Formula::Exists(v, g), true) => {
            Formula::forall(v, nnf_rec(g, neg))
        }
    }
}

/// Normalizes a single atom: gcd reduction, bound tightening, constant folding.
pub(crate) fn normalize_atom(a: &Formula) -> Formula {
    match a {
        Formula::Ge(t) => {
            if t.is_constant() {
                return bool_f(!t.constant_part().is_negative());
            }
            let g = t.coeff_gcd();
            if g.is_one() {
                return a.clone();
            }
            let c = t.constant_part();
            let lin = div_linear(t, &g);
            Formula::Ge(lin.add_constant(c.div_floor(&g)))
        }
        Formula::Eq(t) => {
            if t.is_constant() {
                return bool_f(t.constant_part().is_zero());
            }
            let g = t.coeff_gcd();
            let c = t.constant_part();
            if !c.is_multiple_of(&g) {
                return Formula::False;
            }
            let mut lin = div_linear(t, &g).add_constant(c / &g);
            if lin.coeffs().values().next().is_some_and(|c| c.is_negative()) {
                lin = lin.neg();
            }
            Formula::Eq(lin)
        }
        Formula::Dvd(n, t) => {
            let coeffs: BTreeMap<String, BigInt> = t
                .coeffs()
                .iter()
                .map(|(v, c)| (v.clone(), c.mod_floor(n)))
                .filter(|(_, c)| !c.is_zero())
                .collect();
            let c = t.constant_part().mod_floor(n);
            if coeffs.is_empty() {
                return bool_f(c.is_zero());
            }
            let g = coeffs.values().fold(n.clone(), |g, c| g.gcd(c));
            if !c.is_multiple_of(&g) {
                return Formula::False;
            }
            let n2 = n / &g;
            if n2.is_one() {
                return Formula::True;
            }
            let coeffs = coeffs.into_iter().map(|(v, c)| (v, c / &g)).collect();
            Formula::dvd(n2, LinearTerm::new(coeffs, c / &g))
        }
        Formula::Not(g) => Formula::not(normalize_atom(g)),
        _ => a.clone(),
    }
}

fn div_linear(t: &LinearTerm, g: &BigInt) -> LinearTerm {
    LinearTerm::new(
        t.coeffs().iter().map(|(v, c)| (v.clone(), c / g)).collect(),
        BigInt::zero(),
    )
}

fn bool_f(b: bool) -> Formula {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

/// Simplifies a formula: atom normalization, flattening, deduplication,
/// and pairwise reasoning about bounds on the same linear form.
/// Children of `and`/`or` come out sorted, so the result is deterministic.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Ge(_) | Formula::Eq(_) | Formula::Dvd(..) => normalize_atom(f),
        Formula::Not(g) => {
            let s = simplify(g);
            match s {
                Formula::Dvd(n, t) if n == BigInt::from(2) => normalize_atom(&Formula::Dvd(n, t.add_constant(1))),
                Formula::Dvd(..) => Formula::not(s),
                Formula::Ge(t) => Formula::Ge(t.neg().add_constant(-1)),
                s => Formula::not(s),
            }
        }
        Formula::And(fs) => simplify_junction(fs, true),
        Formula::Or(fs) => simplify_junction(fs, false),
        Formula::Exists(v, g) => {
            let s = simplify(g);
            if s.mentions(v) {
                Formula::exists(v, s)
            } else {
                s
            }
        }
        Formula::Forall(v, g) => {
            let s = simplify(g);
            if s.mentions(v) {
                Formula::forall(v, s)
            } else {
                s
            }
        }
    }
}

fn simplify_junction(fs: &[Formula], conj: bool) -> Formula {
    let mut items = BTreeSet::new();
    let mut stack: Vec<Formula> = fs.iter().map(simplify).collect();
    while let Some(g) = stack.pop() {
        match (&g, conj) {
            (Formula::True, true) | (Formula::False, false) => {}
            (Formula::False, true) => return Formula::False,
            (Formula::True, false) => return Formula::True,
            (Formula::And(xs), true) | (Formula::Or(xs), false) => stack.extend(xs.iter().cloned()),
            _ => {
                items.insert(g);
            }
        }
    }
    // negated pairs
    for g in &items {
        if let Formula::Not(inner) = g {
            if items.contains(inner.as_ref()) {
                return bool_f(!conj);
            }
        }
    }
    // distinct residues of the same form
    if conj {
        let mut residues: BTreeMap<(BigInt, LinearTerm), BigInt> = BTreeMap::new();
        for g in &items {
            if let Formula::Dvd(n, t) = g {
                let key = (n.clone(), t.linear_part());
                if let Some(c) = residues.insert(key, t.constant_part().clone()) {
                    if c != *t.constant_part() {
                        return Formula::False;
                    }
                }
            }
        }
    }
    // absorption: a and (a or b) = a, a or (a and b) = a
    let snapshot = items.clone();
    items.retain(|g| match (g, conj) {
        (Formula::Or(xs), true) | (Formula::And(xs), false) => !xs.iter().any(|x| snapshot.contains(x)),
        _ => true,
    });
    // bounds on the same linear form
    let mut bounds: BTreeMap<LinearTerm, BigInt> = BTreeMap::new();
    let mut eqs: BTreeMap<LinearTerm, BigInt> = BTreeMap::new();
    let mut rest = Vec::new();
    let mut eq_pending = Vec::new();
    let mut items: Vec<Formula> = items.into_iter().collect();
    // bounds before equalities, so that widening sees them
    items.sort_by_key(|g| !matches!(g, Formula::Ge(_)));
    for g in items {
        match g {
            Formula::Ge(t) => {
                let l = t.linear_part();
                let c = t.constant_part().clone();
                let e = bounds.entry(l).or_insert_with(|| c.clone());
                // and keeps the stronger (smaller constant), or the weaker
                if (conj && c < *e) || (!conj && c > *e) {
                    *e = c;
                }
            }
            Formula::Eq(t) if !conj => {
                // l = -c next to l >= -c+1 or l <= -c-1 widens that bound
                let l = t.linear_part();
                let c = t.constant_part().clone();
                let widened = |b: &mut BTreeMap<LinearTerm, BigInt>, key: &LinearTerm, from: BigInt| {
                    if b.get(key) == Some(&from) {
                        let e = b.get_mut(key).unwrap();
                        *e += 1;
                        return true;
                    }
                    false
                };
                if !widened(&mut bounds, &l, &c - 1) && !widened(&mut bounds, &l.neg(), -&c - 1) {
                    eq_pending.push(Formula::Eq(t));
                }
            }
            Formula::Eq(t) if conj => {
                let l = t.linear_part();
                let c = t.constant_part().clone();
                if let Some(c0) = eqs.get(&l) {
                    if *c0 != c {
                        return Formula::False;
                    }
                }
                eqs.insert(l, c);
            }
            g => rest.push(g),
        }
    }
    if conj {
        // equalities fix the value of their linear form: check bounds against it
        for (l, c) in &eqs {
            // l = -c
            if let Some(b) = bounds.get(l) {
                if b - c < BigInt::zero() {
                    return Formula::False;
                }
                bounds.remove(l);
            }
            if let Some(b) = bounds.get(&l.neg()) {
                if b + c < BigInt::zero() {
                    return Formula::False;
                }
                bounds.remove(&l.neg());
            }
        }
    }
    rest.extend(eq_pending);
    let keys: Vec<LinearTerm> = bounds.keys().cloned().collect();
    let mut done = BTreeSet::new();
    for l in keys {
        if done.contains(&l) {
            continue;
        }
        let nl = l.neg();
        if let (Some(c), Some(d)) = (bounds.get(&l).cloned(), bounds.get(&nl).cloned()) {
            // l >= -c and l <= d
            done.insert(nl.clone());
            if conj {
                if -&c > d {
                    return Formula::False;
                }
                if -&c == d {
                    bounds.remove(&l);
                    bounds.remove(&nl);
                    let mut e = l.add_constant(c);
                    if e.coeffs().values().next().is_some_and(|c| c.is_negative()) {
                        e = e.neg();
                    }
                    eqs.insert(e.linear_part(), e.constant_part().clone());
                }
            } else if -&c <= &d + 1 {
                return Formula::True;
            }
        }
    }
    let mut out: Vec<Formula> = bounds
        .into_iter()
        .map(|(l, c)| Formula::Ge(l.add_constant(c)))
        .chain(eqs.into_iter().map(|(l, c)| Formula::Eq(l.add_constant(c))))
        .chain(rest)
        .collect();
    out.sort();
    out.dedup();
    if conj {
        Formula::and(out)
    } else {
        Formula::or(out)
    }
}
