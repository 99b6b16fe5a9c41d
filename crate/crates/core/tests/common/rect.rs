//! Rectilinearization fixtures: sets with a direct membership test, and an
//! exhaustive check of the pieces on truncations.

use std::collections::BTreeMap;

use loci::presburger::{equivalent, evaluate, is_satisfiable, parse_formula, Formula};
use loci::rectilinear::{rectilinearize, RectilinearPiece};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

pub struct RectFixture {
    pub text: &'static str,
    pub params: &'static [&'static str],
    pub vars: &'static [&'static str],
    /// Membership of `(params, vars)`.
    pub inside: fn(&[i64]) -> bool,
}

/// Parameters range over `[-P, P]`, source coordinates over `[-S, S]`,
/// unbounded target coordinates over `[0, N]` and bounded ones over `[-B, B]`.
const P: i64 = 3;
const S: i64 = 25;
const N: i64 = 25;
const B: i64 = 30;

pub fn fixtures() -> Vec<RectFixture> {
    vec![
        RectFixture { text: "x >= 0", params: &[], vars: &["x"], inside: |v| v[0] >= 0 },
        RectFixture { text: "x >= 3 and x mod 2 = 1", params: &[], vars: &["x"], inside: |v| v[0] >= 3 && v[0] % 2 != 0 },
        RectFixture { text: "-4 <= x and x <= 7", params: &[], vars: &["x"], inside: |v| (-4..=7).contains(&v[0]) },
        RectFixture { text: "x <= -2", params: &[], vars: &["x"], inside: |v| v[0] <= -2 },
        RectFixture { text: "x mod 3 = 2", params: &[], vars: &["x"], inside: |v| v[0].rem_euclid(3) == 2 },
        RectFixture { text: "exists y. x = 2*y + 1 and y >= -3", params: &[], vars: &["x"], inside: |v| v[0] >= -5 && v[0] % 2 != 0 },
        RectFixture { text: "x >= s", params: &["s"], vars: &["x"], inside: |v| v[1] >= v[0] },
        RectFixture { text: "0 <= x and x <= s", params: &["s"], vars: &["x"], inside: |v| 0 <= v[1] && v[1] <= v[0] },
        RectFixture {
            text: "x >= 2*s and x mod 2 = 0",
            params: &["s"],
            vars: &["x"],
            inside: |v| v[1] >= 2 * v[0] && v[1] % 2 == 0,
        },
        RectFixture { text: "x >= 0 and y >= 0", params: &[], vars: &["x", "y"], inside: |v| v[0] >= 0 && v[1] >= 0 },
        RectFixture { text: "0 <= x and x <= y", params: &[], vars: &["x", "y"], inside: |v| 0 <= v[0] && v[0] <= v[1] },
        RectFixture { text: "x >= 0 and y >= 2*x", params: &[], vars: &["x", "y"], inside: |v| v[0] >= 0 && v[1] >= 2 * v[0] },
        RectFixture {
            text: "0 <= x and x <= 5 and y >= 0",
            params: &[],
            vars: &["x", "y"],
            inside: |v| (0..=5).contains(&v[0]) && v[1] >= 0,
        },
        RectFixture {
            text: "0 <= x and x <= y and y <= x + 3",
            params: &[],
            vars: &["x", "y"],
            inside: |v| 0 <= v[0] && v[0] <= v[1] && v[1] <= v[0] + 3,
        },
        RectFixture {
            text: "x >= 0 and y >= 0 and x + y mod 2 = 0",
            params: &[],
            vars: &["x", "y"],
            inside: |v| v[0] >= 0 && v[1] >= 0 && (v[0] + v[1]) % 2 == 0,
        },
        RectFixture { text: "y >= 0 and x >= y", params: &[], vars: &["x", "y"], inside: |v| v[1] >= 0 && v[0] >= v[1] },
        RectFixture { text: "x >= s and y >= x", params: &["s"], vars: &["x", "y"], inside: |v| v[1] >= v[0] && v[2] >= v[1] },
        RectFixture {
            text: "x + y >= 0 and x - y >= 0",
            params: &[],
            vars: &["x", "y"],
            inside: |v| v[0] + v[1] >= 0 && v[0] - v[1] >= 0,
        },
        RectFixture {
            text: "x >= 0 and y >= 0 and x + 2*y <= 10",
            params: &[],
            vars: &["x", "y"],
            inside: |v| v[0] >= 0 && v[1] >= 0 && v[0] + 2 * v[1] <= 10,
        },
        RectFixture {
            text: "0 <= x and x <= s and y >= 0 and y mod 3 = 0",
            params: &["s"],
            vars: &["x", "y"],
            inside: |v| 0 <= v[1] && v[1] <= v[0] && v[2] >= 0 && v[2] % 3 == 0,
        },
    ]
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn env(names: &[String], pt: &[i64]) -> BTreeMap<String, BigInt> {
    names.iter().cloned().zip(pt.iter().map(|x| BigInt::from(*x))).collect()
}

fn grid(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64]) -> Result<(), String>) -> Result<(), String> {
    let mut pt = lo.to_vec();
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Ok(());
    }
    loop {
        f(&pt)?;
        let mut i = 0;
        loop {
            if i == pt.len() {
                return Ok(());
            }
            pt[i] += 1;
            if pt[i] <= hi[i] {
                break;
            }
            pt[i] = lo[i];
            i += 1;
        }
    }
}

fn apply(maps: &[loci::Poly], e: &BTreeMap<String, BigInt>) -> Option<Vec<i64>> {
    maps.iter()
        .map(|m| {
            let v = m.eval_int(e).ok()?;
            v.is_integer().then(|| v.to_integer().to_i64()).flatten()
        })
        .collect()
}

/// Formal checks: pairwise disjoint sources whose union is the set.
pub fn formal_check(set: &Formula, pieces: &[RectilinearPiece]) -> Result<(), String> {
    let err = |e: loci::Error| e.to_string();
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let both = Formula::and(vec![pieces[i].source.clone(), pieces[j].source.clone()]);
            if is_satisfiable(&both).map_err(err)? {
                return Err(format!("pieces {i} and {j} overlap"));
            }
        }
    }
    let union = Formula::or(pieces.iter().map(|p| p.source.clone()).collect());
    if !equivalent(&union, set).map_err(err)? {
        return Err("sources do not cover the set".into());
    }
    Ok(())
}

/// Truncated checks: every source point lies in exactly one piece and maps
/// into its target and back; every truncated target point comes from a
/// source point of the set.
pub fn fiber_check(fx: &RectFixture, pieces: &[RectilinearPiece]) -> Result<(), String> {
    let (params, vars) = (names(fx.params), names(fx.vars));
    let mut all = params.clone();
    all.extend(vars.iter().cloned());
    let np = params.len();
    let ev = |f: &Formula, e: &BTreeMap<String, BigInt>| evaluate(f, e).map_err(|e| e.to_string());
    let mut lo = vec![-P; np];
    let mut hi = vec![P; np];
    lo.extend(vec![-S; vars.len()]);
    hi.extend(vec![S; vars.len()]);
    grid(&lo, &hi, |pt| {
        let e = env(&all, pt);
        let mut hits = Vec::new();
        for (i, p) in pieces.iter().enumerate() {
            if ev(&p.source, &e)? {
                hits.push(i);
            }
        }
        let inside = (fx.inside)(pt);
        if hits.len() != usize::from(inside) {
            return Err(format!("{pt:?}: member = {inside}, pieces {hits:?}"));
        }
        if let Some(&i) = hits.first() {
            let p = &pieces[i];
            let img = apply(&p.forward, &e).ok_or(format!("{pt:?}: non-integral image"))?;
            let mut tnames = params.clone();
            tnames.extend(p.coords.iter().cloned());
            let mut tpt = pt[..np].to_vec();
            tpt.extend(&img);
            let te = env(&tnames, &tpt);
            if !ev(&p.target(), &te)? {
                return Err(format!("{pt:?}: image {img:?} outside the target of piece {i}"));
            }
            if apply(&p.inverse, &te).as_deref() != Some(&pt[np..]) {
                return Err(format!("{pt:?}: inverse does not return"));
            }
        }
        Ok(())
    })?;
    for (i, p) in pieces.iter().enumerate() {
        let mut tnames = params.clone();
        tnames.extend(p.coords.iter().cloned());
        let mut lo = vec![-P; np];
        let mut hi = vec![P; np];
        for u in &p.unbounded {
            lo.push(if *u { 0 } else { -B });
            hi.push(if *u { N } else { B });
        }
        let target = p.target();
        grid(&lo, &hi, |tpt| {
            let te = env(&tnames, tpt);
            if !ev(&target, &te)? {
                return Ok(());
            }
            let pre = apply(&p.inverse, &te).ok_or(format!("piece {i}, {tpt:?}: non-integral preimage"))?;
            let mut spt = tpt[..np].to_vec();
            spt.extend(&pre);
            let se = env(&all, &spt);
            if !(fx.inside)(&spt) || !ev(&p.source, &se)? {
                return Err(format!("piece {i}, {tpt:?}: preimage {pre:?} outside the source"));
            }
            if apply(&p.forward, &se).as_deref() != Some(&tpt[np..]) {
                return Err(format!("piece {i}, {tpt:?}: forward does not return"));
            }
            Ok(())
        })?;
    }
    Ok(())
}

pub fn check(fx: &RectFixture) -> Result<usize, String> {
    let set = parse_formula(fx.text).map_err(|e| e.to_string())?;
    let pieces = rectilinearize(&set, &names(fx.params), &names(fx.vars), &[]).map_err(|e| e.to_string())?;
    formal_check(&set, &pieces)?;
    fiber_check(fx, &pieces)?;
    Ok(pieces.len())
}
