//! Expansion of constructible terms into monomials `c * z^a * L^(b.z)` over
//! unbounded coordinates, and the sign/equality case split on parameter
//! dependent exponents.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::constructible::{poly_eq0, poly_ge0, ConstructibleFunction, Term};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Poly};
use crate::presburger::{is_satisfiable, simplify, Formula};
use crate::rectilinear::RectilinearPiece;

/// `coeff * prod z_j^a_j * L^(sum b_j z_j)`, with `coeff` and `b` free of the `z_j`.
#[derive(Clone, Debug)]
pub(crate) struct ZMono {
    pub a: Vec<u32>,
    pub b: Vec<Poly>,
    pub coeff: Term,
}

fn split_poly(p: &Poly, zs: &[String]) -> BTreeMap<Vec<u32>, Poly> {
    let mut out: BTreeMap<Vec<u32>, Vec<(Monomial, BigRational)>> = BTreeMap::new();
    for (m, c) in p.terms() {
        let a: Vec<u32> = zs.iter().map(|z| m.get(z).copied().unwrap_or(0)).collect();
        let rest: Monomial = m.iter().filter(|(v, _)| !zs.contains(v)).map(|(v, e)| (v.clone(), *e)).collect();
        out.entry(a).or_default().push((rest, c.clone()));
    }
    out.into_iter().map(|(a, t)| (a, Poly::from_terms(t))).collect()
}

pub(crate) fn expand_term(t: &Term, zs: &[String]) -> Result<Vec<ZMono>> {
    let unsupported = |what: &str| Error::Unsupported(format!("{what} in term {}", t.to_json()));
    if zs.iter().any(|z| t.geometric.iter().any(|g| g.mentions(z))) {
        return Err(unsupported("geometric factor depending on a summation variable"));
    }
    if zs.iter().any(|z| t.guard.mentions(z)) {
        return Err(unsupported("guard not constant on a piece"));
    }
    let mut e0 = t.exponent.clone();
    for z in zs {
        e0 = e0.substitute(z, &Poly::zero());
    }
    let mut rebuilt = e0.clone();
    let mut b = Vec::new();
    for z in zs {
        let cs = t.exponent.coefficients_in(z);
        if cs.len() > 2 {
            return Err(unsupported("exponent not affine in the lattice variables"));
        }
        let bj = cs.get(1).cloned().unwrap_or_default();
        if zs.iter().any(|w| bj.mentions(w)) {
            return Err(unsupported("exponent not affine in the lattice variables"));
        }
        rebuilt = rebuilt.add(&bj.mul(&Poly::var(z)));
        b.push(bj);
    }
    if rebuilt != t.exponent {
        return Err(unsupported("exponent not affine in the lattice variables"));
    }
    let mut acc: Vec<(Vec<u32>, Vec<Poly>)> = vec![(vec![0; zs.len()], vec![])];
    for f in &t.factors {
        let parts = split_poly(f, zs);
        let mut next = Vec::with_capacity(acc.len() * parts.len());
        for (a, fs) in &acc {
            for (a2, p) in &parts {
                let a: Vec<u32> = a.iter().zip(a2).map(|(x, y)| x + y).collect();
                let mut fs = fs.clone();
                fs.push(p.clone());
                next.push((a, fs));
            }
        }
        acc = next;
    }
    let mut out = Vec::new();
    for (a, factors) in acc {
        let coeff = Term {
            coeff: t.coeff.clone(),
            guard: t.guard.clone(),
            exponent: e0.clone(),
            factors,
            geometric: t.geometric.clone(),
        };
        if let Some(coeff) = coeff.normalize() {
            out.push(ZMono { a, b: b.clone(), coeff });
        }
    }
    Ok(out)
}

pub(crate) fn expand_terms(ts: &[Term], zs: &[String]) -> Result<Vec<ZMono>> {
    let mut out = Vec::new();
    for t in ts {
        out.extend(expand_term(t, zs)?);
    }
    Ok(out)
}

/// Monomials sharing `(a, b)` syntactically.
#[derive(Clone, Debug)]
pub(crate) struct Class {
    pub a: Vec<u32>,
    pub b: Vec<Poly>,
    pub coeffs: Vec<Term>,
}

pub(crate) fn group(monos: Vec<ZMono>) -> Vec<Class> {
    let mut out: Vec<Class> = Vec::new();
    for m in monos {
        match out.iter_mut().find(|c| c.a == m.a && c.b == m.b) {
            Some(c) => c.coeffs.push(m.coeff),
            None => out.push(Class { a: m.a, b: m.b, coeffs: vec![m.coeff] }),
        }
    }
    out
}

/// A cell of the parameter-side case split.
#[derive(Clone, Debug)]
pub(crate) struct Region {
    pub guard: Formula,
    signs: BTreeMap<Poly, i8>,
    equal: Vec<bool>,
}

impl Region {
    pub fn sign(&self, p: &Poly) -> i8 {
        if p.is_constant() {
            let c = p.constant_term();
            return if c.is_zero() { 0 } else if c.is_positive() { 1 } else { -1 };
        }
        self.signs[p]
    }
}

fn constant_sign(p: &Poly) -> Option<i8> {
    p.is_constant().then(|| {
        let c = p.constant_term();
        if c.is_zero() {
            0
        } else if c.is_positive() {
            1
        } else {
            -1
        }
    })
}

/// Pairs of classes with equal `a` and syntactically different `b`.
pub(crate) fn equality_pairs(classes: &[Class], same_a: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            if (!same_a || classes[i].a == classes[j].a) && classes[i].b != classes[j].b {
                out.push((i, j));
            }
        }
    }
    out
}

/// Splits `context` by the sign (`<= -1`, `= 0`, `>= 1`) of every polynomial in
/// `signs` and by whether the `b` vectors of each pair in `pairs` coincide.
/// Empty regions are pruned.
pub(crate) fn regions(
    context: &Formula,
    signs: &[Poly],
    classes: &[Class],
    pairs: &[(usize, usize)],
) -> Result<Vec<Region>> {
    let mut sign_polys: Vec<Poly> = Vec::new();
    for p in signs {
        if !p.is_constant() && !sign_polys.contains(p) {
            sign_polys.push(p.clone());
        }
    }
    let mut out = Vec::new();
    let start = Region { guard: context.clone(), signs: BTreeMap::new(), equal: vec![] };
    split(start, &sign_polys, classes, pairs, &mut out)?;
    Ok(out)
}

fn split(
    r: Region,
    signs: &[Poly],
    classes: &[Class],
    pairs: &[(usize, usize)],
    out: &mut Vec<Region>,
) -> Result<()> {
    let one = Poly::from_int(1);
    if let Some((p, rest)) = signs.split_first() {
        let options = [
            (-1i8, poly_ge0(&p.neg().sub(&one))?),
            (0, poly_eq0(p)?),
            (1, poly_ge0(&p.sub(&one))?),
        ];
        for (s, f) in options {
            let guard = simplify(&Formula::and(vec![r.guard.clone(), f]));
            if guard == Formula::False || !is_satisfiable(&guard)? {
                continue;
            }
            let mut signs_map = r.signs.clone();
            signs_map.insert(p.clone(), s);
            split(Region { guard, signs: signs_map, equal: r.equal.clone() }, rest, classes, pairs, out)?;
        }
        return Ok(());
    }
    let k = r.equal.len();
    if k == pairs.len() {
        out.push(r);
        return Ok(());
    }
    let (i, j) = pairs[k];
    let diffs: Vec<Poly> = classes[i].b.iter().zip(&classes[j].b).map(|(x, y)| x.sub(y)).collect();
    // known from constant parts or already decided signs
    let mut decided = None;
    for d in &diffs {
        let s = constant_sign(d).or_else(|| r.signs.get(d).copied());
        if s.is_some_and(|s| s != 0) {
            decided = Some(false);
        }
    }
    if decided.is_none() && diffs.iter().all(|d| d.is_zero()) {
        decided = Some(true);
    }
    let options: Vec<(bool, Formula)> = match decided {
        Some(v) => vec![(v, Formula::True)],
        None => {
            let eq = Formula::and(diffs.iter().map(poly_eq0).collect::<Result<Vec<_>>>()?);
            vec![(true, eq.clone()), (false, Formula::not(eq))]
        }
    };
    for (v, f) in options {
        let guard = simplify(&Formula::and(vec![r.guard.clone(), f]));
        if guard == Formula::False || !is_satisfiable(&guard)? {
            continue;
        }
        let mut equal = r.equal.clone();
        equal.push(v);
        split(Region { guard, signs: r.signs.clone(), equal }, signs, classes, pairs, out)?;
    }
    Ok(())
}

/// Classes merged according to the equalities holding in `region`.
pub(crate) fn merged_classes(classes: &[Class], pairs: &[(usize, usize)], region: &Region) -> Vec<Class> {
    let mut root: Vec<usize> = (0..classes.len()).collect();
    fn find(root: &mut Vec<usize>, i: usize) -> usize {
        let mut i = i;
        while root[i] != i {
            root[i] = root[root[i]];
            i = root[i];
        }
        i
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        if region.equal[k] && classes[i].a == classes[j].a {
            let (ri, rj) = (find(&mut root, i), find(&mut root, j));
            if ri != rj {
                root[rj.max(ri)] = rj.min(ri);
            }
        }
    }
    let mut out: Vec<Class> = Vec::new();
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..classes.len() {
        let r = find(&mut root, i);
        match index.get(&r) {
            Some(&k) => out[k].coeffs.extend(classes[i].coeffs.iter().cloned()),
            None => {
                index.insert(r, out.len());
                out.push(classes[i].clone());
            }
        }
    }
    out
}

/// Zero-count bound for one unbounded coordinate: `sum over distinct bases of
/// (max a + 1)`. A nonzero `sum_i c_i z^a_i L^(b_i z)` vanishes at fewer points.
pub(crate) fn zero_count_bound(classes: &[Class], pairs: &[(usize, usize)], region: &Region) -> usize {
    let mut root: Vec<usize> = (0..classes.len()).collect();
    for (k, &(i, j)) in pairs.iter().enumerate() {
        if region.equal[k] {
            let (ri, rj) = (root[i], root[j]);
            for r in root.iter_mut() {
                if *r == rj {
                    *r = ri;
                }
            }
        }
    }
    let mut top: BTreeMap<usize, u32> = BTreeMap::new();
    for (i, c) in classes.iter().enumerate() {
        let a = c.a.iter().copied().max().unwrap_or(0);
        let e = top.entry(root[i]).or_insert(0);
        *e = (*e).max(a);
    }
    top.values().map(|a| *a as usize + 1).sum()
}

pub(crate) fn normalize_terms(terms: Vec<Term>) -> Vec<Term> {
    ConstructibleFunction { params: vec![], vars: vec![], domain: Formula::True, terms }.normalized().terms
}

/// `(sum terms)^2`.
pub(crate) fn square_terms(terms: &[Term]) -> Vec<Term> {
    let two = crate::ring::AElement::from_int(2);
    let mut out = Vec::new();
    for i in 0..terms.len() {
        out.push(terms[i].mul(&terms[i]));
        for j in i + 1..terms.len() {
            let mut t = terms[i].mul(&terms[j]);
            t.coeff = &t.coeff * &two;
            out.push(t);
        }
    }
    normalize_terms(out)
}

/// Adds `guard` to every term, dropping terms whose guard becomes unsatisfiable.
pub(crate) fn restrict_terms(terms: &[Term], guard: &Formula) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for t in terms {
        let g = simplify(&Formula::and(vec![t.guard.clone(), guard.clone()]));
        if g == Formula::False || !is_satisfiable(&g)? {
            continue;
        }
        out.push(Term { guard: g, ..t.clone() });
    }
    Ok(out)
}

/// Terms of `f` restricted to `piece`, written in the piece coordinates.
/// Guards are replaced by their reductions to parameter conditions when the
/// piece tracked them, and otherwise rewritten in the coordinates.
pub(crate) fn terms_on_piece(f: &ConstructibleFunction, piece: &RectilinearPiece) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for (i, t) in f.terms.iter().enumerate() {
        let mut t = t.clone();
        if piece.tracked.len() == f.terms.len() {
            t.guard = piece.tracked[i].clone();
        }
        for (v, inv) in piece.vars.iter().zip(&piece.inverse) {
            t = t.substitute(v, inv)?;
        }
        t.guard = simplify(&t.guard);
        if t.guard == Formula::False {
            continue;
        }
        out.extend(t.normalize());
    }
    Ok(out)
}

/// One monomial `coeff(s, lambda) * z^a * L^(b.z)` of a [`MergedMonomialForm`].
#[derive(Clone, Debug)]
pub struct MergedMonomial {
    pub a: Vec<u32>,
    pub b: Vec<BigInt>,
    /// Function of the parameters and bounded coordinates of the piece.
    pub coeff: ConstructibleFunction,
}

/// A constructible function on a rectilinear piece, written as a sum of
/// monomials in the unbounded coordinates with pairwise distinct `(a, b)`.
#[derive(Clone, Debug)]
pub struct MergedMonomialForm {
    pub piece: RectilinearPiece,
    pub monomials: Vec<MergedMonomial>,
}

/// Rewrites `f` on `piece` as a sum of monomials with merged coefficients.
/// Exponent slopes must be integer constants on the piece; parameter
/// dependent slopes are reported as [`Error::NonAffine`].
pub fn merge_monomials(f: &ConstructibleFunction, piece: &RectilinearPiece) -> Result<MergedMonomialForm> {
    let zs = piece.unbounded_coords();
    let terms = terms_on_piece(f, piece)?;
    let monos = expand_terms(&terms, &zs)?;
    let mut out: Vec<MergedMonomial> = Vec::new();
    let bounded = piece.bounded_coords();
    for c in group(monos) {
        let mut b = Vec::new();
        for p in &c.b {
            let k = p.constant_term();
            if !p.is_constant() || !k.is_integer() {
                return Err(Error::NonAffine(format!(
                    "exponent slope {p} is not an integer constant; split the parameter space first"
                )));
            }
            b.push(k.to_integer());
        }
        let coeff = ConstructibleFunction::new(
            piece.params.clone(),
            bounded.clone(),
            piece.bounded_part.clone(),
            c.coeffs,
        )?
        .normalized();
        if coeff.is_syntactically_zero() {
            continue;
        }
        match out.iter_mut().find(|m| m.a == c.a && m.b == b) {
            Some(m) => m.coeff = m.coeff.add(&coeff)?,
            None => out.push(MergedMonomial { a: c.a, b, coeff }),
        }
    }
    Ok(MergedMonomialForm { piece: piece.clone(), monomials: out })
}
