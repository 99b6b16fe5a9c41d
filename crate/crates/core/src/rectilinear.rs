//! Parametric rectilinearization of Presburger sets.
//!
//! A set `X` in `params x Z^m` is cut into pieces, each carrying an affine
//! bijection onto a set whose fiber over every parameter value is
//! `Lambda_s x N^l` with `Lambda_s` finite. The construction works one
//! coordinate at a time, innermost first: congruences are removed by
//! `y = N*w + r`, the line of `w` is cut at the breakpoints of all atoms,
//! bounded cells become bounded coordinates and half-lines become copies of
//! `N` (reflected when unbounded below).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value as Json};

use crate::constructible::{poly_eq0, poly_ge0};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::presburger::{
    eliminate_quantifiers, is_satisfiable, nnf, simplify, Formula, LinearTerm,
};

const W: &str = "_w";

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum CellKind {
    /// `z` in `[0, len - 1]`
    Bounded(Poly),
    /// `w = start + z`, `z >= 0`
    Up,
    /// `w = start - z`, `z >= 0`
    Down,
}

/// One cell of the line of `y` over the outer variables:
/// `y = N*(start + z) + r` (or `start - z` for [`CellKind::Down`]).
#[derive(Clone, Debug)]
pub(crate) struct Cell {
    pub cond: Formula,
    pub modulus: BigInt,
    pub residue: BigInt,
    pub start: Poly,
    pub kind: CellKind,
    /// Tracked formulas, constant along the cell, reduced to the outer variables.
    pub reps: Vec<Formula>,
}

impl Cell {
    /// `y` as a polynomial in the outer variables and `z`.
    pub fn y_of(&self, z: &Poly) -> Poly {
        let n = BigRational::from_integer(self.modulus.clone());
        let w = match self.kind {
            CellKind::Down => self.start.sub(z),
            _ => self.start.add(z),
        };
        w.scale(&n).add(&Poly::from_int(self.residue.clone()))
    }

    /// `z` as a polynomial in the outer variables and `y`.
    pub fn z_of(&self, y: &str) -> Poly {
        let n = BigRational::new(BigInt::one(), self.modulus.clone());
        let w = Poly::var(y).sub(&Poly::from_int(self.residue.clone())).scale(&n);
        match self.kind {
            CellKind::Down => self.start.sub(&w),
            _ => w.sub(&self.start),
        }
    }

    /// The condition on `y` (with the outer variables free) of lying in this cell.
    pub fn range(&self, y: &str) -> Result<Formula> {
        let z = self.z_of(y);
        let mut parts = vec![poly_ge0(&z)?];
        if !self.modulus.is_one() {
            parts.push(Formula::dvd(
                self.modulus.clone(),
                LinearTerm::var(y).sub(&LinearTerm::constant(self.residue.clone())),
            ));
        }
        if let CellKind::Bounded(len) = &self.kind {
            parts.push(poly_ge0(&len.sub(&z).sub(&Poly::from_int(1)))?);
        }
        Ok(Formula::and(parts))
    }
}

fn pge(a: &Poly, b: &Poly) -> Result<Formula> {
    poly_ge0(&a.sub(b))
}

fn pgt(a: &Poly, b: &Poly) -> Result<Formula> {
    poly_ge0(&a.sub(b).sub(&Poly::from_int(1)))
}

fn pne(a: &Poly, b: &Poly) -> Result<Formula> {
    Ok(Formula::not(poly_eq0(&a.sub(b))?))
}

fn subst_rat(f: &Formula, v: &str, by: &Poly) -> Result<Formula> {
    let (num, den) = by.to_linear_scaled()?;
    Ok(simplify(&f.substitute_scaled(v, &num, &den)))
}

/// Cuts the line of `y` into cells on which every tracked formula has constant
/// truth value. Only cells where `tracked[0]` holds are returned; `tracked[0]`
/// is usually the set being decomposed.
pub(crate) fn cells_1d(y: &str, tracked: &[Formula], context: &Formula) -> Result<Vec<Cell>> {
    let tracked: Vec<Formula> = tracked
        .iter()
        .map(|f| Ok(simplify(&nnf(&eliminate_quantifiers(f)?))))
        .collect::<Result<_>>()?;
    let mut modulus = BigInt::one();
    for f in &tracked {
        f.map_atoms(&mut |a| {
            if let Formula::Dvd(n, t) = a {
                if t.has_var(y) {
                    modulus = modulus.lcm(n);
                }
            }
            a.clone()
        });
    }
    let nmod: i64 = modulus
        .to_i64()
        .filter(|n| *n <= 4096)
        .ok_or_else(|| Error::ResourceLimit(format!("congruence period {modulus} too large")))?;
    let mut cells = Vec::new();
    for r in 0..nmod {
        let yw = LinearTerm::scaled_var(W, modulus.clone()).add_constant(r);
        let sub: Vec<Formula> = tracked.iter().map(|f| simplify(&f.substitute(y, &yw))).collect();
        if sub[0] == Formula::False {
            continue;
        }
        // atoms with |coefficient| > 1 need the residue of their constant part
        let mut splits: Vec<(BigInt, LinearTerm)> = Vec::new();
        for f in &sub {
            f.map_atoms(&mut |a| {
                if let Formula::Ge(t) | Formula::Eq(t) = a {
                    let c = t.coeff(W).abs();
                    if c > BigInt::one() {
                        let key = (c, t.without(W));
                        if !splits.contains(&key) {
                            splits.push(key);
                        }
                    }
                }
                a.clone()
            });
        }
        let combos: u64 = splits.iter().map(|(c, _)| c.to_u64().unwrap_or(u64::MAX)).product();
        if combos > 4096 {
            return Err(Error::ResourceLimit("too many residue splits".into()));
        }
        for combo in 0..combos {
            let mut k = combo;
            let mut guard = vec![context.clone()];
            let mut residues = Vec::new();
            for (c, t) in &splits {
                let cu = c.to_u64().unwrap();
                let rho = BigInt::from(k % cu);
                k /= cu;
                guard.push(Formula::dvd(c.clone(), t.sub(&LinearTerm::constant(rho.clone()))));
                residues.push(rho);
            }
            let guard = simplify(&Formula::and(guard));
            if guard == Formula::False {
                continue;
            }
            let rho_of = |c: &BigInt, t: &LinearTerm| -> BigInt {
                splits
                    .iter()
                    .position(|(c2, t2)| c2 == c && t2 == t)
                    .map(|i| residues[i].clone())
                    .unwrap_or_default()
            };
            let mut points: Vec<Poly> = Vec::new();
            let mut push = |p: Poly| {
                if !points.contains(&p) {
                    points.push(p);
                }
            };
            for f in &sub {
                f.map_atoms(&mut |a| {
                    match a {
                        Formula::Ge(t) if t.has_var(W) => {
                            let c = t.coeff(W);
                            let rest = t.without(W);
                            let ca = c.abs();
                            let rho = if ca.is_one() { BigInt::zero() } else { rho_of(&ca, &rest) };
                            let rest_p = Poly::from_linear(&rest);
                            let inv = BigRational::new(BigInt::one(), ca.clone());
                            if c.is_positive() {
                                // w >= (rho - t)/c
                                push(Poly::from_int(rho).sub(&rest_p).scale(&inv));
                            } else {
                                // w <= (t - rho)/|c|
                                push(rest_p.sub(&Poly::from_int(rho)).scale(&inv).add(&Poly::from_int(1)));
                            }
                        }
                        Formula::Eq(t) if t.has_var(W) => {
                            let c = t.coeff(W);
                            let rest = t.without(W);
                            let ca = c.abs();
                            let rho = if ca.is_one() { BigInt::zero() } else { rho_of(&ca, &rest) };
                            if rho.is_zero() {
                                let e = Poly::from_linear(&rest)
                                    .scale(&BigRational::new(-BigInt::one(), c.clone()));
                                push(e.add(&Poly::from_int(1)));
                                push(e);
                            }
                        }
                        _ => {}
                    }
                    a.clone()
                });
            }
            let mut pend: Vec<(Poly, CellKind, Poly, Formula)> = Vec::new();
            if points.is_empty() {
                pend.push((Poly::zero(), CellKind::Up, Poly::zero(), Formula::True));
                pend.push((Poly::from_int(-1), CellKind::Down, Poly::from_int(-1), Formula::True));
            }
            let n = points.len();
            for i in 0..n {
                let pi = &points[i];
                let mut first_i = Vec::new();
                for pk in &points[..i] {
                    first_i.push(pne(pk, pi)?);
                }
                let mut up = first_i.clone();
                let mut down = first_i.clone();
                for (k, pk) in points.iter().enumerate() {
                    if k != i {
                        up.push(pge(pi, pk)?);
                        down.push(pge(pk, pi)?);
                    }
                }
                pend.push((pi.clone(), CellKind::Up, pi.clone(), Formula::and(up)));
                let below = pi.sub(&Poly::from_int(1));
                pend.push((below.clone(), CellKind::Down, below, Formula::and(down)));
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let pj = &points[j];
                    let mut c = first_i.clone();
                    c.push(pgt(pj, pi)?);
                    for pk in &points[..j] {
                        c.push(pne(pk, pj)?);
                    }
                    for (k, pk) in points.iter().enumerate() {
                        if k != i && k != j {
                            c.push(Formula::or(vec![pge(pi, pk)?, pge(pk, pj)?]));
                        }
                    }
                    pend.push((pi.clone(), CellKind::Bounded(pj.sub(pi)), pi.clone(), Formula::and(c)));
                }
            }
            for (start, kind, rep, cond) in pend {
                let reps: Vec<Formula> =
                    sub.iter().map(|f| subst_rat(f, W, &rep)).collect::<Result<_>>()?;
                let full = simplify(&Formula::and(vec![guard.clone(), cond, reps[0].clone()]));
                if full == Formula::False || !is_satisfiable(&full)? {
                    continue;
                }
                let reps = reps
                    .into_iter()
                    .map(|f| simplify(&Formula::and(vec![guard.clone(), f])))
                    .collect();
                cells.push(Cell {
                    cond: full,
                    modulus: modulus.clone(),
                    residue: BigInt::from(r),
                    start,
                    kind,
                    reps,
                });
            }
        }
    }
    Ok(cells)
}

/// A piece of a rectilinearization.
///
/// Target coordinates are named after the source variables with a trailing
/// `'`. `forward` gives each target coordinate in terms of the parameters and
/// source variables, `inverse` each source variable in terms of the parameters
/// and target coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectilinearPiece {
    pub params: Vec<String>,
    pub vars: Vec<String>,
    pub source: Formula,
    pub coords: Vec<String>,
    pub unbounded: Vec<bool>,
    pub forward: Vec<Poly>,
    pub inverse: Vec<Poly>,
    /// `Lambda_s`: condition on the parameters and the bounded coordinates.
    pub bounded_part: Formula,
    /// Tracked formulas reduced to conditions on the parameters.
    pub tracked: Vec<Formula>,
}

impl RectilinearPiece {
    pub fn shape_l(&self) -> usize {
        self.unbounded.iter().filter(|u| **u).count()
    }

    pub fn bounded_coords(&self) -> Vec<String> {
        self.coords.iter().zip(&self.unbounded).filter(|(_, u)| !**u).map(|(c, _)| c.clone()).collect()
    }

    pub fn unbounded_coords(&self) -> Vec<String> {
        self.coords.iter().zip(&self.unbounded).filter(|(_, u)| **u).map(|(c, _)| c.clone()).collect()
    }

    /// The target set `B`: `Lambda_s x N^l`.
    pub fn target(&self) -> Formula {
        let mut parts = vec![self.bounded_part.clone()];
        for c in self.unbounded_coords() {
            parts.push(Formula::Ge(LinearTerm::var(&c)));
        }
        Formula::and(parts)
    }

    /// The parameter values over which the piece is nonempty.
    pub fn param_condition(&self) -> Result<Formula> {
        eliminate_quantifiers(&Formula::exists_all(&self.bounded_coords(), self.bounded_part.clone()))
    }

    pub fn to_json(&self) -> Json {
        let matrix: Vec<Vec<String>> = self
            .forward
            .iter()
            .map(|p| self.vars.iter().map(|v| p.linear_coeff(v).to_string()).collect())
            .collect();
        let offset: Vec<String> = self
            .forward
            .iter()
            .map(|p| {
                let mut q = p.clone();
                for v in &self.vars {
                    q = q.substitute(v, &Poly::zero());
                }
                q.to_string()
            })
            .collect();
        json!({
            "source": self.source.to_string(),
            "coords": self.coords,
            "matrix": matrix,
            "offset": offset,
            "inverse": self.inverse.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "shape_l": self.shape_l(),
            "unbounded": self.unbounded,
            "bounded_part": self.bounded_part.to_string(),
        })
    }
}

impl fmt::Display for RectilinearPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fw: Vec<String> =
            self.coords.iter().zip(&self.forward).map(|(c, p)| format!("{c} = {p}")).collect();
        write!(f, "{} |-> ({}) with l = {}, bounded part {}", self.source, fw.join(", "), self.shape_l(), self.bounded_part)
    }
}

/// Partial piece over a prefix of the variables.
#[derive(Clone, Debug)]
struct Partial {
    source: Formula,
    coords: Vec<String>,
    unbounded: Vec<bool>,
    forward: Vec<Poly>,
    inverse: Vec<Poly>,
    bounded_part: Formula,
    tracked: Vec<Formula>,
}

pub fn coord_name(v: &str) -> String {
    format!("{v}'")
}

/// Rectilinearizes `set` (over `params` and `vars`), additionally reducing every
/// tracked formula to a parameter condition on each piece.
pub fn rectilinearize(
    set: &Formula,
    params: &[String],
    vars: &[String],
    tracked: &[Formula],
) -> Result<Vec<RectilinearPiece>> {
    let mut all = params.to_vec();
    all.extend(vars.iter().cloned());
    crate::presburger::check_declared(set, &all)?;
    let mut tr = vec![set.clone()];
    tr.extend(tracked.iter().cloned());
    let partials = rect_rec(&tr, vars)?;
    let mut out = Vec::new();
    for p in partials {
        let source = simplify(&p.source);
        if source == Formula::False || !is_satisfiable(&source)? {
            continue;
        }
        out.push(RectilinearPiece {
            params: params.to_vec(),
            vars: vars.to_vec(),
            source,
            coords: p.coords,
            unbounded: p.unbounded,
            forward: p.forward,
            inverse: p.inverse,
            bounded_part: simplify(&p.bounded_part),
            tracked: p.tracked[1..].to_vec(),
        });
    }
    Ok(out)
}

fn rect_rec(tracked: &[Formula], vars: &[String]) -> Result<Vec<Partial>> {
    let Some((y, outer)) = vars.split_last() else {
        let cond = eliminate_quantifiers(&tracked[0])?;
        return Ok(vec![Partial {
            source: cond.clone(),
            coords: vec![],
            unbounded: vec![],
            forward: vec![],
            inverse: vec![],
            bounded_part: cond,
            tracked: tracked.iter().map(eliminate_quantifiers).collect::<Result<_>>()?,
        }]);
    };
    let cells = cells_1d(y, tracked, &Formula::True)?;
    let c = coord_name(y);
    let mut out = Vec::new();
    for cell in cells {
        let mut sub_tracked = cell.reps.clone();
        sub_tracked[0] = cell.cond.clone();
        let range = cell.range(y)?;
        for p in rect_rec(&sub_tracked, outer)? {
            let to_coords = |q: &Poly| -> Poly {
                let map = outer.iter().cloned().zip(p.inverse.iter().cloned()).collect();
                q.substitute_all(&map)
            };
            let inv_y = to_coords(&cell.y_of(&Poly::var(&c)));
            let fwd_c = cell.z_of(y);
            let source = Formula::and(vec![p.source.clone(), range.clone()]);
            let mut coords = p.coords.clone();
            coords.push(c.clone());
            let mut forward = p.forward.clone();
            forward.push(fwd_c.clone());
            let mut inverse = p.inverse.clone();
            inverse.push(inv_y.clone());
            let base = Partial {
                source,
                coords,
                unbounded: p.unbounded.clone(),
                forward,
                inverse,
                bounded_part: p.bounded_part.clone(),
                tracked: p.tracked.clone(),
            };
            match &cell.kind {
                CellKind::Up | CellKind::Down => {
                    let mut q = base;
                    q.unbounded.push(true);
                    out.push(q);
                }
                CellKind::Bounded(len) => {
                    let len_c = to_coords(len);
                    let free: Vec<&String> = p
                        .coords
                        .iter()
                        .zip(&p.unbounded)
                        .filter(|(z, u)| **u && len_c.mentions(z))
                        .map(|(z, _)| z)
                        .collect();
                    if free.is_empty() {
                        let mut q = base;
                        q.unbounded.push(false);
                        q.bounded_part = Formula::and(vec![
                            q.bounded_part,
                            Formula::Ge(LinearTerm::var(&c)),
                            poly_ge0(&len_c.sub(&Poly::var(&c)).sub(&Poly::from_int(1)))?,
                        ]);
                        out.push(q);
                    } else {
                        out.extend(cone_fix(base, &c, &len_c, free)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `c` in `[0, a z + d - 1]` with an integer slope `a > 1`. Writing
/// `c = a w + j` and fixing the residue `rho` of `d - 1 - j` modulo `a` leaves
/// `w` in `[0, z + (d - 1 - j - rho)/a]`, which has slope one.
fn slope_split(base: &Partial, c: &str, len: &Poly, z: &str, a: &BigInt) -> Result<Vec<Partial>> {
    let ci = base.coords.len() - 1;
    let fwd_c = base.forward[ci].clone();
    let ar = BigRational::from_integer(a.clone());
    let to_src = base.coords.iter().cloned().zip(base.forward.iter().cloned()).collect();
    let dvd = |p: &Poly| -> Result<Formula> {
        let (t, den) = p.to_linear_scaled()?;
        Ok(Formula::dvd(a * den, t))
    };
    let d = len.sub(&Poly::var(z).scale(&ar));
    let n = a.to_i64().ok_or_else(|| Error::Unsupported(format!("slope {a}")))?;
    let mut out = Vec::new();
    for j in 0..n {
        for rho in 0..n {
            let shift = d.sub(&Poly::from_int(1 + j + rho));
            let mut p = base.clone();
            let cj = fwd_c.sub(&Poly::from_int(j));
            p.forward[ci] = cj.scale(&ar.recip());
            let map = [(c.to_string(), Poly::var(c).scale(&ar).add(&Poly::from_int(j)))].into_iter().collect();
            p.inverse = p.inverse.iter().map(|q| q.substitute_all(&map)).collect();
            p.source = Formula::and(vec![p.source, dvd(&cj)?, dvd(&shift.substitute_all(&to_src))?]);
            p.bounded_part = Formula::and(vec![p.bounded_part, dvd(&shift)?]);
            let len = Poly::var(z).add(&shift.scale(&ar.recip())).add(&Poly::from_int(1));
            out.extend(cone_fix(p, c, &len, vec![&z.to_string()])?);
        }
    }
    Ok(out)
}

/// A bounded coordinate `c` in `[0, z + d - 1]` over an unbounded coordinate `z`:
/// the triangle is split into `[0, d-1] x N` and a copy of `N^2`.
fn cone_fix(base: Partial, c: &str, len: &Poly, free: Vec<&String>) -> Result<Vec<Partial>> {
    if free.len() == 1 && len.is_affine() {
        let a = len.linear_coeff(free[0]);
        if a.is_integer() && a > BigRational::one() {
            return slope_split(&base, c, len, free[0], &a.to_integer());
        }
    }
    if free.len() != 1 || len.linear_coeff(free[0]) != BigRational::one() || !len.is_affine() {
        return Err(Error::Unsupported(format!(
            "bounded coordinate with length {len} depending on unbounded coordinates"
        )));
    }
    let z = free[0].clone();
    let d = len.sub(&Poly::var(&z));
    let zi = base.coords.iter().position(|x| *x == z).unwrap();
    let ci = base.coords.len() - 1;
    let fwd_c = base.forward[ci].clone();
    let fwd_z = base.forward[zi].clone();
    let d_src = d.substitute_all(
        &base.coords.iter().cloned().zip(base.forward.iter().cloned()).collect(),
    );
    let one = Poly::from_int(1);
    let mut out = Vec::new();

    // d >= 1 and c <= d - 1: c bounded, z unchanged
    let mut a = base.clone();
    a.unbounded.push(false);
    a.bounded_part = Formula::and(vec![
        a.bounded_part,
        poly_ge0(&d.sub(&one))?,
        Formula::Ge(LinearTerm::var(c)),
        poly_ge0(&d.sub(&Poly::var(c)).sub(&one))?,
    ]);
    a.source = Formula::and(vec![a.source, poly_ge0(&d_src.sub(&one))?, poly_ge0(&d_src.sub(&fwd_c).sub(&one))?]);
    out.push(a);

    // d >= 1 and c >= d: c = d + v, z = v + 1 + u
    let mut b = base.clone();
    b.unbounded.push(true);
    let map = [
        (c.to_string(), d.add(&Poly::var(c))),
        (z.clone(), Poly::var(c).add(&one).add(&Poly::var(&z))),
    ]
    .into_iter()
    .collect();
    b.inverse = b.inverse.iter().map(|p| p.substitute_all(&map)).collect();
    b.forward[ci] = fwd_c.sub(&d_src);
    b.forward[zi] = fwd_z.sub(&fwd_c).sub(&one).add(&d_src);
    b.bounded_part = Formula::and(vec![b.bounded_part, poly_ge0(&d.sub(&one))?]);
    b.source = Formula::and(vec![b.source, poly_ge0(&d_src.sub(&one))?, poly_ge0(&fwd_c.sub(&d_src))?]);
    out.push(b);

    // d <= 0: z = c + (1 - d) + u, c unbounded
    let mut e = base;
    e.unbounded.push(true);
    let map = [(z.clone(), Poly::var(c).add(&one).sub(&d).add(&Poly::var(&z)))]
        .into_iter()
        .collect();
    e.inverse = e.inverse.iter().map(|p| p.substitute_all(&map)).collect();
    e.forward[zi] = fwd_z.sub(&fwd_c).sub(&one).add(&d_src);
    e.bounded_part = Formula::and(vec![e.bounded_part, poly_ge0(&d.neg())?]);
    e.source = Formula::and(vec![e.source, poly_ge0(&d_src.neg())?]);
    out.push(e);
    Ok(out)
}

/// Iterates over the integer box `lo[i] ..= hi[i]`.
pub(crate) fn for_box(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64]) -> Result<()>) -> Result<()> {
    let n = lo.len();
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return Ok(());
    }
    let mut p = lo.to_vec();
    loop {
        f(&p)?;
        let mut i = 0;
        loop {
            if i == n {
                return Ok(());
            }
            if p[i] < hi[i] {
                p[i] += 1;
                break;
            }
            p[i] = lo[i];
            i += 1;
        }
    }
}

fn env_of(names: &[String], vals: &[i64]) -> crate::presburger::Env {
    names.iter().cloned().zip(vals.iter().map(|v| BigInt::from(*v))).collect()
}

fn integral(r: &BigRational) -> Option<BigInt> {
    r.is_integer().then(|| r.to_integer())
}

/// Checks a rectilinearization of `set` on the box `[-radius, radius]`:
/// the sources partition the set, each forward map lands in its target and is
/// inverted by the inverse map, and every target point (unbounded coordinates
/// up to `radius`) comes from a source point. Returns a description of the
/// first failure.
pub fn check_rectilinearization(
    set: &Formula,
    params: &[String],
    vars: &[String],
    pieces: &[RectilinearPiece],
    radius: i64,
) -> Result<std::result::Result<(), String>> {
    use crate::presburger::evaluate;
    let mut all = params.to_vec();
    all.extend(vars.iter().cloned());
    let set = eliminate_quantifiers(set)?;
    let n = all.len();
    let mut failure = None;
    for_box(&vec![-radius; n], &vec![radius; n], |pt| {
        if failure.is_some() {
            return Ok(());
        }
        let env = env_of(&all, pt);
        let inside = evaluate(&set, &env)?;
        let mut hits = Vec::new();
        for (i, p) in pieces.iter().enumerate() {
            if evaluate(&p.source, &env)? {
                hits.push(i);
            }
        }
        if inside != (hits.len() == 1) || hits.len() > 1 {
            failure = Some(format!("point {pt:?}: in set = {inside}, in pieces {hits:?}"));
            return Ok(());
        }
        if let Some(&i) = hits.first() {
            let p = &pieces[i];
            let mut tenv = env_of(params, &pt[..params.len()]);
            for (c, fw) in p.coords.iter().zip(&p.forward) {
                match integral(&fw.eval_int(&env)?) {
                    Some(v) => {
                        tenv.insert(c.clone(), v);
                    }
                    None => {
                        failure = Some(format!("point {pt:?}: non-integral image in piece {i}"));
                        return Ok(());
                    }
                }
            }
            if !evaluate(&p.target(), &tenv)? {
                failure = Some(format!("point {pt:?}: image outside target of piece {i}"));
                return Ok(());
            }
            for (v, inv) in vars.iter().zip(&p.inverse) {
                if inv.eval_int(&tenv)? != BigRational::from_integer(env[v].clone()) {
                    failure = Some(format!("point {pt:?}: inverse mismatch in piece {i}"));
                    return Ok(());
                }
            }
        }
        Ok(())
    })?;
    if let Some(f) = failure {
        return Ok(Err(f));
    }
    for (i, p) in pieces.iter().enumerate() {
        let mut names = params.to_vec();
        names.extend(p.coords.iter().cloned());
        let mut lo = vec![-radius; params.len()];
        let mut hi = vec![radius; params.len()];
        for u in &p.unbounded {
            lo.push(if *u { 0 } else { -radius });
            hi.push(radius);
        }
        let target = p.target();
        for_box(&lo, &hi, |pt| {
            if failure.is_some() {
                return Ok(());
            }
            let tenv = env_of(&names, pt);
            if !evaluate(&target, &tenv)? {
                return Ok(());
            }
            let mut env = env_of(params, &pt[..params.len()]);
            for (v, inv) in vars.iter().zip(&p.inverse) {
                match integral(&inv.eval_int(&tenv)?) {
                    Some(x) => {
                        env.insert(v.clone(), x);
                    }
                    None => {
                        failure = Some(format!("target point {pt:?} of piece {i}: non-integral preimage"));
                        return Ok(());
                    }
                }
            }
            if !evaluate(&p.source, &env)? {
                failure = Some(format!("target point {pt:?} of piece {i}: preimage outside source"));
            }
            Ok(())
        })?;
    }
    Ok(failure.map_or(Ok(()), Err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn rect(set: &str, params: &[&str], vars: &[&str]) -> Vec<RectilinearPiece> {
        let f: Formula = set.parse().unwrap();
        rectilinearize(&f, &names(params), &names(vars), &[]).unwrap()
    }

    fn check(set: &str, params: &[&str], vars: &[&str], radius: i64) -> Vec<RectilinearPiece> {
        let pieces = rect(set, params, vars);
        let f: Formula = set.parse().unwrap();
        let r = check_rectilinearization(&f, &names(params), &names(vars), &pieces, radius).unwrap();
        assert_eq!(r, Ok(()), "{set}: {:#?}", pieces.iter().map(|p| p.to_string()).collect::<Vec<_>>());
        pieces
    }

    #[test]
    fn bounded_interval() {
        let p = check("0 <= y and y <= s", &["s"], &["y"], 12);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].shape_l(), 0);
    }

    #[test]
    fn half_line() {
        let p = check("y >= s", &["s"], &["y"], 12);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].shape_l(), 1);
        assert_eq!(p[0].forward[0].to_string(), "-s + y");
    }

    #[test]
    fn odd_naturals() {
        let p = check("y mod 2 = 1 and y >= 0", &[], &["y"], 20);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].shape_l(), 1);
        assert_eq!(p[0].forward[0].to_string(), "y/2 - 1/2");
    }

    #[test]
    fn whole_line_and_rationals() {
        let p = check("true", &[], &["y"], 10);
        assert_eq!(p.iter().map(|p| p.shape_l()).sum::<usize>(), 2);
        check("3*y >= s and 2*y <= t", &["s", "t"], &["y"], 7);
        check("y = s or y = 2*s + 1", &["s"], &["y"], 8);
    }

    #[test]
    fn lower_triangle_targets_pull_back() {
        // the cone split with c >= d shifts the unbounded coordinate by one
        let pieces = check("y >= 0 and x >= y", &[], &["x", "y"], 8);
        assert!(pieces.iter().any(|p| p.shape_l() == 2));
        check("x >= s and y >= x and y <= x + s", &["s"], &["x", "y"], 5);
    }

    #[test]
    fn sloped_cones() {
        check("x + y >= 0 and x - y >= 0", &[], &["x", "y"], 9);
        check("0 <= y and y <= 3*x + 1", &[], &["x", "y"], 9);
        check("x >= s and 0 <= y and y <= 2*x - s", &["s"], &["x", "y"], 6);
    }

    #[test]
    fn two_dimensional() {
        check("0 <= x and x <= y", &[], &["x", "y"], 8);
        check("0 <= x and x <= y and y <= s", &["s"], &["x", "y"], 5);
        check("x >= 0 and y >= 0 and x + y mod 3 = 1", &[], &["x", "y"], 8);
        check("y >= x and y <= x + s", &["s"], &["x", "y"], 5);
    }
}
