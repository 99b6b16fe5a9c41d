//! Integrals over `O_K^m` of functions that factor through the valuation
//! skeleton, for `K = Q_p` or `F_p((t))`.
//!
//! A cell fixes, per coordinate, either `x_i = 0` or `ord x_i = r_i` with an
//! optional angular-component constraint; a Presburger condition ties the
//! `r_i` to the parameters. On a cell the integrand is `F(s, r)`, possibly
//! plus oscillatory terms `g(s, r) * psi(c * prod x_j^e_j)`. Integrals and
//! loci reduce to lattice sums of `F(s, r) * vol(r)` over the skeleton.

pub mod fourier;
pub mod numeric;
mod parse;
pub mod transfer;

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value as Json};

use crate::constructible::{ConstructibleFunction, Mode, Term};
use crate::engine::{compute_locus, eventually_zero, iva_terms, sum_over_lattice, LocusKind, LocusResult, SumResult};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::presburger::{simplify, Formula, LinearTerm};
use crate::ring::AElement;

pub use fourier::{fourier_finite, fourier_inverse, witness_max_coeff};
pub use numeric::{numeric_integrate, numeric_verdict, BackendKind, LocalFieldBackend, NumericIntegral};
pub use parse::parse_pint;
pub use transfer::{transfer_check, TransferRecord, TransferReport};

/// Constraint on the angular component of a coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AcConstraint {
    /// No constraint.
    Any,
    /// `ac_m(x)` is a unit modulo `p^m`; always true for `x != 0`.
    Units { depth: u32 },
    /// The first nonzero digit lies in the list (depth 1).
    Digits(Vec<i64>),
}

impl AcConstraint {
    /// Whether the first nonzero digit `d` is allowed.
    pub fn allows(&self, d: u64, p: u64) -> bool {
        match self {
            AcConstraint::Digits(ds) => ds.iter().any(|x| x.rem_euclid(p as i64) as u64 == d),
            _ => true,
        }
    }

    /// Digit lists must be distinct nonzero residues for `p`, so that the
    /// volume count does not depend on the prime.
    pub fn validate(&self, p: u64) -> Result<()> {
        if let AcConstraint::Digits(ds) = self {
            let mut seen = Vec::new();
            for d in ds {
                let r = d.rem_euclid(p as i64);
                if r == 0 || seen.contains(&r) {
                    return Err(Error::InvalidArgument(format!(
                        "angular digits {ds:?} are not distinct units modulo {p}"
                    )));
                }
                seen.push(r);
            }
            if ds.is_empty() {
                return Err(Error::InvalidArgument("empty angular digit list".into()));
            }
        }
        Ok(())
    }

    fn compatible(&self, o: &AcConstraint) -> bool {
        match (self, o) {
            (AcConstraint::Digits(a), AcConstraint::Digits(b)) => a.iter().any(|x| b.contains(x)),
            _ => true,
        }
    }

    fn to_text(&self) -> String {
        match self {
            AcConstraint::Any => String::new(),
            AcConstraint::Units { depth } => format!(" ac depth {depth}"),
            AcConstraint::Digits(ds) => {
                format!(" ac in {{{}}}", ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoordSpec {
    Zero,
    Ord(AcConstraint),
}

/// A cell centered at the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonCell {
    pub coords: Vec<CoordSpec>,
    /// Condition on the parameters and the valuations of the `Ord` coordinates.
    pub condition: Formula,
}

impl SkeletonCell {
    pub fn has_zero_center(&self) -> bool {
        self.coords.iter().any(|c| *c == CoordSpec::Zero)
    }

    /// The skeleton as a subset of `params x Z^m`; zero-center coordinates
    /// are identified with `r_i = 0`.
    pub fn skeleton(&self, rvars: &[String]) -> Formula {
        let mut parts = vec![self.condition.clone()];
        for (c, r) in self.coords.iter().zip(rvars) {
            parts.push(match c {
                CoordSpec::Zero => Formula::Eq(LinearTerm::var(r)),
                CoordSpec::Ord(_) => Formula::Ge(LinearTerm::var(r)),
            });
        }
        simplify(&Formula::and(parts))
    }
}

/// `g(s, r) * psi(unit * p^p_exp * prod x_j^exps_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phase {
    pub unit: i64,
    pub p_exp: i64,
    pub exps: Vec<u32>,
    pub coeff: ConstructibleFunction,
}

impl Phase {
    pub fn monomial_text(&self) -> String {
        let mut s = format!("{} * p^{}", self.unit, self.p_exp);
        for (j, e) in self.exps.iter().enumerate() {
            if *e > 0 {
                s.push_str(&format!(" * x{}^{e}", j + 1));
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonIntegrand {
    pub name: String,
    pub params: Vec<String>,
    /// One valuation variable per coordinate.
    pub rvars: Vec<String>,
    pub cells: Vec<SkeletonCell>,
    /// `F(s, r)`, a function of the parameters and valuations.
    pub amplitude: ConstructibleFunction,
    pub oscillation: Vec<Phase>,
}

/// Kinds of loci for skeleton integrands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PadicKind {
    Integrability,
    Boundedness,
    Vanishing,
    LocalIntegrability,
    LocalBoundedness,
}

impl PadicKind {
    pub fn short(&self) -> &'static str {
        match self {
            PadicKind::Integrability => "int",
            PadicKind::Boundedness => "bdd",
            PadicKind::Vanishing => "iva",
            PadicKind::LocalIntegrability => "locint",
            PadicKind::LocalBoundedness => "locbdd",
        }
    }
}

impl fmt::Display for PadicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for PadicKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "int" | "integrability" => Ok(PadicKind::Integrability),
            "bdd" | "boundedness" => Ok(PadicKind::Boundedness),
            "iva" | "vanishing" => Ok(PadicKind::Vanishing),
            "locint" | "local-integrability" => Ok(PadicKind::LocalIntegrability),
            "locbdd" | "local-boundedness" => Ok(PadicKind::LocalBoundedness),
            _ => Err(Error::InvalidArgument(format!("unknown locus kind `{s}`"))),
        }
    }
}

/// A locus over the parameters of a skeleton integrand.
#[derive(Clone, Debug)]
pub struct PadicLocus {
    pub kind: PadicKind,
    pub locus: LocusResult,
}

impl PadicLocus {
    pub fn contains(&self, s: &[num_bigint::BigInt], mode: &Mode) -> Result<bool> {
        self.locus.contains_in(s, mode)
    }

    pub fn to_json(&self) -> Json {
        let mut j = self.locus.to_json();
        j["kind"] = json!(self.kind.short());
        j
    }
}

/// Volume of a fiber of the skeleton map over `r`.
#[derive(Clone, Debug)]
pub struct FiberVolume {
    pub volume: ConstructibleFunction,
    /// Set when a zero-center coordinate makes every fiber a null set.
    pub zero: bool,
}

fn coord_volume(ac: &AcConstraint, r: &str) -> Term {
    match ac {
        AcConstraint::Digits(ds) => Term::new(AElement::from_int(ds.len() as i64))
            .with_exponent(Poly::var(r).neg().sub(&Poly::from_int(1))),
        _ => Term::new(&AElement::one() - &AElement::l_pow(-1)).with_exponent(Poly::var(r).neg()),
    }
}

/// `vol{x in cell : ord x = r}` as a function of the parameters and `r`.
pub fn fiber_volume(cell: &SkeletonCell, params: &[String], rvars: &[String]) -> Result<FiberVolume> {
    if cell.coords.len() != rvars.len() {
        return Err(Error::ArityMismatch { expected: rvars.len(), got: cell.coords.len() });
    }
    let domain = cell.skeleton(rvars);
    let zero = cell.has_zero_center();
    let terms = if zero {
        vec![]
    } else {
        let mut t = Term::new(AElement::one());
        for (c, r) in cell.coords.iter().zip(rvars) {
            if let CoordSpec::Ord(ac) = c {
                t = t.mul(&coord_volume(ac, r));
            }
        }
        t.guard = Formula::True;
        vec![t]
    };
    let volume = ConstructibleFunction::new(params.to_vec(), rvars.to_vec(), domain, terms)?.normalized();
    Ok(FiberVolume { volume, zero })
}

impl SkeletonIntegrand {
    pub fn dim(&self) -> usize {
        self.rvars.len()
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.cells {
            if c.coords.len() != self.rvars.len() {
                return Err(Error::ArityMismatch { expected: self.rvars.len(), got: c.coords.len() });
            }
        }
        for ph in &self.oscillation {
            if ph.exps.len() != self.rvars.len() {
                return Err(Error::ArityMismatch { expected: self.rvars.len(), got: ph.exps.len() });
            }
        }
        Ok(())
    }

    /// Checks that the angular constraints make sense for the prime `p`.
    pub fn validate_for(&self, p: u64) -> Result<()> {
        for c in &self.cells {
            for s in &c.coords {
                if let CoordSpec::Ord(ac) = s {
                    ac.validate(p)?;
                }
            }
        }
        Ok(())
    }

    fn union_of_skeletons(&self, positive_only: bool) -> Formula {
        Formula::or(
            self.cells
                .iter()
                .filter(|c| !(positive_only && c.has_zero_center()))
                .map(|c| c.skeleton(&self.rvars))
                .collect(),
        )
    }

    /// The lattice function `F(s, r) * vol(r)` summed over cells; its lattice
    /// sum is the integral. Independent of the local field.
    pub fn reduction(&self) -> Result<ConstructibleFunction> {
        if !self.oscillation.is_empty() {
            return Err(Error::Unsupported("symbolic reduction of oscillatory integrands".into()));
        }
        let mut terms = Vec::new();
        for cell in self.cells.iter().filter(|c| !c.has_zero_center()) {
            let vol = fiber_volume(cell, &self.params, &self.rvars)?;
            let guard = cell.skeleton(&self.rvars);
            for t in &self.amplitude.terms {
                for v in &vol.volume.terms {
                    let mut prod = t.mul(v);
                    prod.guard = Formula::and(vec![prod.guard, guard.clone()]);
                    terms.push(prod);
                }
            }
        }
        Ok(ConstructibleFunction::new(
            self.params.clone(),
            self.rvars.clone(),
            simplify(&Formula::and(vec![self.amplitude.domain.clone(), self.union_of_skeletons(true)])),
            terms,
        )?
        .normalized())
    }

    /// `F` on the union of all skeletons: the values taken by the integrand.
    fn values(&self) -> Result<ConstructibleFunction> {
        if !self.oscillation.is_empty() {
            return Err(Error::Unsupported("symbolic loci of oscillatory integrands".into()));
        }
        Ok(ConstructibleFunction {
            domain: simplify(&Formula::and(vec![self.amplitude.domain.clone(), self.union_of_skeletons(false)])),
            ..self.amplitude.clone()
        })
    }

    /// Replaces every phase `h` by `-h`; numeric values become complex conjugates.
    pub fn conjugate_oscillation(&self) -> SkeletonIntegrand {
        let mut out = self.clone();
        for ph in &mut out.oscillation {
            ph.unit = -ph.unit;
        }
        out
    }

    pub fn to_json(&self) -> Json {
        json!({
            "name": self.name,
            "params": self.params,
            "rvars": self.rvars,
            "text": self.to_pint(),
        })
    }

    pub fn to_pint(&self) -> String {
        let mut s = format!("integrand {}({} ; {}) {{\n", self.name, self.params.join(", "), self.rvars.join(", "));
        for c in &self.cells {
            let specs: Vec<String> = c
                .coords
                .iter()
                .map(|k| match k {
                    CoordSpec::Zero => "zero".to_string(),
                    CoordSpec::Ord(ac) => format!("ord{}", ac.to_text()),
                })
                .collect();
            s.push_str(&format!("  cell ({})", specs.join(", ")));
            if c.condition != Formula::True {
                s.push_str(&format!(" where {}", c.condition));
            }
            s.push_str(";\n");
        }
        if self.amplitude.domain != Formula::True {
            s.push_str(&format!("  domain {};\n", self.amplitude.domain));
        }
        for t in &self.amplitude.terms {
            s.push_str(&format!("  amplitude {};\n", term_fields(t)));
        }
        for ph in &self.oscillation {
            for t in &ph.coeff.terms {
                s.push_str(&format!("  phase {} : {};\n", ph.monomial_text(), term_fields(t)));
            }
        }
        s.push_str("}\n");
        s
    }
}

fn term_fields(t: &Term) -> String {
    let s = t.to_text();
    s.strip_prefix("term ").unwrap_or(&s).to_string()
}

/// `integral_{O_K^m} f(s, x) |dx|` as a constructible function of `s`, valid on
/// the integrability locus.
pub fn integrate_skeleton(f: &SkeletonIntegrand, mode: &Mode) -> Result<SumResult> {
    sum_over_lattice(&f.reduction()?, mode)
}

/// The locus of `kind` of the family `f` over its parameters.
pub fn locus_padic(f: &SkeletonIntegrand, kind: PadicKind, mode: &Mode) -> Result<PadicLocus> {
    let locus = match kind {
        PadicKind::Integrability => compute_locus(&f.reduction()?, LocusKind::Integrability, mode)?,
        PadicKind::Boundedness => compute_locus(&f.values()?, LocusKind::Boundedness, mode)?,
        PadicKind::Vanishing => compute_locus(&f.values()?, LocusKind::Vanishing, mode)?,
        PadicKind::LocalIntegrability => local_locus(f, LocusKind::Integrability, mode)?,
        PadicKind::LocalBoundedness => local_locus(f, LocusKind::Boundedness, mode)?,
    };
    Ok(PadicLocus { kind, locus })
}

const N: &str = "_N";

/// Off the coordinate hyperplanes a skeleton-factored function is locally
/// constant, so only points of zero-center cells matter. Near such a point
/// with zero set `Z`, the neighbourhoods are `{r_Z >= N}` with the other
/// valuations fixed; the function is locally integrable (bounded) there iff
/// it is integrable (bounded) on that region for all large `N`.
fn local_locus(f: &SkeletonIntegrand, kind: LocusKind, mode: &Mode) -> Result<LocusResult> {
    if !f.oscillation.is_empty() {
        return Err(Error::Unsupported("local loci of oscillatory integrands".into()));
    }
    let mut out = Vec::new();
    for c0 in f.cells.iter().filter(|c| c.has_zero_center()) {
        let zset: Vec<usize> = (0..f.dim()).filter(|i| c0.coords[*i] == CoordSpec::Zero).collect();
        let rz: Vec<String> = zset.iter().map(|i| f.rvars[*i].clone()).collect();
        let tvars: Vec<String> = f.rvars.iter().filter(|r| !rz.contains(r)).cloned().collect();
        let mut params2 = f.params.clone();
        params2.extend(tvars.iter().cloned());
        params2.push(N.to_string());
        let mut terms = Vec::new();
        let mut doms = Vec::new();
        for c in &f.cells {
            let ok = c.coords.iter().enumerate().all(|(i, spec)| match (spec, &c0.coords[i]) {
                (CoordSpec::Zero, _) => false,
                (CoordSpec::Ord(_), CoordSpec::Zero) => true,
                (CoordSpec::Ord(a), CoordSpec::Ord(b)) => a.compatible(b),
            });
            if !ok {
                continue;
            }
            let mut parts = vec![c.skeleton(&f.rvars)];
            for r in &rz {
                parts.push(Formula::ge(LinearTerm::var(r), LinearTerm::var(N)));
            }
            let guard = Formula::and(parts);
            let mut vol = Term::new(AElement::one());
            if kind == LocusKind::Integrability {
                for i in &zset {
                    if let CoordSpec::Ord(ac) = &c.coords[*i] {
                        vol = vol.mul(&coord_volume(ac, &f.rvars[*i]));
                    }
                }
            }
            for t in &f.amplitude.terms {
                let mut prod = t.mul(&vol);
                prod.guard = Formula::and(vec![prod.guard, guard.clone()]);
                terms.push(prod);
            }
            doms.push(guard);
        }
        if terms.is_empty() {
            continue;
        }
        let domain = Formula::and(vec![f.amplitude.domain.clone(), Formula::or(doms)]);
        let g = ConstructibleFunction::new(params2, rz.clone(), domain, terms)?.normalized();
        let h1 = compute_locus(&g, kind, &Mode::Formal)?;
        let h2 = eventually_zero(&h1.witness.terms, &Formula::True, N)?;
        let mut dom_t = c0.skeleton(&f.rvars);
        for r in &rz {
            dom_t = simplify(&dom_t.substitute(r, &LinearTerm::constant(0)));
        }
        out.extend(iva_terms(&h2, &dom_t, &tvars)?);
    }
    let witness = ConstructibleFunction::new(f.params.clone(), vec![], Formula::True, out)?
        .normalized()
        .pruned(mode);
    Ok(LocusResult { kind, witness, mode: mode.clone() })
}
