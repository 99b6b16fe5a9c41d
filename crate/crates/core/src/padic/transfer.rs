//! Cross-checks between the `Q_p` and `F_p((t))` backends.

use num_bigint::BigInt;
use serde_json::{json, Value as Json};

use super::numeric::{numeric_integrate, numeric_verdict, BackendKind, LocalFieldBackend, default_class_budget};
use super::{integrate_skeleton, locus_padic, PadicKind, SkeletonIntegrand};
use crate::constructible::{Mode, Value};
use crate::engine::LocusKind;
use crate::error::{Error, Result};
use crate::ring::FixedQ;

/// Tolerance for numeric comparison of oscillatory integrals.
pub const OSCILLATORY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct TransferRecord {
    pub p: u64,
    /// `reduction`, `value`, or a locus kind.
    pub check: String,
    pub s: Vec<i64>,
    pub qp: Json,
    pub fpt: Json,
    /// The symbolic answer at `L = p`, when there is one.
    pub symbolic: Option<Json>,
    pub agree: bool,
}

impl TransferRecord {
    pub fn to_json(&self) -> Json {
        json!({
            "p": self.p,
            "check": self.check,
            "s": self.s,
            "qp": self.qp,
            "fpt": self.fpt,
            "symbolic": self.symbolic,
            "agree": self.agree,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferReport {
    pub family: String,
    pub records: Vec<TransferRecord>,
}

impl TransferReport {
    pub fn agree(&self) -> bool {
        self.records.iter().all(|r| r.agree)
    }

    pub fn counterexamples(&self) -> Vec<&TransferRecord> {
        self.records.iter().filter(|r| !r.agree).collect()
    }

    pub fn to_json(&self) -> Json {
        json!({
            "family": self.family,
            "agree": self.agree(),
            "checked": self.records.len(),
            "counterexamples": self.counterexamples().iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "records": self.records.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        })
    }
}

fn box_points(bx: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for (lo, hi) in bx {
        out = out
            .into_iter()
            .flat_map(|v| {
                (*lo..=*hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn depth_for(f: &SkeletonIntegrand, p: u64) -> u32 {
    let mut k = LocalFieldBackend::default_depth(p);
    if !f.oscillation.is_empty() {
        let m = f.dim().max(1) as u32;
        while k > 1 && (p as f64).powi((k * m) as i32) > default_class_budget() as f64 {
            k -= 1;
        }
    }
    k
}

/// Compares, for every prime and every parameter point of the box, the two
/// backends with each other and with the symbolic answer at `L = p`.
/// Disagreements are returned as records, not errors.
pub fn transfer_check(
    f: &SkeletonIntegrand,
    kinds: &[PadicKind],
    primes: &[u64],
    bx: &[(i64, i64)],
) -> Result<TransferReport> {
    if bx.len() != f.params.len() {
        return Err(Error::ArityMismatch { expected: f.params.len(), got: bx.len() });
    }
    let global: Vec<(PadicKind, LocusKind)> = kinds
        .iter()
        .map(|k| match k {
            PadicKind::Integrability => Ok((*k, LocusKind::Integrability)),
            PadicKind::Boundedness => Ok((*k, LocusKind::Boundedness)),
            PadicKind::Vanishing => Ok((*k, LocusKind::Vanishing)),
            _ => Err(Error::InvalidArgument(format!("no numeric verdict for `{k}`"))),
        })
        .collect::<Result<_>>()?;
    let oscillating = !f.oscillation.is_empty();
    let points = box_points(bx);
    let mut records = Vec::new();
    let (closed, loci) = if oscillating {
        (None, vec![])
    } else {
        let closed = integrate_skeleton(f, &Mode::Formal)?;
        let mut loci = Vec::new();
        for (pk, _) in &global {
            loci.push(locus_padic(f, *pk, &Mode::Formal)?);
        }
        (Some(closed), loci)
    };
    for &p in primes {
        let k = depth_for(f, p);
        let qp = LocalFieldBackend::new(BackendKind::Qp, p, k)?;
        let fpt = LocalFieldBackend::new(BackendKind::Fpt, p, k)?;
        let at_p = Mode::Fixed(FixedQ::from_int(p as i64)?);
        if !oscillating {
            let a = qp.reduce(f)?.to_json();
            let b = fpt.reduce(f)?.to_json();
            let agree = a == b;
            records.push(TransferRecord { p, check: "reduction".into(), s: vec![], qp: a, fpt: b, symbolic: None, agree });
        }
        for s in &points {
            let sb: Vec<BigInt> = s.iter().map(|x| BigInt::from(*x)).collect();
            let vq = numeric_integrate(f, &qp, &sb)?;
            let vf = numeric_integrate(f, &fpt, &sb)?;
            let (symbolic, agree) = match &closed {
                None => (None, (vq.value - vf.value).norm() <= OSCILLATORY_TOL),
                Some(c) => {
                    let valid = c.validity.contains_in(&sb, &at_p)?;
                    let exact = match c.g.evaluate_or_zero(&sb, &at_p)? {
                        Value::Fixed(v) => num_traits::ToPrimitive::to_f64(&v).unwrap_or(f64::NAN),
                        Value::Formal(_) => f64::NAN,
                    };
                    let close = !valid || (vq.value.re - exact).abs() <= vq.error + 1e-9;
                    (Some(json!({ "valid": valid, "value": exact })), vq.value == vf.value && close)
                }
            };
            records.push(TransferRecord {
                p,
                check: "value".into(),
                s: s.clone(),
                qp: vq.to_json(),
                fpt: vf.to_json(),
                symbolic,
                agree,
            });
            if oscillating {
                continue;
            }
            for ((pk, lk), locus) in global.iter().zip(&loci) {
                let a = numeric_verdict(f, &qp, &sb, *lk)?;
                let b = numeric_verdict(f, &fpt, &sb, *lk)?;
                let sym = locus.contains(&sb, &at_p)?;
                records.push(TransferRecord {
                    p,
                    check: pk.short().into(),
                    s: s.clone(),
                    qp: json!(a),
                    fpt: json!(b),
                    symbolic: Some(json!(sym)),
                    agree: a == b && a == sym,
                });
            }
        }
    }
    Ok(TransferReport { family: f.name.clone(), records })
}
