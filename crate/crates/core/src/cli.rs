//! Command-line front end. Every command builds a JSON report; the text
//! format is rendered from the same value.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Map, Value as Json};

use crate::constructible::{parse_pcf, ConstructibleFunction, Mode, Value};
use crate::engine::{compute_locus, interpolate, sum_over_lattice, LocusKind};
use crate::error::{Error, Result};
use crate::padic::{
    integrate_skeleton, locus_padic, numeric_integrate, parse_pint, transfer_check, BackendKind, LocalFieldBackend,
    PadicKind, SkeletonIntegrand,
};
use crate::presburger::{eliminate_quantifiers, evaluate_in_box, parse_formula, Env};
use crate::rectilinear::{check_rectilinearization, rectilinearize};

/// Version of the JSON report layout; bumped with the files under `schemas/`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug, Clone)]
#[command(name = "loci", version, about = "Loci of integrability, boundedness and vanishing for constructible functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    pub json: bool,
    /// Node budget for quantifier elimination (default from LOCI_QE_BUDGET).
    #[arg(long, global = true)]
    pub qe_budget: Option<usize>,
    /// Class budget for numeric p-adic sums (default from LOCI_CLASS_BUDGET).
    #[arg(long, global = true)]
    pub class_budget: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Eliminate quantifiers from a formula file.
    Qe {
        #[arg(long)]
        input: PathBuf,
    },
    /// Partition a set into pieces in affine bijection with fibers of shape finite x N^l.
    Rectilinearize {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated parameter names.
        #[arg(long, default_value = "")]
        params: String,
        /// Comma-separated fiber variable names.
        #[arg(long)]
        vars: String,
        /// Also check the pieces on the box of this radius.
        #[arg(long)]
        check: Option<i64>,
    },
    /// Sum a constructible function over its lattice variables.
    Sum(FnArgs),
    /// Loci of a constructible function.
    Loci {
        #[command(flatten)]
        f: FnArgs,
        #[arg(long, default_value = "all")]
        kind: String,
        /// Parameter box, e.g. `-5..5` or `-3..3,0..2`; lists the members.
        #[arg(long = "box", allow_hyphen_values = true)]
        bx: Option<String>,
    },
    /// A function agreeing with `f` on its integrability locus and integrable everywhere.
    Interpolate(FnArgs),
    /// Integral over O_K^m of a skeleton integrand, symbolic or numeric.
    PadicIntegrate {
        #[command(flatten)]
        f: IntegrandArgs,
        /// Numeric backend; symbolic when absent.
        #[arg(long)]
        backend: Option<BackendKind>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        depth: Option<u32>,
        /// Parameter values, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Loci of a skeleton integrand family.
    PadicLocus {
        #[command(flatten)]
        f: IntegrandArgs,
        #[arg(long, default_value = "int")]
        kind: String,
        #[arg(long = "box", allow_hyphen_values = true)]
        bx: Option<String>,
    },
    /// Compare the Q_p and F_p((t)) backends with each other and with the symbolic answer.
    Transfer {
        #[command(flatten)]
        f: IntegrandArgs,
        #[arg(long, default_value = "int")]
        kind: String,
        #[arg(long, default_value = "2,3")]
        primes: String,
        #[arg(long = "box", default_value = "-3..3", allow_hyphen_values = true)]
        bx: String,
    },
    /// Check every function or integrand of a file against brute-force oracles.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "box", default_value = "-3..3", allow_hyphen_values = true)]
        bx: String,
        #[arg(long, default_value = "2,3")]
        primes: String,
    },
}

#[derive(Args, Debug, Clone)]
pub struct FnArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Function name inside the file; the first one by default.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = "formal")]
    pub mode: Mode,
    /// Parameter values at which to evaluate the result, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct IntegrandArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = "formal")]
    pub mode: Mode,
}

/// A finished command: exit status and report.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: i32,
    pub report: Json,
}

/// Runs a parsed command line. Errors map to status 1, counterexamples from
/// `transfer` and `verify` to status 2.
pub fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.common.qe_budget {
        std::env::set_var("LOCI_QE_BUDGET", n.to_string());
    }
    if let Some(n) = cli.common.class_budget {
        std::env::set_var("LOCI_CLASS_BUDGET", n.to_string());
    }
    match dispatch(&cli.command) {
        Ok((report, ok)) => Outcome { status: if ok { 0 } else { 2 }, report },
        Err(e) => Outcome {
            status: 1,
            report: json!({ "command": command_name(&cli.command), "error": e.to_string() }),
        },
    }
}

/// Renders a report in the requested format, newline-terminated.
pub fn render(report: &Json, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(report).expect("serializable")),
        Format::Text => {
            let mut out = String::new();
            text(report, 0, &mut out);
            out
        }
    }
}

fn text(v: &Json, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Json::Object(m) => {
            for (k, x) in m {
                match x {
                    Json::Object(_) | Json::Array(_) if !is_flat(x) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        text(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar_text(x))),
                }
            }
        }
        Json::Array(xs) => {
            for x in xs {
                if is_flat(x) {
                    out.push_str(&format!("{pad}- {}\n", scalar_text(x)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    text(x, indent + 1, out);
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar_text(v))),
    }
}

fn is_flat(v: &Json) -> bool {
    match v {
        Json::Object(m) => m.is_empty(),
        Json::Array(xs) => xs.iter().all(|x| !matches!(x, Json::Object(_) | Json::Array(_))),
        _ => true,
    }
}

fn scalar_text(v: &Json) -> String {
    match v {
        Json::String(s) if s.contains('\n') => format!("|\n{}", s.trim_end()),
        Json::String(s) => s.clone(),
        Json::Array(xs) => format!("[{}]", xs.iter().map(scalar_text).collect::<Vec<_>>().join(", ")),
        Json::Object(_) => "{}".into(),
        x => x.to_string(),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Qe { .. } => "qe",
        Command::Rectilinearize { .. } => "rectilinearize",
        Command::Sum(_) => "sum",
        Command::Loci { .. } => "loci",
        Command::Interpolate(_) => "interpolate",
        Command::PadicIntegrate { .. } => "padic-integrate",
        Command::PadicLocus { .. } => "padic-locus",
        Command::Transfer { .. } => "transfer",
        Command::Verify { .. } => "verify",
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Prefixes parse diagnostics with the file name.
fn located<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Syntax { line, col, msg } => Error::Syntax { line, col, msg: format!("{}: {msg}", path.display()) },
        e => e,
    })
}

fn names(list: &str) -> Vec<String> {
    list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn int_list(list: &str) -> Result<Vec<i64>> {
    names(list)
        .iter()
        .map(|s| s.parse().map_err(|_| Error::InvalidArgument(format!("not an integer: `{s}`"))))
        .collect()
}

/// `lo..hi` for every parameter, or one range per parameter separated by commas.
pub fn parse_box(spec: &str, arity: usize) -> Result<Vec<(i64, i64)>> {
    let ranges: Vec<(i64, i64)> = names(spec)
        .iter()
        .map(|r| {
            let (lo, hi) = r
                .split_once("..")
                .ok_or_else(|| Error::InvalidArgument(format!("expected `lo..hi`, got `{r}`")))?;
            let lo: i64 = lo.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad bound in `{r}`")))?;
            let hi: i64 = hi.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad bound in `{r}`")))?;
            if lo > hi {
                return Err(Error::InvalidArgument(format!("empty range `{r}`")));
            }
            Ok((lo, hi))
        })
        .collect::<Result<_>>()?;
    match ranges.len() {
        1 => Ok(vec![ranges[0]; arity]),
        n if n == arity => Ok(ranges),
        n => Err(Error::ArityMismatch { expected: arity, got: n }),
    }
}

fn box_points(bx: &[(i64, i64)]) -> Vec<Vec<BigInt>> {
    let mut out = vec![vec![]];
    for (lo, hi) in bx {
        let mut next = Vec::new();
        for p in &out {
            for x in *lo..=*hi {
                let mut q: Vec<BigInt> = p.clone();
                q.push(BigInt::from(x));
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn select_function(path: &Path, name: &Option<String>) -> Result<(String, ConstructibleFunction)> {
    let mut fs = located(path, parse_pcf(&read(path)?))?;
    match name {
        None if !fs.is_empty() => Ok(fs.remove(0)),
        None => Err(Error::InvalidArgument(format!("{}: no function", path.display()))),
        Some(n) => fs
            .into_iter()
            .find(|(m, _)| m == n)
            .ok_or_else(|| Error::InvalidArgument(format!("{}: no function `{n}`", path.display()))),
    }
}

fn select_integrand(a: &IntegrandArgs) -> Result<SkeletonIntegrand> {
    let mut fs = located(&a.input, parse_pint(&read(&a.input)?))?;
    match &a.name {
        None if !fs.is_empty() => Ok(fs.remove(0)),
        None => Err(Error::InvalidArgument(format!("{}: no integrand", a.input.display()))),
        Some(n) => fs
            .into_iter()
            .find(|f| &f.name == n)
            .ok_or_else(|| Error::InvalidArgument(format!("{}: no integrand `{n}`", a.input.display()))),
    }
}

fn kinds(spec: &str) -> Result<Vec<LocusKind>> {
    if spec == "all" {
        return Ok(LocusKind::ALL.to_vec());
    }
    names(spec).iter().map(|s| s.parse()).collect()
}

fn padic_kinds(spec: &str) -> Result<Vec<PadicKind>> {
    if spec == "all" {
        return Ok(vec![PadicKind::Integrability, PadicKind::Boundedness, PadicKind::Vanishing]);
    }
    names(spec).iter().map(|s| s.parse()).collect()
}

fn value_text(v: &Value) -> String {
    v.to_string()
}

/// `"all"` when the witness vanishes identically, otherwise its text.
fn zero_set_text(w: &ConstructibleFunction) -> Result<String> {
    let everywhere = w.terms.iter().all(|t| t.coeff.is_zero())
        || w
            .terms
            .iter()
            .map(|t| crate::presburger::is_satisfiable(&t.guard))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|s| !s);
    Ok(if everywhere { "all".into() } else { format!("zeros of {}", w.to_pcf("h").trim_end()) })
}

fn envelope(command: &str, body: Json) -> Json {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    if let Json::Object(b) = body {
        m.extend(b);
    }
    Json::Object(m)
}

fn at_point(at: &Option<String>, arity: usize) -> Result<Option<Vec<BigInt>>> {
    match at {
        None if arity == 0 => Ok(Some(vec![])),
        None => Ok(None),
        Some(s) => {
            let v = int_list(s)?;
            if v.len() != arity {
                return Err(Error::ArityMismatch { expected: arity, got: v.len() });
            }
            Ok(Some(v.into_iter().map(BigInt::from).collect()))
        }
    }
}

fn dispatch(c: &Command) -> Result<(Json, bool)> {
    match c {
        Command::Qe { input } => {
            let f = located(input, parse_formula(&read(input)?))?;
            let g = eliminate_quantifiers(&f)?;
            Ok((
                envelope("qe", json!({ "input": f.to_string(), "output": g.to_string(), "free_vars": g.free_vars() })),
                true,
            ))
        }
        Command::Rectilinearize { input, params, vars, check } => {
            let set = located(input, parse_formula(&read(input)?))?;
            let (params, vars) = (names(params), names(vars));
            let pieces = rectilinearize(&set, &params, &vars, &[])?;
            let mut body = json!({
                "params": params,
                "vars": vars,
                "pieces": pieces.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
            });
            let mut ok = true;
            if let Some(r) = check {
                let verdict = check_rectilinearization(&set, &params, &vars, &pieces, *r)?;
                ok = verdict.is_ok();
                body["check"] = json!({ "radius": r, "ok": ok, "failure": verdict.err() });
            }
            Ok((envelope("rectilinearize", body), ok))
        }
        Command::Sum(a) => {
            let (name, f) = select_function(&a.input, &a.name)?;
            let r = sum_over_lattice(&f, &a.mode)?;
            let mut body = json!({
                "function": name,
                "mode": a.mode.to_string(),
                "g": r.g.to_json(),
                "g_text": r.g.to_pcf("g"),
                "validity": zero_set_text(&r.validity.witness)?,
                "validity_witness": r.validity.to_json(),
            });
            if let Some(s) = at_point(&a.at, f.params.len())? {
                body["value"] = json!(value_text(&r.g.evaluate_or_zero(&s, &a.mode)?));
                body["valid_at"] = json!(r.validity.contains_in(&s, &a.mode)?);
            }
            Ok((envelope("sum", body), true))
        }
        Command::Loci { f: a, kind, bx } => {
            let (name, f) = select_function(&a.input, &a.name)?;
            let points = match bx {
                Some(b) => Some(box_points(&parse_box(b, f.params.len())?)),
                None => None,
            };
            let mut loci = Vec::new();
            for k in kinds(kind)? {
                let l = compute_locus(&f, k, &a.mode)?;
                let mut j = l.to_json();
                j["zero_set"] = json!(zero_set_text(&l.witness)?);
                if let Some(ps) = &points {
                    let mut members = Vec::new();
                    for s in ps {
                        if l.contains(s)? {
                            members.push(s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
                        }
                    }
                    j["members"] = json!(members);
                }
                loci.push(j);
            }
            Ok((envelope("loci", json!({ "function": name, "mode": a.mode.to_string(), "loci": loci })), true))
        }
        Command::Interpolate(a) => {
            let (name, f) = select_function(&a.input, &a.name)?;
            let g = interpolate(&f, &a.mode)?;
            Ok((
                envelope(
                    "interpolate",
                    json!({ "function": name, "mode": a.mode.to_string(), "interpolant": g.to_json(), "interpolant_text": g.to_pcf(&format!("{name}_int")) }),
                ),
                true,
            ))
        }
        Command::PadicIntegrate { f: a, backend, p, depth, at } => {
            let f = select_integrand(a)?;
            let s = at_point(at, f.params.len())?;
            let body = match backend {
                Some(kind) => {
                    let p = p.ok_or_else(|| Error::InvalidArgument("numeric integration needs --p".into()))?;
                    let b = LocalFieldBackend::new(*kind, p, depth.unwrap_or_else(|| LocalFieldBackend::default_depth(p)))?;
                    let s = s.ok_or_else(|| Error::InvalidArgument("numeric integration needs --at".into()))?;
                    let v = numeric_integrate(&f, &b, &s)?;
                    json!({
                        "integrand": f.name,
                        "backend": kind.to_string(),
                        "p": p,
                        "depth": b.depth,
                        "at": s.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        "numeric": v.to_json(),
                    })
                }
                None => {
                    let r = integrate_skeleton(&f, &a.mode)?;
                    let mut body = json!({
                        "integrand": f.name,
                        "mode": a.mode.to_string(),
                        "g": r.g.to_json(),
                        "g_text": r.g.to_pcf("g"),
                        "validity": zero_set_text(&r.validity.witness)?,
                    });
                    if let Some(s) = s {
                        body["value"] = json!(value_text(&r.g.evaluate_or_zero(&s, &a.mode)?));
                    }
                    body
                }
            };
            Ok((envelope("padic-integrate", body), true))
        }
        Command::PadicLocus { f: a, kind, bx } => {
            let f = select_integrand(a)?;
            let mut loci = Vec::new();
            for k in padic_kinds(kind)? {
                let l = locus_padic(&f, k, &a.mode)?;
                let mut j = l.to_json();
                j["zero_set"] = json!(zero_set_text(&l.locus.witness)?);
                if let Some(b) = bx {
                    let mut members = Vec::new();
                    for s in box_points(&parse_box(b, f.params.len())?) {
                        if l.locus.contains(&s)? {
                            members.push(s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
                        }
                    }
                    j["members"] = json!(members);
                }
                loci.push(j);
            }
            Ok((envelope("padic-locus", json!({ "integrand": f.name, "mode": a.mode.to_string(), "loci": loci })), true))
        }
        Command::Transfer { f: a, kind, primes, bx } => {
            let f = select_integrand(a)?;
            let primes: Vec<u64> = int_list(primes)?.into_iter().map(|p| p as u64).collect();
            let report = transfer_check(&f, &padic_kinds(kind)?, &primes, &parse_box(bx, f.params.len())?)?;
            let ok = report.agree();
            Ok((envelope("transfer", report.to_json()), ok))
        }
        Command::Verify { input, bx, primes } => verify(input, bx, primes),
    }
}

fn verify(input: &Path, bx: &str, primes: &str) -> Result<(Json, bool)> {
    let ext = input.extension().and_then(|e| e.to_str()).unwrap_or("");
    let text = read(input)?;
    let mut checked = 0usize;
    let mut bad: Vec<Json> = Vec::new();
    match ext {
        "pint" => {
            let primes: Vec<u64> = int_list(primes)?.into_iter().map(|p| p as u64).collect();
            for f in located(input, parse_pint(&text))? {
                let ks = if f.oscillation.is_empty() {
                    vec![PadicKind::Integrability, PadicKind::Boundedness, PadicKind::Vanishing]
                } else {
                    vec![]
                };
                let report = transfer_check(&f, &ks, &primes, &parse_box(bx, f.params.len())?)?;
                checked += report.records.len();
                bad.extend(report.counterexamples().into_iter().map(|r| {
                    let mut j = r.to_json();
                    j["integrand"] = json!(f.name);
                    j
                }));
            }
        }
        "pcf" => {
            for (name, f) in located(input, parse_pcf(&text))? {
                for (check, s, detail) in oracle::check_function(&f, &parse_box(bx, f.params.len())?)? {
                    checked += 1;
                    if let Some(d) = detail {
                        bad.push(json!({ "function": name, "check": check, "s": s, "detail": d }));
                    }
                }
            }
        }
        _ => {
            let f = located(input, parse_formula(&text))?;
            let g = eliminate_quantifiers(&f)?;
            let free = f.free_vars();
            let r = parse_box(bx, 1)?[0];
            let radius = r.0.abs().max(r.1.abs());
            for pt in box_points(&vec![r; free.len()]) {
                let env: Env = free.iter().cloned().zip(pt.iter().cloned()).collect();
                let a = evaluate_in_box(&f, &env, 2 * radius + 8)?;
                let b = crate::presburger::evaluate(&g, &env)?;
                checked += 1;
                if a != b {
                    bad.push(json!({
                        "check": "qe",
                        "point": pt.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        "input": a,
                        "output": b,
                    }));
                }
            }
        }
    }
    let ok = bad.is_empty();
    Ok((
        envelope(
            "verify",
            json!({ "input": input.display().to_string(), "checked": checked, "ok": ok, "counterexamples": bad }),
        ),
        ok,
    ))
}

mod oracle {
    //! Truncated floating-point checks of loci and sums at `q = 2`.

    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde_json::{json, Value as Json};

    use crate::constructible::{ConstructibleFunction, Mode, Value};
    use crate::engine::{compute_locus, sum_over_lattice, LocusKind};
    use crate::error::Result;
    use crate::ring::FixedQ;

    const Q: f64 = 2.0;

    fn radius(m: usize) -> i64 {
        match m {
            0 => 0,
            1 => 80,
            2 => 24,
            _ => 8,
        }
    }

    /// `|f|` on the shells `|y| <= R/2` and `R/2 < |y| <= R`.
    fn shells(f: &ConstructibleFunction, s: &[BigInt]) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = f.vars.len();
        let r = radius(m);
        let (mut inner, mut outer) = (Vec::new(), Vec::new());
        let mut y = vec![-r; m];
        loop {
            let pt: Vec<BigInt> = s.iter().cloned().chain(y.iter().map(|x| BigInt::from(*x))).collect();
            let v = f.evaluate_scalar(&pt, &Q)?.abs();
            if y.iter().all(|x| 2 * x.abs() <= r) {
                inner.push(v);
            } else {
                outer.push(v);
            }
            let mut i = 0;
            loop {
                if i == m {
                    return Ok((inner, outer));
                }
                if y[i] < r {
                    y[i] += 1;
                    break;
                }
                y[i] = -r;
                i += 1;
            }
        }
    }

    fn max(v: &[f64]) -> f64 {
        v.iter().cloned().fold(0.0, f64::max)
    }

    type Check = (String, Vec<i64>, Option<Json>);

    /// Every locus verdict and every convergent sum on the box, compared with
    /// the truncations. A `Some` detail marks a disagreement.
    pub(super) fn check_function(f: &ConstructibleFunction, bx: &[(i64, i64)]) -> Result<Vec<Check>> {
        let mode = Mode::Fixed(FixedQ::from_int(2)?);
        let loci: Vec<_> = LocusKind::ALL.iter().map(|k| compute_locus(f, *k, &Mode::Formal)).collect::<Result<_>>()?;
        let sum = sum_over_lattice(f, &Mode::Formal)?;
        let mut out = Vec::new();
        for s in super::box_points(bx) {
            let (inner, outer) = shells(f, &s)?;
            let total: f64 = inner.iter().sum::<f64>() + outer.iter().sum::<f64>();
            let tail: f64 = outer.iter().sum();
            let oracle = [
                tail <= 1e-6 * total.max(1.0),
                max(&outer) <= max(&inner) * (1.0 + 1e-9),
                total == 0.0,
            ];
            let label: Vec<i64> = s.iter().map(|x| x.to_i64().unwrap_or(i64::MAX)).collect();
            for (l, want) in loci.iter().zip(oracle) {
                let got = l.contains_in(&s, &mode)?;
                let detail = (got != want).then(|| json!({ "symbolic": got, "oracle": want }));
                out.push((l.kind.short().to_string(), label.clone(), detail));
            }
            if sum.validity.contains_in(&s, &mode)? {
                let g = match sum.g.evaluate_or_zero(&s, &mode)? {
                    Value::Fixed(v) => v.to_f64().unwrap_or(f64::NAN),
                    Value::Formal(_) => f64::NAN,
                };
                let partial = partial_sum(f, &s)?;
                let ok = (g - partial).abs() <= 1e-6 * g.abs().max(1.0);
                out.push(("sum".into(), label, (!ok).then(|| json!({ "closed_form": g, "partial": partial }))));
            }
        }
        Ok(out)
    }

    fn partial_sum(f: &ConstructibleFunction, s: &[BigInt]) -> Result<f64> {
        let m = f.vars.len();
        let r = radius(m);
        let mut acc = 0.0;
        let mut y = vec![-r; m];
        loop {
            let pt: Vec<BigInt> = s.iter().cloned().chain(y.iter().map(|x| BigInt::from(*x))).collect();
            acc += f.evaluate_scalar(&pt, &Q)?;
            let mut i = 0;
            loop {
                if i == m {
                    return Ok(acc);
                }
                if y[i] < r {
                    y[i] += 1;
                    break;
                }
                y[i] = -r;
                i += 1;
            }
        }
    }
}

/// Parses arguments, runs, prints, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let format = if cli.common.json { Format::Json } else { cli.common.format };
    let out = run(&cli);
    if out.status == 1 {
        if let Some(msg) = out.report.get("error").and_then(|m| m.as_str()) {
            eprintln!("error: {msg}");
        }
    }
    print!("{}", render(&out.report, format));
    out.status
}
