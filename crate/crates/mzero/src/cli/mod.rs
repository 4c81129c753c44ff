//! Command-line front end: `dual | gamma | separation | certify | refine |
//! thresholds`, with human-readable or JSON output.
//!
//! Exit codes: 0 on success (a negative certificate is a success), 2 for
//! input errors (unreadable files, syntax errors, bad arguments), 3 for
//! numerical-domain errors (for example a point whose Jacobian is not
//! corank one).

pub mod json;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::certify::{
    certify_cluster, normalized_coordinates, separation_bound, CertifyOptions, CoordinatePolicy,
    CERTIFY_NEAR_NORMAL_TOL,
};
use crate::dualspace::{
    compute_dual_basis, DualBasis, DualFunctional, DualOptions, DEFAULT_DELTA_ZERO_TOL, DEFAULT_GAP_TOL,
    DEFAULT_MAX_ORDER,
};
use crate::error::{MzError, Result};
use crate::gamma::{gamma_mu, GammaReport, NORMALIZATION_TOL};
use crate::newton::{iterate_until, threshold_constants, Algorithm, NewtonTrace, Variant};
use crate::numkit::NormRequest;
use crate::polycore::{parse_point, parse_point_lines, parse_system, PolySystem};
use crate::C64;
use json::{complex, complexes, int, num, nums, obj};

/// Top-level arguments.
#[derive(Debug, Parser)]
#[command(name = "mzero", version, about = "Multiplicity structure, separation bounds, cluster certificates and refinement for simple multiple zeros")]
pub struct Cli {
    /// Subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Breadth-one dual basis and multiplicity at a point.
    Dual(DualArgs),
    /// The invariants γ̂_μ, γ_{μ,n} and γ_μ (after normalization).
    Gamma(PointCmdArgs),
    /// Local separation bound d/(2γ_μ^μ).
    Separation(PointCmdArgs),
    /// Certificate that a ball around an approximate zero holds μ zeros.
    Certify(CertifyArgs),
    /// Modified Newton refinement of an approximate multiple zero.
    Refine(RefineArgs),
    /// Convergence thresholds of the modified Newton iterations.
    Thresholds(ThresholdArgs),
}

/// Norm policy for higher-order tensors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Power-method estimate (exact where available).
    Estimate,
    /// Certified Frobenius upper bound (exact where available).
    Certified,
}

impl ModeArg {
    fn request(self) -> NormRequest {
        match self {
            ModeArg::Estimate => NormRequest::Estimate,
            ModeArg::Certified => NormRequest::Certified,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            ModeArg::Estimate => "estimate",
            ModeArg::Certified => "certified",
        }
    }
}

/// Arguments shared by every command that reads a system and a point.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// System file.
    #[arg(long)]
    pub system: PathBuf,
    /// Point as comma-separated complex numbers (`re` or `re+imi`).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "point_file", required_unless_present = "point_file")]
    pub point: Option<String>,
    /// File with one complex coordinate per line.
    #[arg(long)]
    pub point_file: Option<PathBuf>,
    /// Multiplicity; detected from the dual basis when omitted.
    #[arg(long)]
    pub mu: Option<usize>,
    /// Norm policy for tensors of order three and higher.
    #[arg(long, value_enum, default_value_t = ModeArg::Estimate)]
    pub mode: ModeArg,
    /// Relative singular-value gap for the corank-one test.
    #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
    pub gap_tol: f64,
    /// Relative tolerance under which Δ_k counts as zero.
    #[arg(long, default_value_t = DEFAULT_DELTA_ZERO_TOL)]
    pub delta_zero_tol: f64,
    /// Emit JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

/// Arguments of `dual`.
#[derive(Debug, Args)]
pub struct DualArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Largest multiplicity searched.
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    pub max_order: usize,
}

/// Arguments of `gamma` and `separation`.
#[derive(Debug, Args)]
pub struct PointCmdArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

/// Coordinate choice of `certify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CoordArg {
    /// Given coordinates when already close to normalized, else SVD frame.
    Auto,
    /// Always the given coordinates.
    Given,
    /// Always the SVD frame.
    SvdFrame,
}

/// Arguments of `certify`.
#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Coordinates in which the certificate is computed.
    #[arg(long, value_enum, default_value_t = CoordArg::Auto)]
    pub coordinates: CoordArg,
}

/// Iteration choice of `refine`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    /// Self-normalizing iteration (any μ ≥ 2).
    General,
    /// Double-zero iteration for systems already in normalized form.
    Double,
    /// Triple-zero iteration for systems already in normalized form.
    Triple,
}

/// Arguments of `refine`.
#[derive(Debug, Args)]
pub struct RefineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Stop when the step or the residual is at most this.
    #[arg(long, default_value_t = 1e-12)]
    pub eps: f64,
    /// Iteration budget.
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Iteration to run.
    #[arg(long, value_enum, default_value_t = AlgorithmArg::General)]
    pub algorithm: AlgorithmArg,
}

/// Variant names accepted by `thresholds`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum VariantArg {
    /// Double zero, normalized form.
    NormalizedDouble,
    /// Triple zero, normalized form.
    NormalizedTriple,
    /// Triple zero, self-normalizing iteration.
    GeneralTriple,
}

impl VariantArg {
    fn variant(self) -> Variant {
        match self {
            VariantArg::NormalizedDouble => Variant::NormalizedDouble,
            VariantArg::NormalizedTriple => Variant::NormalizedTriple,
            VariantArg::GeneralTriple => Variant::GeneralTriple,
        }
    }
}

/// Arguments of `thresholds`.
#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Variant; all variants when omitted.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Emit JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

/// Output of one command: a JSON document and its text rendering.
struct Report {
    command: &'static str,
    input: Value,
    result: Value,
    tolerances: Value,
    norm_mode: Option<&'static str>,
    duality_residuals: Vec<f64>,
    text: String,
}

impl Report {
    fn to_json(&self) -> Value {
        obj([
            ("command", Value::String(self.command.into())),
            ("input", self.input.clone()),
            ("result", self.result.clone()),
            (
                "diagnostics",
                obj([
                    ("tolerances", self.tolerances.clone()),
                    ("norm_mode", self.norm_mode.map(|s| Value::String(s.into())).unwrap_or(Value::Null)),
                    ("duality_residuals", nums(&self.duality_residuals)),
                ]),
            ),
        ])
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing the report to `out` and errors to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let wants_json = match &cli.command {
        Command::Dual(a) => a.input.json,
        Command::Gamma(a) | Command::Separation(a) => a.input.json,
        Command::Certify(a) => a.input.json,
        Command::Refine(a) => a.input.json,
        Command::Thresholds(a) => a.json,
    };
    let name = command_name(&cli.command);
    let outcome = catch_unwind(AssertUnwindSafe(|| execute(&cli.command)));
    let outcome = match outcome {
        Ok(r) => r,
        Err(_) => Err(MzError::NoConvergence("internal failure while running the command".into())),
    };
    match outcome {
        Ok(rep) => {
            let text = if wants_json { json::render(&rep.to_json()) } else { rep.text };
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let code = e.exit_code();
            if wants_json {
                let doc = obj([
                    ("command", Value::String(name.into())),
                    (
                        "error",
                        obj([
                            ("kind", Value::String(if code == 2 { "input" } else { "numerical" }.into())),
                            ("message", Value::String(e.to_string())),
                            ("exit_code", int(code as usize)),
                        ]),
                    ),
                ]);
                let _ = out.write_all(json::render(&doc).as_bytes());
            }
            let _ = writeln!(err, "error: {e}");
            code
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Dual(_) => "dual",
        Command::Gamma(_) => "gamma",
        Command::Separation(_) => "separation",
        Command::Certify(_) => "certify",
        Command::Refine(_) => "refine",
        Command::Thresholds(_) => "thresholds",
    }
}

fn execute(c: &Command) -> Result<Report> {
    match c {
        Command::Dual(a) => cmd_dual(a),
        Command::Gamma(a) => cmd_gamma(&a.input),
        Command::Separation(a) => cmd_separation(&a.input),
        Command::Certify(a) => cmd_certify(a),
        Command::Refine(a) => cmd_refine(a),
        Command::Thresholds(a) => cmd_thresholds(a),
    }
}

fn read_file(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| MzError::InvalidArgument(format!("cannot read '{}': {e}", p.display())))
}

struct Loaded {
    system: PolySystem,
    point: Vec<C64>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(MzError::InvalidArgument(format!("{name} must be a positive finite number, got {v}")));
    }
    Ok(())
}

fn load(a: &InputArgs) -> Result<Loaded> {
    check_positive("--gap-tol", a.gap_tol)?;
    check_positive("--delta-zero-tol", a.delta_zero_tol)?;
    if let Some(mu) = a.mu {
        if mu < 2 {
            return Err(MzError::InvalidArgument(format!("--mu must be at least 2, got {mu}")));
        }
    }
    let system = parse_system(&read_file(&a.system)?)?;
    let point = match (&a.point, &a.point_file) {
        (Some(p), _) => parse_point(p)?,
        (None, Some(path)) => parse_point_lines(&read_file(path)?)?,
        (None, None) => return Err(MzError::InvalidArgument("a point is required (--point or --point-file)".into())),
    };
    system.check_point(&point)?;
    Ok(Loaded { system, point: point.into_vec() })
}

fn dual_options(a: &InputArgs, max_order: usize) -> DualOptions {
    DualOptions {
        gap_tol: a.gap_tol,
        delta_zero_tol: a.delta_zero_tol,
        max_order,
        mu: a.mu,
        ..DualOptions::default()
    }
}

fn resolve_mu(a: &InputArgs, l: &Loaded) -> Result<(usize, Option<DualBasis>)> {
    match a.mu {
        Some(mu) => Ok((mu, None)),
        None => {
            let basis = compute_dual_basis(&l.system, &l.point, &dual_options(a, DEFAULT_MAX_ORDER))?;
            Ok((basis.mu, Some(basis)))
        }
    }
}

fn input_json(a: &InputArgs, l: &Loaded, extra: Vec<(&'static str, Value)>) -> Value {
    let mut pairs = vec![
        ("system", Value::String(a.system.display().to_string())),
        ("point", complexes(&l.point)),
        ("mu", a.mu.map(int).unwrap_or(Value::Null)),
        ("mode", Value::String(a.mode.as_str().into())),
    ];
    pairs.extend(extra);
    obj(pairs)
}

fn tolerances(a: &InputArgs, eps: Option<f64>, max_iter: Option<usize>) -> Value {
    obj([
        ("gap_tol", num(a.gap_tol)),
        ("delta_zero_tol", num(a.delta_zero_tol)),
        ("eps", eps.map(num).unwrap_or(Value::Null)),
        ("max_iter", max_iter.map(int).unwrap_or(Value::Null)),
    ])
}

fn fmt_c(c: C64) -> String {
    if c.im == 0.0 {
        format!("{:.10e}", c.re)
    } else {
        format!("{:.10e}{:+.10e}i", c.re, c.im)
    }
}

fn fmt_point(p: &[C64]) -> String {
    p.iter().map(|&c| fmt_c(c)).collect::<Vec<_>>().join(", ")
}

fn functional_json(l: &DualFunctional) -> Value {
    let terms: Vec<Value> = l
        .terms()
        .map(|(m, c)| {
            obj([
                ("exponents", Value::Array(m.exps().iter().map(|&e| int(e as usize)).collect())),
                ("coeff", complex(*c)),
            ])
        })
        .collect();
    obj([("order", int(l.order())), ("terms", Value::Array(terms))])
}

fn cmd_dual(a: &DualArgs) -> Result<Report> {
    let l = load(&a.input)?;
    let b = compute_dual_basis(&l.system, &l.point, &dual_options(&a.input, a.max_order))?;
    let mut text = String::new();
    let _ = writeln!(text, "multiplicity: {}", b.mu);
    let _ = writeln!(text, "breadth one: {}", b.breadth_one);
    let _ = writeln!(text, "singular values: {}", b.singular_values.iter().map(|s| format!("{s:.6e}")).collect::<Vec<_>>().join(", "));
    for (k, dv) in b.delta_values.iter().enumerate() {
        let _ = writeln!(text, "Δ_{}(f) = [{}]", k + 1, fmt_point(dv));
    }
    for (k, lam) in b.lambdas.iter().enumerate() {
        let _ = writeln!(text, "Λ_{} = {}", k, lam);
    }
    let _ = writeln!(text, "max duality residual: {:.3e}", b.max_duality_residual());
    let _ = writeln!(text, "closedness residual: {:.3e}", b.closedness_residual);
    let result = obj([
        ("mu", int(b.mu)),
        ("breadth_one", Value::Bool(b.breadth_one)),
        ("singular_values", nums(&b.singular_values)),
        ("corank_gap", num(b.corank_gap)),
        ("pivot", int(b.pivot)),
        ("delta_values", Value::Array(b.delta_values.iter().map(|v| complexes(v)).collect())),
        ("delta_mu", complexes(b.delta_mu_value())),
        ("orth_components", nums(&b.orth_components)),
        ("lambdas", Value::Array(b.lambdas.iter().map(functional_json).collect())),
        ("closedness_residual", num(b.closedness_residual)),
    ]);
    Ok(Report {
        command: "dual",
        input: input_json(&a.input, &l, vec![("max_order", int(a.max_order))]),
        result,
        tolerances: tolerances(&a.input, None, None),
        norm_mode: None,
        duality_residuals: b.duality_residuals.clone(),
        text,
    })
}

fn gamma_json(g: &GammaReport) -> Value {
    let per = |v: &[crate::gamma::OrderValue]| {
        Value::Array(
            v.iter()
                .map(|o| obj([("k", int(o.k)), ("value", num(o.value)), ("mode", Value::String(o.mode.as_str().into()))]))
                .collect(),
        )
    };
    obj([
        ("gamma_hat", num(g.gamma_hat)),
        ("gamma_n", num(g.gamma_n)),
        ("gamma", num(g.gamma)),
        ("hat_dominates", Value::Bool(g.hat_dominates)),
        ("delta_mu", complex(g.delta_mu)),
        ("per_order_hat", per(&g.per_order_hat)),
        ("per_order_n", per(&g.per_order_n)),
    ])
}

fn gamma_text(text: &mut String, g: &GammaReport) {
    let _ = writeln!(text, "γ̂_μ: {:.12e}", g.gamma_hat);
    let _ = writeln!(text, "γ_μ,n: {:.12e}", g.gamma_n);
    let _ = writeln!(text, "γ_μ: {:.12e}", g.gamma);
    let _ = writeln!(text, "Δ_μ(f_n): {}", fmt_c(g.delta_mu));
    let _ = writeln!(text, "norm mode: {}", g.mode.as_str());
}

fn cmd_gamma(a: &InputArgs) -> Result<Report> {
    let l = load(a)?;
    let (mu, basis) = resolve_mu(a, &l)?;
    let nc = normalized_coordinates(&l.system, &l.point, CoordinatePolicy::Auto(NORMALIZATION_TOL))?;
    let g = gamma_mu(&nc.system, &nc.point, mu, a.mode.request())?;
    let mut text = format!("multiplicity: {mu}\ncoordinates: {}\n", nc.kind.as_str());
    gamma_text(&mut text, &g);
    let mut result = gamma_json(&g);
    if let Value::Object(m) = &mut result {
        m.insert("mu".into(), int(mu));
        m.insert("coordinates".into(), Value::String(nc.kind.as_str().into()));
    }
    Ok(Report {
        command: "gamma",
        input: input_json(a, &l, vec![]),
        result,
        tolerances: tolerances(a, None, None),
        norm_mode: Some(g.mode.as_str()),
        duality_residuals: basis.map(|b| b.duality_residuals).unwrap_or_default(),
        text,
    })
}

fn cmd_separation(a: &InputArgs) -> Result<Report> {
    let l = load(a)?;
    let (mu, basis) = resolve_mu(a, &l)?;
    let s = separation_bound(&l.system, &l.point, mu, a.mode.request())?;
    let mut text = format!("multiplicity: {mu}\ncoordinates: {}\n", s.coordinates.as_str());
    let _ = writeln!(text, "d: {:.12e} (d1 {:.6e}, d2 {:.6e}, d3 {:.6e})", s.constant.d, s.constant.d1, s.constant.d2, s.constant.d3);
    gamma_text(&mut text, &s.gamma);
    let _ = writeln!(text, "separation bound: {:.12e}", s.bound);
    let result = obj([
        ("mu", int(mu)),
        ("bound", num(s.bound)),
        (
            "constant",
            obj([
                ("d", num(s.constant.d)),
                ("d1", num(s.constant.d1)),
                ("d2", num(s.constant.d2)),
                ("d3", num(s.constant.d3)),
                ("unanchored", Value::Bool(s.constant.unanchored)),
            ]),
        ),
        ("gamma", gamma_json(&s.gamma)),
        ("coordinates", Value::String(s.coordinates.as_str().into())),
    ]);
    Ok(Report {
        command: "separation",
        input: input_json(a, &l, vec![]),
        result,
        tolerances: tolerances(a, None, None),
        norm_mode: Some(s.gamma.mode.as_str()),
        duality_residuals: basis.map(|b| b.duality_residuals).unwrap_or_default(),
        text,
    })
}

fn cmd_certify(a: &CertifyArgs) -> Result<Report> {
    let inp = &a.input;
    let l = load(inp)?;
    let (mu, basis) = resolve_mu(inp, &l)?;
    let policy = match a.coordinates {
        CoordArg::Auto => CoordinatePolicy::Auto(CERTIFY_NEAR_NORMAL_TOL),
        CoordArg::Given => CoordinatePolicy::Given,
        CoordArg::SvdFrame => CoordinatePolicy::SvdFrame,
    };
    let cert = certify_cluster(&l.system, &l.point, mu, &CertifyOptions { request: inp.mode.request(), policy })?;
    let verdict = if cert.holds { "holds" } else { "not certified" };
    let mut text = format!("multiplicity: {mu}\ncoordinates: {}\n", cert.coordinates.as_str());
    let _ = writeln!(text, "radius: {:.12e}", cert.radius);
    let _ = writeln!(text, "lhs: {:.12e}", cert.lhs);
    let _ = writeln!(text, "rhs: {:.12e}", cert.rhs);
    let _ = writeln!(text, "‖f(x)‖: {:.12e}", cert.residual_norm);
    let _ = writeln!(text, "γ_μ(g): {:.12e} ({})", cert.gamma_on_g.gamma, cert.gamma_on_g.mode.as_str());
    let _ = writeln!(text, "verdict: {verdict}");
    let result = obj([
        ("mu", int(mu)),
        ("center", complexes(&cert.center)),
        ("radius", num(cert.radius)),
        ("lhs", num(cert.lhs)),
        ("rhs", num(cert.rhs)),
        ("holds", Value::Bool(cert.holds)),
        ("verdict", Value::String(verdict.into())),
        ("residual_norm", num(cert.residual_norm)),
        ("h_norms", nums(&cert.h_norms)),
        ("h_deltas", complexes(&cert.h_deltas)),
        ("a_inv_norm", num(cert.a_inv_norm)),
        ("d", num(cert.d)),
        ("gamma", gamma_json(&cert.gamma_on_g)),
        ("coordinates", Value::String(cert.coordinates.as_str().into())),
        ("truncation_residual", num(cert.truncation_residual)),
    ]);
    Ok(Report {
        command: "certify",
        input: input_json(
            inp,
            &l,
            vec![("coordinates", Value::String(a.coordinates.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()))],
        ),
        result,
        tolerances: tolerances(inp, None, None),
        norm_mode: Some(cert.gamma_on_g.mode.as_str()),
        duality_residuals: basis.map(|b| b.duality_residuals).unwrap_or_default(),
        text,
    })
}

fn trace_json(t: &NewtonTrace) -> Value {
    obj([
        ("algorithm", Value::String(t.algorithm.as_str().into())),
        ("mu", int(t.mu)),
        ("iterations", int(t.iterates.len() - 1)),
        ("converged", Value::Bool(t.converged)),
        ("stop_reason", Value::String(t.stop_reason.as_str().into())),
        ("final_point", complexes(t.last())),
        ("iterates", Value::Array(t.iterates.iter().map(|p| complexes(p)).collect())),
        ("residual_norms", nums(&t.residual_norms)),
        ("step_norms", nums(&t.step_norms)),
        (
            "safeguard",
            Value::Array(
                t.safeguard
                    .iter()
                    .map(|s| obj([("jacobian_change", num(s.jacobian_change)), ("gap", num(s.gap)), ("ok", Value::Bool(s.ok))]))
                    .collect(),
            ),
        ),
        (
            "frames",
            Value::Array(t.frames.iter().map(|(u, w)| obj([("u", json::matrix(u)), ("w", json::matrix(w))])).collect()),
        ),
        ("warnings", Value::Array(t.warnings.iter().map(|w| Value::String(w.clone())).collect())),
    ])
}

fn cmd_refine(a: &RefineArgs) -> Result<Report> {
    let inp = &a.input;
    check_positive("--eps", a.eps)?;
    let l = load(inp)?;
    let (algorithm, mu) = match (a.algorithm, inp.mu) {
        (AlgorithmArg::Double, None | Some(2)) => (Algorithm::Double, 2),
        (AlgorithmArg::Triple, None | Some(3)) => (Algorithm::Triple, 3),
        (AlgorithmArg::General, Some(mu)) => (Algorithm::General, mu),
        (AlgorithmArg::General, None) => {
            let mu = resolve_mu(inp, &l).map_err(|e| match e {
                MzError::NotCorankOne { .. } | MzError::MultiplicityCap { .. } => MzError::NoConvergence(format!(
                    "cannot detect the multiplicity at the starting point ({e}); pass --mu"
                )),
                other => other,
            })?;
            (Algorithm::General, mu.0)
        }
        (_, Some(mu)) => {
            return Err(MzError::InvalidArgument(format!("the selected algorithm does not apply to multiplicity {mu}")))
        }
    };
    let sys = Arc::new(l.system.clone());
    let t = iterate_until(&sys, &l.point, mu, algorithm, a.eps, a.max_iter)?;
    let mut text = format!("algorithm: {}\nmultiplicity: {mu}\n", algorithm.as_str());
    for (k, p) in t.iterates.iter().enumerate() {
        let _ = writeln!(text, "{k:>3}  [{}]  ‖f‖ = {:.3e}", fmt_point(p), t.residual_norms[k]);
    }
    let _ = writeln!(text, "converged: {} ({})", t.converged, t.stop_reason.as_str());
    for w in &t.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    Ok(Report {
        command: "refine",
        input: input_json(inp, &l, vec![("algorithm", Value::String(algorithm.as_str().into()))]),
        result: trace_json(&t),
        tolerances: tolerances(inp, Some(a.eps), Some(a.max_iter)),
        norm_mode: None,
        duality_residuals: Vec::new(),
        text,
    })
}

fn cmd_thresholds(a: &ThresholdArgs) -> Result<Report> {
    let variants: Vec<Variant> = match a.variant {
        Some(v) => vec![v.variant()],
        None => Variant::ALL.to_vec(),
    };
    let mut text = String::new();
    let mut rows = Vec::new();
    for v in variants {
        let t = threshold_constants(v)?;
        let _ = writeln!(
            text,
            "{:<18} μ = {}  u(converge) = {:.6}  u(quadratic) = {:.6}",
            v.as_str(),
            t.mu,
            t.u_converge,
            t.u_quadratic
        );
        rows.push(obj([
            ("variant", Value::String(v.as_str().into())),
            ("mu", int(t.mu)),
            ("u_converge", num(t.u_converge)),
            ("u_quadratic", num(t.u_quadratic)),
            ("residual_converge", num(t.residual_converge)),
            ("residual_quadratic", num(t.residual_quadratic)),
        ]));
    }
    Ok(Report {
        command: "thresholds",
        input: obj([("variant", a.variant.map(|v| Value::String(v.variant().as_str().into())).unwrap_or(Value::Null))]),
        result: obj([("thresholds", Value::Array(rows))]),
        tolerances: obj([]),
        norm_mode: None,
        duality_residuals: Vec::new(),
        text,
    })
}
