//! The `cohest` command line: cost sweeps, dense simulations, polynomial
//! dumps and invariant checks.

mod verify;

pub use verify::{run_suites, CheckResult, SUITES};

use crate::costs::{self, CostOptions, Figure, SweepGrid};
use crate::error::{Error, Result};
use crate::estimators::{
    self, floor_estimate, gen_instance, EstimationReport, EstimatorOptions, EtaRule, InstanceKind,
    RoundingPromiseInstance,
};
use crate::numerics::{random_unitary, CMatrix};
use crate::polynomials::{
    amplifying_poly, jacobi_anger_cos, jacobi_anger_sin, ChebyshevSeries, RealPolynomial,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest total Hilbert-space dimension `simulate` accepts.
pub const MAX_SIM_DIMENSION: usize = 1 << 12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cohest", version, about = "Coherent phase and energy estimation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Query-cost sweep as CSV.
    Costs(CostsArgs),
    /// Dense simulation of one estimator, reported as JSON.
    Simulate(SimulateArgs),
    /// Polynomial approximation report as CSV.
    Poly(PolyArgs),
    /// Run invariant suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EtaChoice {
    Linear,
    Exact,
}

impl From<EtaChoice> for EtaRule {
    fn from(e: EtaChoice) -> Self {
        match e {
            EtaChoice::Linear => EtaRule::Linear,
            EtaChoice::Exact => EtaRule::Exact,
        }
    }
}

#[derive(Args, Debug)]
pub struct CostsArgs {
    /// Comma-separated register sizes.
    #[arg(long, default_value = "10")]
    pub n: String,
    /// Comma-separated α values.
    #[arg(long, default_value = "0.0009765625")]
    pub alpha: String,
    /// Comma-separated δ values.
    #[arg(long, default_value = "1e-30")]
    pub delta: String,
    /// Comma-separated algorithms.
    #[arg(long, default_value = "textbook_pe,improved_pe,textbook_ee,improved_ee")]
    pub alg: String,
    /// Preset grid; overrides --n, --alpha, --delta and --alg.
    #[arg(long)]
    pub figure: Option<String>,
    #[arg(long, default_value_t = 3.0)]
    pub m_cos: f64,
    #[arg(long, default_value_t = 3.0)]
    pub m_svt: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub eta_rule: EtaChoice,
    /// Count improved phase estimation with phases removed.
    #[arg(long)]
    pub uncompute_pe: bool,
    /// Recorded in the output; costs are deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimAlgorithm {
    #[value(name = "textbook_pe")]
    TextbookPe,
    #[value(name = "improved_pe")]
    ImprovedPe,
    #[value(name = "improved_ee")]
    ImprovedEe,
    #[value(name = "amplitude")]
    Amplitude,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "improved_pe")]
    pub alg: SimAlgorithm,
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 3.0)]
    pub m_cos: f64,
    #[arg(long, default_value_t = 3.0)]
    pub m_svt: f64,
    #[arg(long, value_enum, default_value = "linear")]
    pub eta_rule: EtaChoice,
    /// Remove phases of improved phase estimation.
    #[arg(long)]
    pub uncompute: bool,
    /// Move the first eigenvalue into a gap of the rounding promise.
    #[arg(long)]
    pub no_promise: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolyKind {
    Amp,
    Cos,
    Sin,
}

#[derive(Args, Debug)]
pub struct PolyArgs {
    #[arg(long, value_enum, default_value = "amp")]
    pub kind: PolyKind,
    /// Gap half-width of the amplifying polynomial.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Error of the amplifying polynomial.
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    /// Evolution time of the Jacobi-Anger approximants.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub t: f64,
    /// Error of the Jacobi-Anger approximants.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    /// Emit `index,coefficient` instead of the grid report.
    #[arg(long)]
    pub coeffs: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Run only this suite.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub tolerance_scale: f64,
}

/// Subcommand plus the parameters echoed into every artifact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub params: BTreeMap<String, String>,
}

impl RunConfig {
    fn new(sub: &str, pairs: &[(&str, String)]) -> Self {
        RunConfig {
            subcommand: sub.to_string(),
            params: pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    fn comment_lines(&self) -> String {
        let mut s = format!("# cohest {VERSION}\n# subcommand: {}\n", self.subcommand);
        for (k, v) in &self.params {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }
}

/// Parses `args` (including the program name) and runs the command. Output
/// without `--out` goes to `stdout`; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Costs(a) => run_costs(&a, stdout),
        Command::Simulate(a) => run_simulate(&a, stdout),
        Command::Poly(a) => run_poly(&a, stdout),
        Command::Verify(a) => run_verify(&a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
    }
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, contents: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => Ok(stdout.write_all(contents.as_bytes())?),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse '{t}' in --{what}")))
        })
        .collect()
}

pub fn run_costs(a: &CostsArgs, stdout: &mut dyn Write) -> Result<i32> {
    let opts = CostOptions {
        eta_rule: a.eta_rule.into(),
        m_svt: a.m_svt,
        m_cos: a.m_cos,
        uncompute_pe: a.uncompute_pe,
        ..CostOptions::default()
    };
    let points = match &a.figure {
        Some(f) => costs::figure_points(f.parse::<Figure>()?),
        None => SweepGrid {
            n: parse_list(&a.n, "n")?,
            alpha: parse_list(&a.alpha, "alpha")?,
            delta: parse_list(&a.delta, "delta")?,
            algorithms: parse_list(&a.alg, "alg")?,
        }
        .points(),
    };
    let rows = costs::sweep_points(&points, &opts)?;
    let cfg = RunConfig::new(
        "costs",
        &[
            ("figure", a.figure.clone().unwrap_or_default()),
            ("n", a.n.clone()),
            ("alpha", a.alpha.clone()),
            ("delta", a.delta.clone()),
            ("alg", a.alg.clone()),
            ("m_cos", a.m_cos.to_string()),
            ("m_svt", a.m_svt.to_string()),
            ("eta_rule", a.eta_rule.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()),
            ("uncompute_pe", a.uncompute_pe.to_string()),
            ("seed", a.seed.to_string()),
        ],
    );
    let mut text = cfg.comment_lines();
    text.push_str(&costs::to_csv(&rows));
    emit(&a.out, &text, stdout)?;
    Ok(EXIT_OK)
}

fn sim_dimension(alg: SimAlgorithm, n: u32, dim: usize) -> Option<usize> {
    let reg = 1usize.checked_shl(n)?;
    let factor = match alg {
        SimAlgorithm::TextbookPe | SimAlgorithm::ImprovedPe => 1,
        SimAlgorithm::ImprovedEe | SimAlgorithm::Amplitude => 2,
    };
    reg.checked_mul(dim)?.checked_mul(factor)
}

fn gap_value(lambda: f64, n: u32, alpha: f64) -> f64 {
    let scale = (1u64 << n) as f64;
    (floor_estimate(lambda, n) as f64 + alpha / 2.0) / scale
}

fn random_projector_reflection(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let u = random_unitary(dim, rng);
    let signs: Vec<f64> = (0..dim).map(|i| if i < rank { 1.0 } else { -1.0 }).collect();
    let r = &(&u * &CMatrix::diag_real(&signs)) * &u.adjoint();
    r.hermitian_part()
}

pub fn run_simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let total = sim_dimension(a.alg, a.n, a.dim).unwrap_or(usize::MAX);
    if a.dim == 0 {
        return Err(Error::InvalidInput("--dim must be positive".into()));
    }
    if total > MAX_SIM_DIMENSION {
        return Err(Error::Budget(format!(
            "total dimension {total} exceeds the dense-simulation limit {MAX_SIM_DIMENSION}; reduce --n or --dim"
        )));
    }
    let opts = EstimatorOptions {
        eta_rule: a.eta_rule.into(),
        m_svt: a.m_svt,
        m_cos: a.m_cos,
        uncompute: a.uncompute,
    };
    let cfg = RunConfig::new(
        "simulate",
        &[
            ("alg", a.alg.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()),
            ("n", a.n.to_string()),
            ("alpha", a.alpha.to_string()),
            ("delta", a.delta.to_string()),
            ("dim", a.dim.to_string()),
            ("seed", a.seed.to_string()),
            ("m_cos", a.m_cos.to_string()),
            ("m_svt", a.m_svt.to_string()),
            ("eta_rule", a.eta_rule.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()),
            ("uncompute", a.uncompute.to_string()),
            ("no_promise", a.no_promise.to_string()),
        ],
    );
    let threshold = 1.0 - a.delta;
    let mut extra = serde_json::Map::new();
    let report: EstimationReport = match a.alg {
        SimAlgorithm::Amplitude => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let r_pi = random_projector_reflection(a.dim, a.dim / 2, &mut rng);
            let psi = random_unitary(a.dim, &mut rng).column(0);
            let r_psi = (&psi.projector().scale_real(2.0) - &CMatrix::identity(a.dim)).hermitian_part();
            let (ch, mut rep) =
                estimators::amplitude_estimate(&r_pi, &r_psi, &psi, a.n, a.delta, &opts)?;
            let a2 = estimators::amplitude_squared(&r_pi, &psi);
            let dist = estimators::estimate_distribution(&ch, a.n, &psi)?;
            extra.insert("amplitude_squared".into(), json!(a2));
            extra.insert("estimate_distribution".into(), json!(dist));
            rep.seed = Some(a.seed);
            rep
        }
        alg => {
            let kind = if alg == SimAlgorithm::ImprovedEe {
                InstanceKind::Hamiltonian
            } else {
                InstanceKind::Unitary
            };
            let mut inst = gen_instance(a.n, a.alpha, a.dim, a.seed, kind)?;
            if a.no_promise {
                let lam = gap_value(inst.eigenvalues()[0], a.n, a.alpha);
                inst = inst.with_eigenvalue(0, lam)?;
            }
            let (ch, rep) = match alg {
                SimAlgorithm::TextbookPe => estimators::textbook_pe(&inst, a.delta)?,
                SimAlgorithm::ImprovedPe => estimators::improved_pe(&inst, a.delta, &opts)?,
                _ => estimators::improved_ee(&inst, a.delta, &opts)?,
            };
            if a.no_promise {
                extra.insert("no_promise".into(), no_promise_summary(&ch, &inst)?);
            }
            extra.insert("eigenvalues".into(), json!(inst.eigenvalues()));
            rep
        }
    };
    let pass = if let Some(np) = extra.get("no_promise") {
        let mass = np["support_mass"].as_f64().unwrap_or(0.0);
        mass >= threshold && report.per_eigenstate_success.iter().skip(1).all(|&p| p >= threshold)
    } else {
        report.per_eigenstate_success.iter().all(|&p| p >= threshold)
    };
    let mut doc = serde_json::to_value(&report)?;
    if let Value::Object(m) = &mut doc {
        m.insert("tool".into(), json!("cohest"));
        m.insert("version".into(), json!(VERSION));
        m.insert("config".into(), serde_json::to_value(&cfg)?);
        m.insert("threshold".into(), json!(threshold));
        m.insert("pass".into(), json!(pass));
        m.extend(extra);
    }
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(&a.out, &text, stdout)?;
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn no_promise_summary(
    ch: &crate::blockenc::QuantumChannel,
    inst: &RoundingPromiseInstance,
) -> Result<Value> {
    let n = inst.n_bits();
    let lam = inst.eigenvalues()[0];
    let reg = 1usize << n;
    let m = floor_estimate(lam, n);
    let below = (m + reg - 1) % reg;
    let dist = estimators::estimate_distribution(ch, n, &inst.eigenstate(0))?;
    Ok(json!({
        "lambda": lam,
        "support": [m, below],
        "support_mass": dist[m] + dist[below],
        "distribution": dist,
    }))
}

fn poly_grid(
    p: &dyn RealPolynomial,
    lo: f64,
    hi: f64,
    points: usize,
    target: impl Fn(f64) -> Option<f64>,
) -> (String, f64) {
    let mut s = String::from("x,target,approx,abs_err\n");
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let x = if points == 1 { lo } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
        let y = p.eval(x);
        match target(x) {
            Some(t) => {
                let err = (t - y).abs();
                worst = worst.max(err);
                let _ = writeln!(s, "{x:e},{t:e},{y:e},{err:e}");
            }
            None => {
                let _ = writeln!(s, "{x:e},,{y:e},");
            }
        }
    }
    (s, worst)
}

fn coeff_csv(c: &ChebyshevSeries) -> String {
    let mut s = String::from("index,coefficient\n");
    for (i, v) in c.coeffs().iter().enumerate() {
        let _ = writeln!(s, "{i},{v:e}");
    }
    s
}

pub fn run_poly(a: &PolyArgs, stdout: &mut dyn Write) -> Result<i32> {
    if a.points == 0 {
        return Err(Error::InvalidInput("--points must be positive".into()));
    }
    let (series, lo, hi, label): (ChebyshevSeries, f64, f64, String) = match a.kind {
        PolyKind::Amp => {
            let (p, b) = amplifying_poly(a.eta, a.delta)?;
            (p, 0.0, 1.0, format!("amplifying eta={} delta={} k={:.4}", a.eta, a.delta, b.k_param))
        }
        PolyKind::Cos => (jacobi_anger_cos(a.t, a.eps)?, -1.0, 1.0, format!("cos t={} eps={}", a.t, a.eps)),
        PolyKind::Sin => (jacobi_anger_sin(a.t, a.eps)?, -1.0, 1.0, format!("sin t={} eps={}", a.t, a.eps)),
    };
    let (eta, t) = (a.eta, a.t);
    let body = if a.coeffs {
        (coeff_csv(&series), None)
    } else {
        let (csv, worst) = match a.kind {
            PolyKind::Amp => poly_grid(&series, lo, hi, a.points, |x| {
                if x <= 0.5 - eta {
                    Some(1.0)
                } else if x >= 0.5 + eta {
                    Some(0.0)
                } else {
                    None
                }
            }),
            PolyKind::Cos => poly_grid(&series, lo, hi, a.points, |x| Some((t * x).cos())),
            PolyKind::Sin => poly_grid(&series, lo, hi, a.points, |x| Some((t * x).sin())),
        };
        (csv, Some(worst))
    };
    let cfg = RunConfig::new(
        "poly",
        &[
            ("kind", a.kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()),
            ("eta", a.eta.to_string()),
            ("delta", a.delta.to_string()),
            ("t", a.t.to_string()),
            ("eps", a.eps.to_string()),
            ("points", a.points.to_string()),
            ("coeffs", a.coeffs.to_string()),
        ],
    );
    let mut text = cfg.comment_lines();
    let _ = writeln!(text, "# polynomial: {label} (degree {})", series.degree());
    if let Some(w) = body.1 {
        let _ = writeln!(text, "# max_abs_err: {w:e}");
    }
    text.push_str(&body.0);
    emit(&a.out, &text, stdout)?;
    Ok(EXIT_OK)
}

pub fn run_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let suites: Vec<&str> = match &a.suite {
        Some(s) => {
            if !SUITES.contains(&s.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "unknown suite '{s}'; available: {}",
                    SUITES.join(", ")
                )));
            }
            vec![s.as_str()]
        }
        None => SUITES.to_vec(),
    };
    let results = run_suites(&suites, a.seed, a.tolerance_scale);
    let mut text = format!("# cohest {VERSION} verify seed={} tolerance_scale={}\n", a.seed, a.tolerance_scale);
    let mut failed = 0;
    for r in &results {
        if !r.passed {
            failed += 1;
        }
        let _ = writeln!(
            text,
            "{} {}::{} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.name,
            r.detail
        );
    }
    let _ = writeln!(text, "summary: {} checks, {} failed", results.len(), failed);
    stdout.write_all(text.as_bytes())?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY_FAILED })
}
