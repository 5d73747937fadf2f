//! The `qbinom` command line.
//!
//! Every subcommand produces one table. It is written either as CSV (header
//! row, LF line endings, reals with 17 significant digits) or as a single
//! JSON object `{"meta": {"subcommand", "params", "seed"}, "data": [...]}`
//! whose `data` entries are keyed by the CSV column names.
//!
//! Exit status: 0 on success, 2 for invalid parameters, 1 for numerical or
//! I/O failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::asymptotics::{self, FractionalDrift};
use crate::distributions::{
    format_sig17, Binomial, DiscreteNormal, Heine, InversionSampler, KempBinomial, LatticeLaw,
    Poisson, TAIL_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::metrics::{self, Growth, Scenario, ScenarioKind};
use crate::qcalc::{QBase, ScaledReal};
use crate::solvers;

#[derive(Debug, Parser)]
#[command(
    name = "qbinom",
    version,
    about = "Kemp's q-binomial law, its limit laws and convergence diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Write the document here instead of standard output.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probability table of a law (columns x, p).
    Pmf(LawArgs),
    /// Mean and variance of a law (columns mean, variance).
    Moments(LawArgs),
    /// Seeded random draws (columns draw, x).
    Sample(SampleArgs),
    /// Mean expansion f(n) + c(β, q) against the exact mean.
    Asym(AsymArgs),
    /// Limit law along a constant fractional part β.
    Limit(LimitArgs),
    /// Solve for θ given a target mean (--mu) or Poisson rate (--lambda).
    SolveTheta(SolveArgs),
    /// Run a convergence sweep.
    Converge(ConvergeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    Kb,
    Heine,
    Dnorm,
    Binomial,
    Poisson,
}

#[derive(Debug, Args, Serialize)]
pub struct LawArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    /// Number of trials (kb, binomial).
    #[arg(long)]
    pub n: Option<u64>,
    /// Shape θ (kb, heine); accepts `a*q^b`, e.g. `2*q^-40`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Base q in (0, 1) (kb, heine, dnorm).
    #[arg(long)]
    pub q: Option<f64>,
    /// Location parameter α (dnorm).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Success probability (binomial).
    #[arg(long)]
    pub p: Option<f64>,
    /// Rate (poisson).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Truncation tolerance for infinite supports, in (0, 1e-6].
    #[arg(long, default_value_t = TAIL_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub law: LawArgs,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct AsymArgs {
    #[arg(long)]
    pub q: f64,
    /// Rational slope p/r of f(n) = (p/r) n + offset.
    #[arg(long)]
    pub slope: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub offset: f64,
    /// Comma-separated values and inclusive ranges `a:b` or `a:b:step`.
    #[arg(long)]
    pub n_list: String,
    /// Sine terms; defaults to a q-dependent count.
    #[arg(long)]
    pub terms: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct LimitArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub q: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub q: f64,
    /// Trial count; omit with --mu to solve the n → ∞ limit.
    #[arg(long)]
    pub n: Option<u64>,
    /// Target mean.
    #[arg(long, required_unless_present = "lambda", conflicts_with = "lambda")]
    pub mu: Option<f64>,
    /// Target Poisson rate; needs --n.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthArg {
    Sqrt,
    Linear,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub slope: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    /// Growth of the degenerate scenario: sqrt, or linear via --slope/--offset.
    #[arg(long = "fn", value_enum)]
    #[serde(rename = "fn")]
    pub growth: Option<GrowthArg>,
    /// Trial count of the q-to-1-binomial scenario.
    #[arg(long)]
    pub trials: Option<u64>,
    /// A single n; shorthand for --n-list with one entry.
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<u64>,
    #[arg(long)]
    pub n_list: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

/// A table cell. Reals are written with 17 significant digits in CSV and
/// as shortest round-trip numbers in JSON; both parse to the same `f64`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_sig17(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Real(x) => json!(x),
            Cell::Text(s) => json!(s),
        }
    }
}

/// The output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub subcommand: &'static str,
    pub params: Value,
    pub seed: Option<u64>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Document {
    fn new<P: Serialize>(subcommand: &'static str, params: &P, columns: &[&str]) -> Self {
        Document {
            subcommand,
            params: params_value(params),
            seed: None,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let data: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Cell::json))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "meta": {
                "subcommand": self.subcommand,
                "params": self.params,
                "seed": self.seed,
            },
            "data": data,
        });
        let mut s = serde_json::to_string(&doc).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Serialized arguments with unset options dropped.
fn params_value<P: Serialize>(params: &P) -> Value {
    match serde_json::to_value(params).expect("arguments serialize") {
        Value::Object(map) => {
            Value::Object(map.into_iter().filter(|(_, v)| !v.is_null()).collect())
        }
        other => other,
    }
}

fn base(q: Option<f64>, what: &str) -> Result<QBase> {
    QBase::new(q.ok_or_else(|| Error::invalid(format!("{what} needs --q")))?)
}

fn need<T>(value: Option<T>, flag: &str, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::invalid(format!("{what} needs --{flag}")))
}

/// Rejects flags that the chosen law or scenario does not use.
fn reject_unused(what: &str, flags: &[(&str, bool)]) -> Result<()> {
    let extra: Vec<&str> = flags
        .iter()
        .filter(|(_, set)| *set)
        .map(|(f, _)| *f)
        .collect();
    if extra.is_empty() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} does not take --{}",
            extra.join(", --")
        )))
    }
}

/// Parses θ written as a plain number or as `a*q^b` / `q^b`.
pub fn parse_theta(text: &str, q: QBase) -> Result<ScaledReal> {
    let bad = || {
        Error::invalid(format!(
            "cannot parse theta `{text}`; expected a number or a*q^b"
        ))
    };
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let value = match compact.split_once("q^") {
        Some((prefix, exponent)) => {
            let factor = match prefix.strip_suffix('*').unwrap_or(prefix) {
                "" => 1.0,
                a => a.parse::<f64>().map_err(|_| bad())?,
            };
            let exponent = exponent
                .trim_start_matches('(')
                .trim_end_matches(')')
                .parse::<f64>()
                .map_err(|_| bad())?;
            if !(factor.is_finite() && exponent.is_finite()) {
                return Err(bad());
            }
            ScaledReal::from_f64(factor, q) * ScaledReal::q_power(exponent, q)
        }
        None => {
            let v = compact.parse::<f64>().map_err(|_| bad())?;
            if !v.is_finite() {
                return Err(bad());
            }
            ScaledReal::from_f64(v, q)
        }
    };
    if value.is_negative() {
        return Err(Error::invalid(format!("theta must be >= 0, got `{text}`")));
    }
    Ok(value)
}

/// Parses `10,20,30`, `10:100` or `10:100:10` (inclusive), or mixtures
/// separated by commas.
pub fn parse_n_list(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::invalid(format!("cannot parse n list `{text}`"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim) {
        let fields: Vec<&str> = part.split(':').collect();
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
        match fields.as_slice() {
            [single] => out.push(num(single)?),
            [a, b] | [a, b, _] => {
                let step = if fields.len() == 3 {
                    num(fields[2])?
                } else {
                    1
                };
                let (a, b) = (num(a)?, num(b)?);
                if step == 0 || a > b {
                    return Err(bad());
                }
                out.extend((a..=b).step_by(step as usize));
            }
            _ => return Err(bad()),
        }
    }
    if out.is_empty() || out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!(
            "n list `{text}` must be non-empty and strictly increasing"
        )));
    }
    Ok(out)
}

/// A fully validated law.
enum Law {
    Kemp(KempBinomial),
    Heine(Heine),
    Dnorm(DiscreteNormal),
    Binomial(Binomial),
    Poisson(Poisson),
}

impl Law {
    fn from_args(a: &LawArgs) -> Result<Law> {
        let what = format!("--dist {}", params_value(&a.dist).as_str().unwrap_or("?"));
        Ok(match a.dist {
            Dist::Kb => {
                reject_unused(
                    &what,
                    &[
                        ("alpha", a.alpha.is_some()),
                        ("p", a.p.is_some()),
                        ("lambda", a.lambda.is_some()),
                    ],
                )?;
                let q = base(a.q, &what)?;
                let theta = parse_theta(&need(a.theta.clone(), "theta", &what)?, q)?;
                Law::Kemp(KempBinomial::with_scaled_theta(
                    need(a.n, "n", &what)?,
                    theta,
                )?)
            }
            Dist::Heine => {
                reject_unused(
                    &what,
                    &[
                        ("n", a.n.is_some()),
                        ("alpha", a.alpha.is_some()),
                        ("p", a.p.is_some()),
                        ("lambda", a.lambda.is_some()),
                    ],
                )?;
                let q = base(a.q, &what)?;
                let theta = parse_theta(&need(a.theta.clone(), "theta", &what)?, q)?.to_f64();
                Law::Heine(Heine::new(theta, q)?)
            }
            Dist::Dnorm => {
                reject_unused(
                    &what,
                    &[
                        ("n", a.n.is_some()),
                        ("theta", a.theta.is_some()),
                        ("p", a.p.is_some()),
                        ("lambda", a.lambda.is_some()),
                    ],
                )?;
                let q = base(a.q, &what)?;
                Law::Dnorm(DiscreteNormal::new(need(a.alpha, "alpha", &what)?, q)?)
            }
            Dist::Binomial => {
                reject_unused(
                    &what,
                    &[
                        ("theta", a.theta.is_some()),
                        ("q", a.q.is_some()),
                        ("alpha", a.alpha.is_some()),
                        ("lambda", a.lambda.is_some()),
                    ],
                )?;
                Law::Binomial(Binomial::new(
                    need(a.n, "n", &what)?,
                    need(a.p, "p", &what)?,
                )?)
            }
            Dist::Poisson => {
                reject_unused(
                    &what,
                    &[
                        ("n", a.n.is_some()),
                        ("theta", a.theta.is_some()),
                        ("q", a.q.is_some()),
                        ("alpha", a.alpha.is_some()),
                        ("p", a.p.is_some()),
                    ],
                )?;
                Law::Poisson(Poisson::new(need(a.lambda, "lambda", &what)?)?)
            }
        })
    }

    fn lattice(&self) -> &dyn LatticeLaw {
        match self {
            Law::Kemp(d) => d,
            Law::Heine(d) => d,
            Law::Dnorm(d) => d,
            Law::Binomial(d) => d,
            Law::Poisson(d) => d,
        }
    }
}

fn run_pmf(a: &LawArgs) -> Result<Document> {
    let law = Law::from_args(a)?;
    let table = metrics::tabulate(law.lattice(), a.tol)?;
    let mut doc = Document::new("pmf", a, &["x", "p"]);
    doc.rows = table
        .iter()
        .map(|(x, p)| vec![Cell::Int(x), Cell::Real(p)])
        .collect();
    Ok(doc)
}

fn run_moments(a: &LawArgs) -> Result<Document> {
    let law = Law::from_args(a)?;
    let (mean, variance) = match &law {
        Law::Kemp(d) => {
            let m = d.moments();
            (m.mean, m.variance)
        }
        Law::Heine(d) => (d.mean(), heine_variance(d)),
        other => {
            let t = metrics::tabulate(other.lattice(), a.tol)?;
            (t.mean(), t.variance())
        }
    };
    let mut doc = Document::new("moments", a, &["mean", "variance"]);
    doc.rows.push(vec![Cell::Real(mean), Cell::Real(variance)]);
    Ok(doc)
}

/// `Σ_{i>=0} θq^i / (1 + θq^i)²`, the n → ∞ limit of the KB variance.
fn heine_variance(d: &Heine) -> f64 {
    let q = d.q();
    let mut acc = 0.0;
    let mut i = 0i64;
    loop {
        let t = d.theta() * q.powi(i);
        if t / (1.0 - q.value()) < 1e-17 {
            break;
        }
        acc += t / ((1.0 + t) * (1.0 + t));
        i += 1;
    }
    acc
}

fn run_sample(a: &SampleArgs) -> Result<Document> {
    let law = Law::from_args(&a.law)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut doc = Document::new("sample", a, &["draw", "x"]);
    doc.seed = Some(a.seed);
    let draws: Vec<i64> = match &law {
        Law::Kemp(d) => {
            let s = d.sampler();
            (0..a.count).map(|_| s.sample(&mut rng) as i64).collect()
        }
        other => {
            let table = metrics::tabulate(other.lattice(), a.law.tol)?;
            let s = InversionSampler::new(&table)?;
            (0..a.count).map(|_| s.sample(&mut rng)).collect()
        }
    };
    doc.rows = draws
        .into_iter()
        .enumerate()
        .map(|(i, x)| vec![Cell::Int(i as i64), Cell::Int(x)])
        .collect();
    Ok(doc)
}

fn run_asym(a: &AsymArgs) -> Result<Document> {
    let q = QBase::new(a.q)?;
    let (p, r) = FractionalDrift::parse_slope(&a.slope)?;
    let drift = FractionalDrift::new(p, r, a.offset)?;
    let terms = a.terms.unwrap_or_else(|| asymptotics::default_terms(q));
    let n_list = parse_n_list(&a.n_list)?;
    let mut doc = Document::new(
        "asym",
        a,
        &[
            "n",
            "f",
            "beta",
            "c",
            "estimate",
            "direct",
            "abs_error",
            "error_bound",
            "terms",
        ],
    );
    for n in n_list {
        let m = asymptotics::mean_expansion(n, &drift, q, terms)?;
        let direct = asymptotics::direct_mean(n, &drift, q);
        doc.rows.push(vec![
            Cell::Int(n as i64),
            Cell::Real(m.f_value),
            Cell::Real(m.beta),
            Cell::Real(m.c_value),
            Cell::Real(m.estimate),
            Cell::Real(direct),
            Cell::Real((m.estimate - direct).abs()),
            Cell::Real(m.error_bound),
            Cell::Int(m.terms_used as i64),
        ]);
    }
    Ok(doc)
}

fn run_limit(a: &LimitArgs) -> Result<Document> {
    let q = QBase::new(a.q)?;
    let law = asymptotics::limit_law(a.beta, q)?;
    let mut doc = Document::new(
        "limit",
        a,
        &["x", "p", "location", "alpha", "c", "delta", "sigma"],
    );
    doc.rows = law
        .table
        .iter()
        .map(|(x, p)| {
            vec![
                Cell::Int(x),
                Cell::Real(p),
                Cell::Real(law.location(x)),
                Cell::Real(law.alpha),
                Cell::Real(law.c),
                Cell::Int(law.delta),
                Cell::Real(law.sigma),
            ]
        })
        .collect();
    Ok(doc)
}

fn run_solve(a: &SolveArgs) -> Result<Document> {
    let q = QBase::new(a.q)?;
    if let Some(lambda) = a.lambda {
        let n = need(a.n, "n", "solve-theta --lambda")?;
        let theta = solvers::theta_for_poisson(n, q, lambda)?;
        let mut doc = Document::new("solve-theta", a, &["theta", "success_prob"]);
        doc.rows
            .push(vec![Cell::Real(theta), Cell::Real(theta / (1.0 + theta))]);
        return Ok(doc);
    }
    let mu = need(a.mu, "mu", "solve-theta")?;
    let r = match a.n {
        Some(n) => solvers::theta_for_mean(n, q, mu)?,
        None => solvers::theta_limit_for_mean(q, mu)?,
    };
    let mut doc = Document::new("solve-theta", a, &["theta", "residual", "iterations"]);
    doc.rows.push(vec![
        Cell::Real(r.theta),
        Cell::Real(r.residual),
        Cell::Int(r.iterations as i64),
    ]);
    Ok(doc)
}

fn drift_from(slope: &Option<String>, offset: Option<f64>, what: &str) -> Result<FractionalDrift> {
    let (p, r) = FractionalDrift::parse_slope(&need(slope.clone(), "slope", what)?)?;
    FractionalDrift::new(p, r, offset.unwrap_or(0.0))
}

fn run_converge(a: &ConvergeArgs) -> Result<Document> {
    let kind: ScenarioKind = a.scenario.parse()?;
    let what = format!("scenario {kind}");
    let n_list = match (&a.n_list, a.n) {
        (Some(list), _) => parse_n_list(list)?,
        (None, Some(n)) => vec![n],
        (None, None) => return Err(Error::invalid(format!("{what} needs --n or --n-list"))),
    };
    let used = |flags: &[&str]| {
        let all = [
            ("lambda", a.lambda.is_some()),
            ("mu", a.mu.is_some()),
            ("theta", a.theta.is_some()),
            ("slope", a.slope.is_some()),
            ("offset", a.offset.is_some()),
            ("fn", a.growth.is_some()),
            ("trials", a.trials.is_some()),
        ];
        let extra: Vec<(&str, bool)> = all
            .into_iter()
            .filter(|(f, _)| !flags.contains(f))
            .collect();
        reject_unused(&what, &extra)
    };
    // q-to-1-binomial sweeps q itself, every other scenario fixes it
    let q = if kind == ScenarioKind::QToOneBinomial {
        reject_unused(&what, &[("q", a.q.is_some())])?;
        None
    } else {
        Some(base(a.q, &what)?)
    };
    let scenario = match kind {
        ScenarioKind::PoissonCoupling => {
            used(&["lambda"])?;
            Scenario::PoissonCoupling {
                lambda: need(a.lambda, "lambda", &what)?,
            }
        }
        ScenarioKind::ConstantMean => {
            used(&["mu"])?;
            Scenario::ConstantMean {
                mu: need(a.mu, "mu", &what)?,
            }
        }
        ScenarioKind::Subexponential => {
            used(&["slope", "offset"])?;
            Scenario::Subexponential {
                drift: drift_from(&a.slope, a.offset, &what)?,
            }
        }
        ScenarioKind::ExponentialReflection => {
            used(&["theta"])?;
            Scenario::ExponentialReflection {
                theta: need(a.theta, "theta", &what)?,
            }
        }
        ScenarioKind::Degenerate => {
            used(&["fn", "slope", "offset"])?;
            let growth = match need(a.growth, "fn", &what)? {
                GrowthArg::Sqrt => {
                    reject_unused(
                        &what,
                        &[("slope", a.slope.is_some()), ("offset", a.offset.is_some())],
                    )?;
                    Growth::Sqrt
                }
                GrowthArg::Linear => Growth::Linear(drift_from(&a.slope, a.offset, &what)?),
            };
            Scenario::Degenerate { growth }
        }
        ScenarioKind::QToOneBinomial => {
            used(&["theta", "trials"])?;
            Scenario::QToOneBinomial {
                theta: need(a.theta, "theta", &what)?,
                trials: need(a.trials, "trials", &what)?,
            }
        }
    };
    // the q-to-1 scenario builds its own bases; any valid q serves as a placeholder
    let q = q.unwrap_or(QBase::new(0.5)?);
    let report = metrics::convergence_sweep(&scenario, q, &n_list, a.threshold)?;
    let columns = report.columns();
    let mut doc = Document {
        subcommand: "converge",
        params: params_value(a),
        seed: None,
        columns,
        rows: Vec::new(),
    };
    for row in &report.rows {
        let mut cells = vec![Cell::Int(row.n as i64), Cell::Real(row.distance)];
        cells.extend(row.aux.values().map(|v| Cell::Real(*v)));
        cells.push(Cell::Real(report.threshold));
        cells.push(Cell::Text(report.verdict.to_string()));
        doc.rows.push(cells);
    }
    Ok(doc)
}

/// Runs an already parsed command line and returns the rendered document.
pub fn execute(cli: &Cli) -> Result<String> {
    let doc = match &cli.command {
        Command::Pmf(a) => run_pmf(a)?,
        Command::Moments(a) => run_moments(a)?,
        Command::Sample(a) => run_sample(a)?,
        Command::Asym(a) => run_asym(a)?,
        Command::Limit(a) => run_limit(a)?,
        Command::SolveTheta(a) => run_solve(a)?,
        Command::Converge(a) => run_converge(a)?,
    };
    Ok(doc.render(cli.format))
}

/// Entry point for the binary: parses `args`, writes the document and
/// returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let text = match execute(&cli) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_parameter_error() { 2 } else { 1 };
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write to stdout: {e}")),
    };
    match written {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
