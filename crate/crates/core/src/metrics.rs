//! Distances between lattice laws and the convergence sweeps built on them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::asymptotics::{self, FractionalDrift};
use crate::distributions::{
    format_sig17, Binomial, Heine, KempBinomial, LatticeLaw, PmfTable, TAIL_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::qcalc::{QBase, ScaledReal};
use crate::solvers;
use crate::sum::CompensatedSum;

/// Distances that differ by less than this are treated as equal when
/// checking that a sweep is settling down.
pub const MONOTONE_NOISE_FLOOR: f64 = 1e-14;

/// Tabulates `law` with uncaptured mass at most `tol`.
pub fn tabulate<L: LatticeLaw + ?Sized>(law: &L, tol: f64) -> Result<PmfTable> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::invalid(format!(
            "truncation tolerance must lie in (0, 1e-6], got {tol}"
        )));
    }
    Ok(law.table(tol))
}

/// Total variation distance over the union of both supports. Mass missing
/// from either table is added as slack, so the result never understates the
/// distance between the untruncated laws.
pub fn tv_distance(a: &PmfTable, b: &PmfTable) -> f64 {
    let lo = a.low().min(b.low());
    let hi = a.high().max(b.high());
    let l1 = (lo..=hi)
        .map(|x| (a.prob(x) - b.prob(x)).abs())
        .collect::<CompensatedSum>()
        .value();
    0.5 * l1 + 0.5 * (a.uncaptured_mass() + b.uncaptured_mass())
}

/// `max_x |F_a(x) − F_b(x)|` over the union of both supports.
pub fn kolmogorov_distance(a: &PmfTable, b: &PmfTable) -> f64 {
    let lo = a.low().min(b.low());
    let hi = a.high().max(b.high());
    let mut fa = CompensatedSum::new();
    let mut fb = CompensatedSum::new();
    let mut worst: f64 = 0.0;
    for x in lo..=hi {
        fa.add(a.prob(x));
        fb.add(b.prob(x));
        worst = worst.max((fa.value() - fb.value()).abs());
    }
    worst
}

/// The growth function `f(n)` of the degenerate scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Growth {
    Sqrt,
    Linear(FractionalDrift),
}

impl Growth {
    pub fn value(&self, n: u64) -> f64 {
        match self {
            Growth::Sqrt => (n as f64).sqrt(),
            Growth::Linear(d) => d.value(n),
        }
    }
}

/// A limit theorem turned into a sequence of distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// `KB(n, λ/[n−λ]_q, q)` against `H((1−q)λ)`.
    PoissonCoupling { lambda: f64 },
    /// `KB(n, θ_n, q)` with `μ_n = μ` against `H(θ(q))`.
    ConstantMean { mu: f64 },
    /// `KB(n, q^{-f(n)}, q)` shifted by `⌊μ_n⌋` against the discrete-normal
    /// limit law; every `n` must give the same `β`.
    Subexponential { drift: FractionalDrift },
    /// `n − X` for `X ~ KB(n, θq^{-n}, q)` against `H(q/θ)`.
    ExponentialReflection { theta: f64 },
    /// `n − X` for `X ~ KB(n, q^{-n-f(n)}, q)` against the point mass at 0.
    Degenerate { growth: Growth },
    /// `KB(trials, θ, 1 − 1/m)` against `B(trials, θ/(1+θ))`; the sweep
    /// index is `m`.
    QToOneBinomial { theta: f64, trials: u64 },
}

/// Scenario names as used on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    PoissonCoupling,
    ConstantMean,
    Subexponential,
    ExponentialReflection,
    Degenerate,
    QToOneBinomial,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::PoissonCoupling,
        ScenarioKind::ConstantMean,
        ScenarioKind::Subexponential,
        ScenarioKind::ExponentialReflection,
        ScenarioKind::Degenerate,
        ScenarioKind::QToOneBinomial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::PoissonCoupling => "poisson-coupling",
            ScenarioKind::ConstantMean => "constant-mean",
            ScenarioKind::Subexponential => "subexponential",
            ScenarioKind::ExponentialReflection => "exponential-reflection",
            ScenarioKind::Degenerate => "degenerate",
            ScenarioKind::QToOneBinomial => "q-to-1-binomial",
        }
    }

    /// Threshold applied to the final distance unless overridden.
    pub fn default_threshold(self) -> f64 {
        match self {
            ScenarioKind::Subexponential => 1e-4,
            ScenarioKind::Degenerate => 1e-5,
            ScenarioKind::QToOneBinomial => 1e-3,
            _ => 1e-6,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scenario `{s}`")))
    }
}

impl Scenario {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            Scenario::PoissonCoupling { .. } => ScenarioKind::PoissonCoupling,
            Scenario::ConstantMean { .. } => ScenarioKind::ConstantMean,
            Scenario::Subexponential { .. } => ScenarioKind::Subexponential,
            Scenario::ExponentialReflection { .. } => ScenarioKind::ExponentialReflection,
            Scenario::Degenerate { .. } => ScenarioKind::Degenerate,
            Scenario::QToOneBinomial { .. } => ScenarioKind::QToOneBinomial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub distance: f64,
    pub aux: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub scenario: ScenarioKind,
    pub threshold: f64,
    pub verdict: Verdict,
    pub rows: Vec<ConvergenceRow>,
}

impl SweepReport {
    pub fn final_distance(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.distance)
    }

    /// Whether the distances over the last half of the rows never increase
    /// by more than [`MONOTONE_NOISE_FLOOR`].
    pub fn tail_nonincreasing(&self) -> bool {
        let half = &self.rows[self.rows.len() / 2..];
        half.windows(2)
            .all(|w| w[1].distance <= w[0].distance + MONOTONE_NOISE_FLOOR)
    }

    /// Column names: `n`, `distance`, the auxiliary keys, then `threshold`
    /// and `verdict`.
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["n".to_string(), "distance".to_string()];
        if let Some(first) = self.rows.first() {
            cols.extend(first.aux.keys().cloned());
        }
        cols.push("threshold".into());
        cols.push("verdict".into());
        cols
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns().join(",");
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![row.n.to_string(), format_sig17(row.distance)];
            fields.extend(row.aux.values().map(|v| format_sig17(*v)));
            fields.push(format_sig17(self.threshold));
            fields.push(self.verdict.to_string());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("SweepReport serializes")
    }
}

fn check_n_list(n_list: &[u64]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::invalid("n_list must not be empty"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("n_list must be strictly increasing"));
    }
    Ok(())
}

/// Runs `scenario` at every `n` in `n_list`. The verdict compares the final
/// distance with `threshold`, or with the scenario's default.
pub fn convergence_sweep(
    scenario: &Scenario,
    q: QBase,
    n_list: &[u64],
    threshold: Option<f64>,
) -> Result<SweepReport> {
    check_n_list(n_list)?;
    let kind = scenario.kind();
    let threshold = threshold.unwrap_or(kind.default_threshold());
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::invalid(format!(
            "threshold must be >= 0, got {threshold}"
        )));
    }
    let rows = match *scenario {
        Scenario::PoissonCoupling { lambda } => poisson_coupling(q, lambda, n_list)?,
        Scenario::ConstantMean { mu } => constant_mean(q, mu, n_list)?,
        Scenario::Subexponential { drift } => subexponential(q, &drift, n_list)?,
        Scenario::ExponentialReflection { theta } => reflection(q, theta, n_list)?,
        Scenario::Degenerate { growth } => degenerate(q, growth, n_list)?,
        Scenario::QToOneBinomial { theta, trials } => q_to_one(theta, trials, n_list)?,
    };
    let last = rows.last().expect("n_list is non-empty").distance;
    Ok(SweepReport {
        scenario: kind,
        threshold,
        verdict: if last <= threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        rows,
    })
}

fn row(n: u64, a: &PmfTable, b: &PmfTable, aux: &[(&str, f64)]) -> ConvergenceRow {
    let mut map: BTreeMap<String, f64> = aux.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    map.insert("kolmogorov".into(), kolmogorov_distance(a, b));
    ConvergenceRow {
        n,
        distance: tv_distance(a, b),
        aux: map,
    }
}

fn poisson_coupling(q: QBase, lambda: f64, n_list: &[u64]) -> Result<Vec<ConvergenceRow>> {
    let target = Heine::new((1.0 - q.value()) * lambda, q)?.table(TAIL_TOLERANCE);
    n_list
        .iter()
        .map(|&n| {
            let theta = solvers::theta_for_poisson(n, q, lambda)?;
            let kb = KempBinomial::new(n, theta, q)?;
            Ok(row(n, &kb.table(), &target, &[("theta", theta)]))
        })
        .collect()
}

fn constant_mean(q: QBase, mu: f64, n_list: &[u64]) -> Result<Vec<ConvergenceRow>> {
    let limit = solvers::theta_limit_for_mean(q, mu)?;
    let target = Heine::new(limit.theta, q)?.table(TAIL_TOLERANCE);
    n_list
        .iter()
        .map(|&n| {
            let solved = solvers::theta_for_mean(n, q, mu)?;
            let kb = KempBinomial::new(n, solved.theta, q)?;
            Ok(row(
                n,
                &kb.table(),
                &target,
                &[
                    ("theta", solved.theta),
                    ("theta_limit", limit.theta),
                    ("residual", solved.residual),
                ],
            ))
        })
        .collect()
}

fn subexponential(
    q: QBase,
    drift: &FractionalDrift,
    n_list: &[u64],
) -> Result<Vec<ConvergenceRow>> {
    let beta = drift.beta(n_list[0]);
    if let Some(&n) = n_list.iter().find(|&&n| drift.beta(n) != beta) {
        return Err(Error::invalid(format!(
            "fractional part changes along n_list (n = {n} gives {} instead of {beta}); \
             pick n in a single residue class",
            drift.beta(n)
        )));
    }
    let law = asymptotics::limit_law(beta, q)?;
    n_list
        .iter()
        .map(|&n| {
            let f = drift.value(n);
            if !(f > 0.0 && f < n as f64) {
                return Err(Error::DriftRange { f, n });
            }
            let kb = drift.kemp(n, q);
            let m = kb.moments();
            let shift = lattice_shift(drift, n, m.mean);
            let centred = kb.table().shifted(shift);
            Ok(row(
                n,
                &centred,
                &law.table,
                &[
                    ("beta", beta),
                    ("mean", m.mean),
                    ("shift", shift as f64),
                    ("sigma", m.variance.sqrt()),
                ],
            ))
        })
        .collect()
}

/// `⌊μ_n⌋`, or for `β = 1/2` the value `f(n) + 1/2` that both branches of
/// the floor/ceiling rule reach.
pub fn lattice_shift(drift: &FractionalDrift, n: u64, mean: f64) -> i64 {
    let (floor, beta) = drift.split(n);
    if beta == 0.5 {
        floor + 1
    } else {
        mean.floor() as i64
    }
}

fn reflection(q: QBase, theta: f64, n_list: &[u64]) -> Result<Vec<ConvergenceRow>> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::invalid(format!("theta must be > 0, got {theta}")));
    }
    let target = Heine::new(q.value() / theta, q)?.table(TAIL_TOLERANCE);
    n_list
        .iter()
        .map(|&n| {
            let scaled = ScaledReal::from_f64(theta, q).scale_q(-(n as i64));
            let kb = KempBinomial::with_scaled_theta(n, scaled)?;
            let reflected = kb.table().reflect(n as i64)?;
            Ok(row(n, &reflected, &target, &[]))
        })
        .collect()
}

fn degenerate(q: QBase, growth: Growth, n_list: &[u64]) -> Result<Vec<ConvergenceRow>> {
    let target = PmfTable::point_mass(0);
    n_list
        .iter()
        .map(|&n| {
            let f = growth.value(n);
            let theta = ScaledReal::q_power(-(n as f64) - f, q);
            let kb = KempBinomial::with_scaled_theta(n, theta)?;
            let reflected = kb.table().reflect(n as i64)?;
            let p0 = reflected.prob(0);
            Ok(row(n, &reflected, &target, &[("f", f), ("p_zero", p0)]))
        })
        .collect()
}

fn q_to_one(theta: f64, trials: u64, m_list: &[u64]) -> Result<Vec<ConvergenceRow>> {
    if m_list[0] < 2 {
        return Err(Error::invalid(
            "q-to-1 sweep needs m >= 2 so that q = 1 - 1/m > 0",
        ));
    }
    let target = Binomial::new(trials, theta / (1.0 + theta))?.table();
    m_list
        .iter()
        .map(|&m| {
            let qv = 1.0 - 1.0 / m as f64;
            let kb = KempBinomial::new(trials, theta, QBase::new(qv)?)?;
            Ok(row(m, &kb.table(), &target, &[("q", qv)]))
        })
        .collect()
}
