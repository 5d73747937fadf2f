//! Mean asymptotics for `θ_n = q^{-f(n)}` and the discrete-normal limit laws
//! along subsequences with constant fractional part `β = {f(n)}`.
//!
//! The periodic constant `c(β, q)` is available in two forms: the direct
//! two-series expression ([`c_direct`]) and the rapidly converging sine series
//! ([`c_fourier`]). They agree to rounding for every `q` in `(0, 1)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::distributions::{KempBinomial, PmfTable};
use crate::error::{Error, Result};
use crate::qcalc::{self, QBase, ScaledReal, TAIL_EPS};
use crate::sum::CompensatedSum;

/// Two values closer than this are treated as the same case boundary.
const SNAP: f64 = 1e-12;

/// `f(n) = (p/r)·n + offset` with `0 < p/r < 1`.
///
/// The fractional part `{f(n)}` is formed from the integer residue
/// `p·n mod r`, so subsequences `n ≡ i (mod r)` share bit-identical `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionalDrift {
    p: u64,
    r: u64,
    offset: f64,
}

impl FractionalDrift {
    pub fn new(p: u64, r: u64, offset: f64) -> Result<Self> {
        if r == 0 || p == 0 || p >= r {
            return Err(Error::invalid(format!(
                "slope {p}/{r} must lie strictly between 0 and 1"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::invalid(format!(
                "offset must be finite, got {offset}"
            )));
        }
        let g = gcd(p, r);
        Ok(FractionalDrift {
            p: p / g,
            r: r / g,
            offset,
        })
    }

    /// Parses `p/r` (or a bare integer numerator over 1, which is rejected).
    pub fn parse_slope(text: &str) -> Result<(u64, u64)> {
        let bad = || Error::invalid(format!("slope must look like p/r, got `{text}`"));
        let (p, r) = text.split_once('/').ok_or_else(bad)?;
        let p = p.trim().parse().map_err(|_| bad())?;
        let r = r.trim().parse().map_err(|_| bad())?;
        Ok((p, r))
    }

    pub fn slope(&self) -> (u64, u64) {
        (self.p, self.r)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Exact split of `f(n)` into `⌊f(n)⌋` and `{f(n)}`.
    pub fn split(&self, n: u64) -> (i64, f64) {
        let pn = self.p as u128 * n as u128;
        let whole = (pn / self.r as u128) as i64;
        let rem = (pn % self.r as u128) as f64 / self.r as f64;
        let off_floor = self.offset.floor();
        let mut floor = whole + off_floor as i64;
        let mut beta = rem + (self.offset - off_floor);
        if beta >= 1.0 - f64::EPSILON {
            beta = (beta - 1.0).max(0.0);
            floor += 1;
        }
        (floor, beta)
    }

    pub fn value(&self, n: u64) -> f64 {
        let (floor, beta) = self.split(n);
        floor as f64 + beta
    }

    pub fn beta(&self, n: u64) -> f64 {
        self.split(n).1
    }

    /// `θ_n = q^{-f(n)}`, with the integer part of `f(n)` kept in the exponent.
    pub fn theta(&self, n: u64, q: QBase) -> ScaledReal {
        let (floor, beta) = self.split(n);
        ScaledReal::new(q.pow(-beta), -floor, q)
    }

    /// `KB(n, q^{-f(n)}, q)`.
    pub fn kemp(&self, n: u64, q: QBase) -> KempBinomial {
        KempBinomial::with_scaled_theta(n, self.theta(n, q)).expect("θ_n is positive")
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `q^a / (1 + q^a)`, i.e. `1 / (1 + q^{-a})`.
fn logistic(a: f64, q: QBase) -> f64 {
    let t = a * q.ln();
    if t > 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let u = t.exp();
        u / (1.0 + u)
    }
}

/// `c(β, q)` from its defining two-series expression.
pub fn c_direct(beta: f64, q: QBase) -> f64 {
    let beta = beta - beta.floor();
    let mut series = CompensatedSum::new();
    let mut l = 0.0;
    // both summands are below q^{l+1-β}; the tail after l is below q^{l+1-β}/(1-q)
    while q.pow(l + 1.0 - beta) / (1.0 - q.value()) >= TAIL_EPS {
        series.add(logistic(l + 1.0 - beta, q) - logistic(l + 1.0 + beta, q));
        l += 1.0;
    }
    let mut total = CompensatedSum::new();
    total.add(1.0);
    total.add(-logistic(beta, q));
    total.add(-beta);
    total.add(series.value());
    total.value()
}

/// Default number of sine terms: enough that the first dropped term is
/// below roughly `1e-16`.
pub fn default_terms(q: QBase) -> usize {
    let k = (q.ln().abs() * 40.0 / (2.0 * PI * PI)).ceil() as usize + 2;
    k.max(3)
}

/// The oscillating part `Σ_{k=1}^{terms} 2π sin(2kπf) / (ln q · sinh(2kπ²/ln q))`.
pub fn fourier_series_part(f_value: f64, q: QBase, terms: usize) -> f64 {
    let beta = f_value - f_value.floor();
    if beta == 0.0 {
        return 0.0;
    }
    let a = -q.ln();
    let mut acc = CompensatedSum::new();
    for k in 1..=terms {
        let k = k as f64;
        let x = 2.0 * k * PI * PI / a;
        // 1/sinh(x) = 2e^{-x} / (1 - e^{-2x})
        let csch = 2.0 * (-x).exp() / -(-2.0 * x).exp_m1();
        acc.add(2.0 * PI * (2.0 * k * PI * beta).sin() / a * csch);
    }
    acc.value()
}

/// `c` from the sine series: `1/2 + fourier_series_part`.
pub fn c_fourier(f_value: f64, q: QBase, terms: usize) -> f64 {
    0.5 + fourier_series_part(f_value, q, terms)
}

/// Constant in front of the `q^{min(f/2, n-f)}` error term.
pub fn error_constant(q: QBase) -> f64 {
    10.0 / (1.0 - q.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanAsymptotics {
    pub f_value: f64,
    pub beta: f64,
    pub c_value: f64,
    pub estimate: f64,
    pub error_bound: f64,
    pub terms_used: usize,
}

/// `μ_n ≈ f(n) + c(β, q)` with its error bound.
pub fn mean_expansion(
    n: u64,
    drift: &FractionalDrift,
    q: QBase,
    terms: usize,
) -> Result<MeanAsymptotics> {
    if terms == 0 {
        return Err(Error::invalid("the sine series needs at least one term"));
    }
    let f_value = drift.value(n);
    if !(f_value > 0.0 && f_value < n as f64) {
        return Err(Error::DriftRange { f: f_value, n });
    }
    let (floor, beta) = drift.split(n);
    let c_value = c_fourier(beta, q, terms);
    let exponent = (f_value / 2.0).min(n as f64 - f_value);
    Ok(MeanAsymptotics {
        f_value,
        beta,
        c_value,
        // ⌊f⌋ + (β + c) rounds once instead of twice
        estimate: floor as f64 + (beta + c_value),
        error_bound: error_constant(q) * q.pow(exponent),
        terms_used: terms,
    })
}

/// The exact finite-n mean `Σ_{i<n} 1/(1 + q^{f(n)-i})`.
pub fn direct_mean(n: u64, drift: &FractionalDrift, q: QBase) -> f64 {
    drift.kemp(n, q).moments().mean
}

/// `σ² = lim σ_n²` along constant `β`:
/// `Σ_{i>=0} s(β+i) + Σ_{i>=0} s(i+1−β)` with `s(a) = q^a/(1+q^a)²`.
pub fn limit_variance(beta: f64, q: QBase) -> f64 {
    let beta = beta - beta.floor();
    let s = |a: f64| {
        let u = q.pow(a);
        u / ((1.0 + u) * (1.0 + u))
    };
    let mut acc = CompensatedSum::new();
    let mut i = 0.0;
    loop {
        let lo = (beta + i).min(i + 1.0 - beta);
        if q.pow(lo) / (1.0 - q.value()) < TAIL_EPS {
            break;
        }
        acc.add(s(beta + i));
        acc.add(s(i + 1.0 - beta));
        i += 1.0;
    }
    acc.value()
}

/// Discrete-normal parameter of the limit law for fractional part `β`.
pub fn dnorm_alpha(beta: f64) -> f64 {
    if beta == 0.5 {
        0.0
    } else if beta < 0.5 {
        0.5 + beta
    } else {
        beta - 0.5
    }
}

/// `⌊c(β, q) + β⌋`, checked against its two-case closed form.
pub fn floor_case(beta: f64, q: QBase) -> Result<i64> {
    let v = c_direct(beta, q) + beta;
    let nearest = v.round();
    let floor = if (v - nearest).abs() < SNAP {
        nearest
    } else {
        v.floor()
    } as i64;
    let expected = if beta < 0.5 { 0 } else { 1 };
    if floor != expected {
        return Err(Error::Consistency(format!(
            "floor(c + beta) = {floor} at beta = {beta}, q = {}; expected {expected}",
            q.value()
        )));
    }
    Ok(floor)
}

/// Limit of `X_{n_k} − shift_k` for a constant-β subsequence, where the
/// shift is `⌊μ_n⌋` (or `f(n) + 1/2` when `β = 1/2`).
#[derive(Debug, Clone, PartialEq)]
pub struct LimitLaw {
    pub beta: f64,
    pub q: QBase,
    pub c: f64,
    pub variance: f64,
    pub sigma: f64,
    pub delta: i64,
    pub alpha: f64,
    pub table: PmfTable,
}

impl LimitLaw {
    /// Where lattice point `x` sits after centring by `μ_n` and scaling by σ.
    pub fn location(&self, x: i64) -> f64 {
        (x as f64 - self.centre()) / self.sigma
    }

    /// Limit of `μ_n − shift_n`.
    pub fn centre(&self) -> f64 {
        if self.beta == 0.5 {
            0.0
        } else {
            self.beta + self.c - self.delta as f64
        }
    }

    pub fn prob(&self, x: i64) -> f64 {
        self.table.prob(x)
    }

    /// `max_x |p(x) − p(s − x)|` for the reflection about `s/2`.
    pub fn asymmetry(&self, s: i64) -> f64 {
        self.table
            .iter()
            .map(|(x, p)| (p - self.prob(s - x)).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest [`asymmetry`](Self::asymmetry) over all reflections that
    /// keep the bulk of the table in place.
    pub fn min_asymmetry(&self) -> f64 {
        let span = self.table.high() - self.table.low();
        (-span..=span)
            .map(|s| self.asymmetry(s + self.table.low() + self.table.high()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Symmetric about the centre exactly as computed.
    pub fn is_symmetric(&self) -> bool {
        let s = 2.0 * self.centre();
        (s - s.round()).abs() < SNAP && self.asymmetry(s.round() as i64) == 0.0
    }
}

/// Half-width of the lattice window: at least 50 and wide enough that the
/// dropped weights fall below `q^{(X-2)²/2} < 1e-17`.
fn lattice_radius(q: QBase) -> i64 {
    let needed = 2.0 + (2.0 * -TAIL_EPS.ln() / -q.ln()).sqrt();
    (needed.ceil() as i64).max(50)
}

pub fn limit_law(beta: f64, q: QBase) -> Result<LimitLaw> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::invalid(format!(
            "beta must lie in [0, 1), got {beta}"
        )));
    }
    let c = c_direct(beta, q);
    let delta = floor_case(beta, q)?;
    let variance = limit_variance(beta, q);
    let ln_k = qcalc::ln_e_q(q.value(), q)
        + qcalc::ln_e_q(-q.pow(beta), q)
        + qcalc::ln_e_q(-q.pow(1.0 - beta), q);
    let exponent = |x: f64| {
        if beta < 0.5 {
            (x - 1.0) * (x - 2.0 * beta) / 2.0
        } else {
            // covers β = 1/2, where it reduces to x²/2
            x * (1.0 + x - 2.0 * beta) / 2.0
        }
    };
    let radius = lattice_radius(q);
    let probs = (-radius..=radius)
        .map(|x| (ln_k + exponent(x as f64) * q.ln()).exp())
        .collect();
    let table = PmfTable::new(-radius, probs)?;
    Ok(LimitLaw {
        beta,
        q,
        c,
        variance,
        sigma: variance.sqrt(),
        delta,
        alpha: dnorm_alpha(beta),
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DiscreteNormal;

    fn q(v: f64) -> QBase {
        QBase::new(v).unwrap()
    }

    #[test]
    fn drift_fractional_part_is_exact() {
        let d = FractionalDrift::new(3, 10, 0.25).unwrap();
        assert_eq!(d.split(400), (120, 0.25));
        assert_eq!(d.split(7), (2, 0.35));
        let half = FractionalDrift::new(2, 4, 0.0).unwrap();
        assert_eq!(half.slope(), (1, 2));
        assert_eq!(half.beta(21), 0.5);
        assert_eq!(half.beta(22), 0.0);
        let wrap = FractionalDrift::new(1, 2, 0.5).unwrap();
        assert_eq!(wrap.split(3), (2, 0.0));
        assert!(FractionalDrift::new(1, 1, 0.0).is_err());
        assert!(FractionalDrift::new(0, 3, 0.0).is_err());
        assert_eq!(FractionalDrift::parse_slope("3/10").unwrap(), (3, 10));
        assert!(FractionalDrift::parse_slope("0.3").is_err());
    }

    #[test]
    fn drift_theta_is_q_to_minus_f() {
        let b = q(0.5);
        let d = FractionalDrift::new(3, 10, 0.25).unwrap();
        let t = d.theta(100, b);
        assert!((t.ln_abs() - 30.25 * 2f64.ln()).abs() < 1e-12);
        assert!((1.0..2.0).contains(&t.mantissa()));
    }

    #[test]
    fn c_at_special_points() {
        for &qv in &[0.2, 0.5, 0.9] {
            assert!((c_direct(0.0, q(qv)) - 0.5).abs() < 1e-12);
            assert!((c_direct(0.5, q(qv)) - 0.5).abs() < 1e-12);
        }
        let b = q(0.5);
        assert!((c_direct(0.3, b) + c_direct(0.7, b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fourier_matches_direct() {
        let b = q(0.5);
        assert!((c_fourier(0.3, b, 20) - c_direct(0.3, b)).abs() < 1e-12);
        assert_eq!(c_fourier(7.0, b, 20), 0.5);
        for &qv in &[0.2, 0.5, 0.8] {
            for i in 0..10 {
                let beta = i as f64 / 10.0;
                let f = beta + 13.0;
                let diff = c_direct(beta, q(qv)) - c_fourier(f, q(qv), 20);
                assert!(diff.abs() < 1e-12, "β={beta} q={qv} diff={diff}");
            }
        }
    }

    #[test]
    fn fourier_series_small_q_trend() {
        // tends to 1/2 − β as q → 0, but only like q^β
        let at = |qv: f64| fourier_series_part(0.3, q(qv), default_terms(q(qv)));
        assert!((at(1e-12) - 0.2).abs() < 1e-2);
        assert!((at(1e-3) - (c_direct(0.3, q(1e-3)) - 0.5)).abs() < 1e-12);
        assert!((at(1e-6) - 0.2).abs() < (at(1e-3) - 0.2).abs());
    }

    #[test]
    fn c_tends_to_half_near_one() {
        for i in 1..10 {
            let beta = i as f64 / 10.0;
            assert!((c_direct(beta, q(0.999)) - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn c_hat_is_increasing() {
        let b = q(0.5);
        let hat = |beta: f64| c_direct(beta, b) - 1.0 + beta;
        let grid: Vec<f64> = (0..100).map(|i| hat(i as f64 / 100.0)).collect();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn expansion_matches_direct_sum() {
        let b = q(0.5);
        let d = FractionalDrift::new(3, 10, 0.25).unwrap();
        let m = mean_expansion(400, &d, b, default_terms(b)).unwrap();
        assert!((m.estimate - direct_mean(400, &d, b)).abs() < 1e-12);
        for n in 50..=400 {
            let m = mean_expansion(n, &d, b, default_terms(b)).unwrap();
            assert!(
                (m.estimate - direct_mean(n, &d, b)).abs() <= m.error_bound,
                "n = {n}"
            );
        }
    }

    #[test]
    fn expansion_rejects_out_of_range_drift() {
        let d = FractionalDrift::new(1, 2, -5.0).unwrap();
        assert!(matches!(
            mean_expansion(4, &d, q(0.5), 3),
            Err(Error::DriftRange { .. })
        ));
    }

    #[test]
    fn integer_drift_mean_offset_is_half() {
        let b = q(0.5);
        let d = FractionalDrift::new(1, 3, 0.0).unwrap();
        let direct = direct_mean(300, &d, b);
        assert!((direct - 100.0 - 0.5).abs() < 1e-12);
        assert_eq!(mean_expansion(300, &d, b, 5).unwrap().estimate, 100.5);
    }

    #[test]
    fn half_integer_mean_sides() {
        // θ = q^{-10.5}, so f = 10.5 and β = 1/2
        let b = q(0.5);
        let theta = ScaledReal::q_power(-10.5, b);
        let mu = |n: u64| {
            KempBinomial::with_scaled_theta(n, theta)
                .unwrap()
                .moments()
                .mean
        };
        // 2f = 21 >= n: below f + 1/2, ceiling is 11
        for n in [20, 21] {
            assert!(mu(n) < 11.0 && mu(n).ceil() == 11.0, "n = {n}");
        }
        // 2f = n − 1: exactly f + 1/2
        assert!((mu(22) - 11.0).abs() < 1e-12);
        // 2f < n − 1: above f + 1/2, floor is 11
        assert!(mu(23) > 11.0 && mu(23).floor() == 11.0);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn variance_limit_values() {
        let b = q(0.5);
        assert!((limit_variance(0.0, b) - 1.4427).abs() < 1e-4);
        for &qv in &[0.2, 0.5, 0.9] {
            for i in 0..10 {
                let beta = i as f64 / 10.0;
                let v = limit_variance(beta, q(qv));
                assert!(v <= 2.0 / (1.0 - qv));
                if beta > 0.0 {
                    assert!((v - limit_variance(1.0 - beta, q(qv))).abs() < 1e-12);
                }
            }
        }
        // agrees with finite-n variances along a constant-β subsequence
        let d = FractionalDrift::new(1, 2, 0.3).unwrap();
        let finite = d.kemp(200, b).moments().variance;
        assert!((finite - limit_variance(0.3, b)).abs() < 1e-12);
    }

    #[test]
    fn alpha_table() {
        assert_eq!(dnorm_alpha(0.5), 0.0);
        assert_eq!(dnorm_alpha(0.0), 0.5);
        assert!((dnorm_alpha(0.7) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn floor_cases() {
        assert_eq!(floor_case(0.1, q(0.5)).unwrap(), 0);
        assert_eq!(floor_case(0.5, q(0.5)).unwrap(), 1);
        assert_eq!(floor_case(0.9, q(0.2)).unwrap(), 1);
        for i in 0..19 {
            let beta = 0.05 + i as f64 * 0.05;
            floor_case(beta, q(0.5)).unwrap();
        }
    }

    #[test]
    fn limit_law_normalized_and_symmetric() {
        let b = q(0.5);
        for beta in [0.0, 0.5] {
            let law = limit_law(beta, b).unwrap();
            assert!((law.table.captured_mass() - 1.0).abs() < 1e-10);
            assert!(law.is_symmetric(), "β = {beta}");
        }
        let law = limit_law(0.5, b).unwrap();
        for x in 0..20 {
            assert_eq!(law.prob(x), law.prob(-x));
        }
        let skew = limit_law(0.3, b).unwrap();
        assert!((skew.table.captured_mass() - 1.0).abs() < 1e-10);
        assert!(!skew.is_symmetric());
        assert!(skew.min_asymmetry() > 1e-3);
    }

    #[test]
    fn limit_law_is_discrete_normal() {
        for &(beta, qv) in &[(0.0, 0.5), (0.3, 0.5), (0.5, 0.5), (0.8, 0.3), (0.6, 0.9)] {
            let law = limit_law(beta, q(qv)).unwrap();
            let dn = DiscreteNormal::new(law.alpha, q(qv)).unwrap();
            for x in -40..=40 {
                assert!((law.prob(x) - dn.pmf(x)).abs() < 1e-10, "β={beta} x={x}");
            }
        }
    }

    #[test]
    fn limit_law_locations() {
        let law = limit_law(0.3, q(0.5)).unwrap();
        let step = law.location(1) - law.location(0);
        assert!((step - 1.0 / law.sigma).abs() < 1e-15);
        assert!((law.location(0) + (0.3 + law.c) / law.sigma).abs() < 1e-15);
        let law = limit_law(0.8, q(0.5)).unwrap();
        assert_eq!(law.delta, 1);
        assert!((law.location(0) + (0.8 + law.c - 1.0) / law.sigma).abs() < 1e-15);
        assert_eq!(
            limit_law(0.5, q(0.5)).unwrap().location(3),
            3.0 / limit_law(0.5, q(0.5)).unwrap().sigma
        );
    }
}
