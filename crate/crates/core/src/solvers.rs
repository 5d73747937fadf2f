//! Choosing θ so that `KB(n, θ, q)` has a prescribed Poisson rate or mean.
//!
//! Both mean maps `θ ↦ μ_n(θ, q)` and `θ ↦ μ_∞(θ, q)` are continuous and
//! strictly increasing, so plain bisection is enough. It runs on `ln θ`,
//! which keeps the bracket narrow in relative terms even when the upper
//! endpoint `q^{-n+1}` is astronomically large.

use serde::Serialize;

use crate::distributions::bernoulli_pair;
use crate::error::{Error, Result};
use crate::qcalc::{q_number, QBase, ScaledReal};
use crate::sum::CompensatedSum;

const MAX_ITERATIONS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaSolveResult {
    pub theta: f64,
    /// `|μ(θ) − μ|` at the returned θ.
    pub residual: f64,
    pub iterations: u32,
}

/// `θ_n = λ / [n − λ]_q`, the coupling under which `KB(n, θ_n, q)` tends to
/// the Heine law `H((1 − q)λ)`.
pub fn theta_for_poisson(n: u64, q: QBase, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < n as f64) {
        return Err(Error::invalid(format!(
            "Poisson rate must satisfy 0 < lambda < n, got lambda = {lambda}, n = {n}"
        )));
    }
    Ok(lambda / q_number(n as f64 - lambda, q))
}

/// Mean of `KB(n, e^{ln_theta}, q)`.
fn kb_mean_ln(ln_theta: f64, q: QBase, n: u64) -> f64 {
    let theta = ScaledReal::from_ln(false, ln_theta, q);
    (0..n)
        .map(|i| bernoulli_pair(theta.scale_q(i as i64)).0)
        .collect::<CompensatedSum>()
        .value()
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid(format!(
            "mean must be finite and > 0, got {mu}"
        )));
    }
    Ok(())
}

/// Solves `μ_n(θ, q) = μ`; requires `n >= 2μ`.
pub fn theta_for_mean(n: u64, q: QBase, mu: f64) -> Result<ThetaSolveResult> {
    check_mu(mu)?;
    if (n as f64) < 2.0 * mu {
        return Err(Error::Bracket { n, mu });
    }
    // μ_n(θ) < θ/(1-q) puts the root above μ(1-q); μ_n(q^{-n+1}) >= n/2 >= μ
    let lo = (mu * (1.0 - q.value())).ln();
    let hi = -((n - 1) as f64) * q.ln();
    Ok(bisect_ln(lo, hi.max(lo), mu, |t| kb_mean_ln(t, q, n)))
}

/// Solves `μ_∞(θ, q) = μ`, the limit of [`theta_for_mean`] as `n → ∞`.
pub fn theta_limit_for_mean(q: QBase, mu: f64) -> Result<ThetaSolveResult> {
    check_mu(mu)?;
    let m = (2.0 * mu).ceil().max(1.0);
    // μ_∞ >= μ_m, so the finite-n bracket for m = ⌈2μ⌉ still brackets the root
    let lo = (mu * (1.0 - q.value())).ln();
    let hi = -(m - 1.0) * q.ln();
    Ok(bisect_ln(lo, hi.max(lo), mu, |t| heine_mean_ln(t, q)))
}

fn heine_mean_ln(ln_theta: f64, q: QBase) -> f64 {
    let theta = ScaledReal::from_ln(false, ln_theta, q);
    let mut acc = CompensatedSum::new();
    let mut i = 0i64;
    loop {
        let t = theta.scale_q(i);
        if t.ln_abs() - (1.0 - q.value()).ln() < crate::qcalc::TAIL_EPS.ln() {
            break;
        }
        acc.add(bernoulli_pair(t).0);
        i += 1;
    }
    acc.value()
}

/// Bisection of an increasing `g` on `[lo, hi]` for `g(t) = target`.
/// Stops when the bracket cannot be split further in `f64` or after
/// [`MAX_ITERATIONS`], and returns the endpoint with the smaller residual.
fn bisect_ln(mut lo: f64, mut hi: f64, target: f64, g: impl Fn(f64) -> f64) -> ThetaSolveResult {
    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let g_mid = g(mid);
        if g_mid < target {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    let (t, value) = if (g_lo - target).abs() <= (g_hi - target).abs() {
        (lo, g_lo)
    } else {
        (hi, g_hi)
    };
    ThetaSolveResult {
        theta: t.exp(),
        residual: (value - target).abs(),
        iterations,
    }
}
