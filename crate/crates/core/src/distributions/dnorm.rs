use super::{LatticeLaw, PmfTable};
use crate::error::{Error, Result};
use crate::qcalc::QBase;
use crate::sum::CompensatedSum;

/// Relative weight below which normalizer terms are dropped.
const NORMALIZER_EPS_LN: f64 = 43.0; // e^{-43} < 1e-18

/// The discrete normal law on ℤ with `P(X = x) ∝ q^{x²/2 − xα}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteNormal {
    alpha: f64,
    q: QBase,
    ln_norm: f64,
}

impl DiscreteNormal {
    pub fn new(alpha: f64, q: QBase) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be finite, got {alpha}")));
        }
        let ln_norm = ln_normalizer(alpha, q);
        Ok(DiscreteNormal { alpha, q, ln_norm })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> QBase {
        self.q
    }

    pub fn pmf(&self, x: i64) -> f64 {
        (ln_weight(x, self.alpha, self.q) - self.ln_norm).exp()
    }

    /// Table on `|x − α| <= d`, with `d` large enough that the Gaussian tail
    /// bound `2 q^{d²/2} / (1 − q^d)` on the dropped mass is below `tol`.
    pub fn table(&self, tol: f64) -> PmfTable {
        let lq = self.q.ln();
        let mut d = ((-2.0 * tol.ln()) / -lq).sqrt().ceil().max(1.0);
        while (2.0 * (d * d / 2.0 * lq).exp() / -(d * lq).exp_m1()) >= tol {
            d += 1.0;
        }
        // centre on 0 when α is small so that α = 0 yields a symmetric table
        let centre = self.alpha.round() as i64;
        let half = d as i64 + 1;
        let (lo, hi) = (centre - half, centre + half);
        let probs = (lo..=hi).map(|x| self.pmf(x)).collect();
        PmfTable::new(lo, probs).expect("discrete normal probabilities are valid")
    }
}

fn ln_weight(x: i64, alpha: f64, q: QBase) -> f64 {
    let x = x as f64;
    (x * x / 2.0 - x * alpha) * q.ln()
}

/// Log of `Σ_k q^{k²/2 − kα}`, summed symmetrically about the mode.
fn ln_normalizer(alpha: f64, q: QBase) -> f64 {
    let centre = alpha.round() as i64;
    let peak = ln_weight(centre, alpha, q);
    let reach = ((2.0 * NORMALIZER_EPS_LN / -q.ln()).sqrt()).ceil() as i64 + 2;
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for j in 1..=reach {
        acc.add((ln_weight(centre - j, alpha, q) - peak).exp());
        acc.add((ln_weight(centre + j, alpha, q) - peak).exp());
    }
    peak + acc.value().ln()
}

impl LatticeLaw for DiscreteNormal {
    fn pmf(&self, x: i64) -> f64 {
        DiscreteNormal::pmf(self, x)
    }

    fn table(&self, tol: f64) -> PmfTable {
        DiscreteNormal::table(self, tol)
    }
}
