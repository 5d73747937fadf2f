use super::{LatticeLaw, PmfTable};
use crate::error::{Error, Result};
use crate::qcalc::{self, QBase, TAIL_EPS};
use crate::sum::CompensatedSum;

/// The Heine law `H(θ)`, a q-analogue of the Poisson law:
/// `P(X = x) = q^{x(x-1)/2} θ^x / (q;q)_x · e_q(−θ)` for `x >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heine {
    theta: f64,
    q: QBase,
}

impl Heine {
    /// `θ = 0` is accepted and gives the point mass at 0.
    pub fn new(theta: f64, q: QBase) -> Result<Self> {
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(Error::invalid(format!(
                "Heine theta must be finite and >= 0, got {theta}"
            )));
        }
        Ok(Heine { theta, q })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn q(&self) -> QBase {
        self.q
    }

    /// `ln e_q(−θ) = −ln (−θ; q)_∞`.
    fn ln_norm(&self) -> f64 {
        qcalc::ln_e_q(-self.theta, self.q)
    }

    fn ln_weight(&self, x: u64, ln_qfact: f64) -> f64 {
        let xf = x as f64;
        xf * (xf - 1.0) / 2.0 * self.q.ln() + xf * self.theta.ln() - ln_qfact
    }

    pub fn pmf(&self, x: i64) -> f64 {
        if x < 0 {
            return 0.0;
        }
        if self.theta == 0.0 {
            return if x == 0 { 1.0 } else { 0.0 };
        }
        let lf = (1..=x as u64)
            .map(|j| self.q.ln_one_minus_pow(j as f64))
            .collect::<CompensatedSum>()
            .value();
        (self.ln_weight(x as u64, lf) + self.ln_norm()).exp()
    }

    /// `μ_∞(θ) = Σ_{i>=0} θq^i / (1 + θq^i)`.
    pub fn mean(&self) -> f64 {
        heine_mean(self.theta, self.q)
    }

    /// Table on `{0, …, X}`, where `X` is the first point past the mode at
    /// which the geometric ratio bound on the remaining tail drops below `tol`.
    pub fn table(&self, tol: f64) -> PmfTable {
        if self.theta == 0.0 {
            return PmfTable::point_mass(0);
        }
        let ln_norm = self.ln_norm();
        let mut probs = Vec::new();
        let mut ln_qfact = CompensatedSum::new();
        let mut x: u64 = 0;
        loop {
            if x > 0 {
                ln_qfact.add(self.q.ln_one_minus_pow(x as f64));
            }
            let p = (self.ln_weight(x, ln_qfact.value()) + ln_norm).exp();
            probs.push(p);
            // P(x+1)/P(x) = θ q^x / (1 - q^{x+1}), decreasing in x
            let ratio = self.theta * self.q.powi(x as i64) / self.q.one_minus_pow(x as f64 + 1.0);
            if ratio < 1.0 && p * ratio / (1.0 - ratio) < tol {
                break;
            }
            x += 1;
        }
        PmfTable::new(0, probs).expect("Heine probabilities are valid")
    }
}

pub(crate) fn heine_mean(theta: f64, q: QBase) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut i: i64 = 0;
    loop {
        let t = theta * q.powi(i);
        // the remaining terms sum to at most t / (1 - q)
        if t / (1.0 - q.value()) < TAIL_EPS {
            break;
        }
        acc.add(if t >= 1.0 {
            1.0 / (1.0 + 1.0 / t)
        } else {
            t / (1.0 + t)
        });
        i += 1;
    }
    acc.value()
}

impl LatticeLaw for Heine {
    fn pmf(&self, x: i64) -> f64 {
        Heine::pmf(self, x)
    }

    fn table(&self, tol: f64) -> PmfTable {
        Heine::table(self, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample_by_inversion, KempBinomial};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(v: f64) -> QBase {
        QBase::new(v).unwrap()
    }

    #[test]
    fn zero_mass_point() {
        let h = Heine::new(0.5, q(0.5)).unwrap();
        assert!((h.pmf(0) - 0.41942244).abs() < 1e-8);
        assert_eq!(h.pmf(-3), 0.0);
    }

    #[test]
    fn partial_sums_normalize() {
        let h = Heine::new(0.5, q(0.5)).unwrap();
        let total: f64 = (0..=60).map(|x| h.pmf(x)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_limit_near_one() {
        let qv = 0.999;
        let h = Heine::new(1.0 - qv, q(qv)).unwrap();
        assert!((h.pmf(0) - (-1f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn mean_matches_brute_force_and_kb_limit() {
        let h = Heine::new(0.5, q(0.5)).unwrap();
        assert!((h.mean() - h.table(1e-15).mean()).abs() < 1e-10);
        let kb = KempBinomial::new(200, 0.5, q(0.5)).unwrap();
        assert!((h.mean() - kb.moments().mean).abs() < 1e-10);
        assert_eq!(Heine::new(0.0, q(0.5)).unwrap().mean(), 0.0);
    }

    #[test]
    fn table_captures_requested_mass() {
        for &(theta, qv) in &[(0.5, 0.5), (3.0, 0.9), (40.0, 0.2), (1e-3, 0.99)] {
            let h = Heine::new(theta, q(qv)).unwrap();
            let t = h.table(1e-12);
            assert!(t.captured_mass() >= 1.0 - 1e-12, "{theta} {qv}");
            assert!(t.captured_mass() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_theta() {
        assert!(Heine::new(-1.0, q(0.5)).is_err());
        assert!(Heine::new(f64::NAN, q(0.5)).is_err());
    }

    #[test]
    fn inversion_sampling_matches_table() {
        let t = Heine::new(0.5, q(0.5)).unwrap().table(1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 1_000_000;
        let mut counts = vec![0u64; t.len() + 1];
        for _ in 0..draws {
            let x = sample_by_inversion(&t, &mut rng).unwrap();
            counts[x as usize] += 1;
        }
        let tv: f64 = 0.5
            * counts
                .iter()
                .enumerate()
                .map(|(x, &c)| (c as f64 / draws as f64 - t.prob(x as i64)).abs())
                .sum::<f64>();
        assert!(tv < 0.005, "{tv}");
    }
}
