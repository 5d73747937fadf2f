use rand::Rng;

use super::{LatticeLaw, MomentPair, PmfTable};
use crate::error::{Error, Result};
use crate::qcalc::{self, QBase, ScaledReal};
use crate::sum::CompensatedSum;

/// Kemp's q-binomial law `KB(n, θ, q)` on `{0, …, n}`:
///
/// `P(X = x) = [n choose x]_q θ^x q^{x(x-1)/2} / (−θ; q)_n`.
///
/// θ is stored as a [`ScaledReal`] so that exponentially growing shapes such
/// as `θ₀ q^{-n}` are representable for any `n`. `θ = 0` is admitted and
/// gives the point mass at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KempBinomial {
    n: u64,
    theta: ScaledReal,
}

impl KempBinomial {
    pub fn new(n: u64, theta: f64, q: QBase) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::invalid(format!("theta must be finite, got {theta}")));
        }
        Self::with_scaled_theta(n, ScaledReal::from_f64(theta, q))
    }

    pub fn with_scaled_theta(n: u64, theta: ScaledReal) -> Result<Self> {
        if theta.is_negative() {
            return Err(Error::invalid(format!("theta must be >= 0, got {theta}")));
        }
        Ok(KempBinomial { n, theta })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn theta(&self) -> ScaledReal {
        self.theta
    }

    pub fn q(&self) -> QBase {
        self.theta.base()
    }

    /// Success probabilities `θq^i / (1 + θq^i)` of the Bernoulli summands,
    /// paired with their complements.
    pub fn bernoulli_probs(&self) -> Vec<(f64, f64)> {
        (0..self.n)
            .map(|i| bernoulli_pair(self.theta.scale_q(i as i64)))
            .collect()
    }

    /// Mean and variance from the Bernoulli decomposition.
    ///
    /// Summands with `p >= 1/2` enter the mean as `1 − (1 − p)`, with the
    /// integer part added last, so the result does not lose the small
    /// complements to cancellation.
    pub fn moments(&self) -> MomentPair {
        let mut ones: u64 = 0;
        let mut frac = CompensatedSum::new();
        let mut var = CompensatedSum::new();
        for (p, pc) in self.bernoulli_probs() {
            if p >= 0.5 {
                ones += 1;
                frac.add(-pc);
            } else {
                frac.add(p);
            }
            var.add(p * pc);
        }
        MomentPair {
            mean: ones as f64 + frac.value(),
            variance: var.value(),
        }
    }

    /// `ln (−θ; q)_n` split as mantissa log and integer q-exponent.
    fn denominator(&self) -> ScaledReal {
        qcalc::positive_pochhammer(self.theta, self.n)
    }

    fn ln_pmf_with(&self, x: u64, ln_qbinom: f64, den: &ScaledReal) -> f64 {
        let q = self.q();
        // every q-power is collected into one exact integer exponent
        let x_i = x as i128;
        let q_exp =
            x_i * self.theta.exponent() as i128 + x_i * (x_i - 1) / 2 - den.exponent() as i128;
        ln_qbinom + x as f64 * self.theta.mantissa().ln() - den.mantissa().ln()
            + q_exp as f64 * q.ln()
    }

    pub fn pmf(&self, x: i64) -> f64 {
        if x < 0 || x as u64 > self.n {
            return 0.0;
        }
        if self.theta.is_zero() {
            return if x == 0 { 1.0 } else { 0.0 };
        }
        let den = self.denominator();
        let lb = qcalc::ln_q_binomial(self.n, x, self.q());
        self.ln_pmf_with(x as u64, lb, &den).exp()
    }

    /// The exact table on `{0, …, n}`.
    pub fn table(&self) -> PmfTable {
        if self.theta.is_zero() {
            let mut probs = vec![0.0; self.n as usize + 1];
            probs[0] = 1.0;
            return PmfTable::new(0, probs).expect("point mass table");
        }
        let den = self.denominator();
        let lf = qcalc::ln_q_factorials(self.n, self.q());
        let n = self.n as usize;
        let probs = (0..=n)
            .map(|x| {
                let lb = lf[n] - lf[x] - lf[n - x];
                self.ln_pmf_with(x as u64, lb, &den).exp()
            })
            .collect();
        PmfTable::new(0, probs).expect("KB probabilities are valid")
    }

    pub fn sampler(&self) -> BernoulliSumSampler {
        BernoulliSumSampler {
            probs: self.bernoulli_probs().into_iter().map(|(p, _)| p).collect(),
        }
    }
}

/// `(t/(1+t), 1/(1+t))` for `t >= 0`, accurate at every magnitude.
pub(crate) fn bernoulli_pair(t: ScaledReal) -> (f64, f64) {
    if t.is_zero() {
        return (0.0, 1.0);
    }
    if t.ln_abs() >= 0.0 {
        let u = t.recip().to_f64();
        (1.0 / (1.0 + u), u / (1.0 + u))
    } else {
        let v = t.to_f64();
        (v / (1.0 + v), 1.0 / (1.0 + v))
    }
}

/// `μ_n(θ, q) = Σ_{i<n} θq^i / (1 + θq^i)` for plain `θ >= 0`.
#[cfg(test)]
pub(crate) fn kb_mean(theta: f64, q: QBase, n: u64) -> f64 {
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        let t = theta * q.powi(i as i64);
        acc.add(if t >= 1.0 {
            1.0 / (1.0 + 1.0 / t)
        } else {
            t / (1.0 + t)
        });
    }
    acc.value()
}

impl LatticeLaw for KempBinomial {
    fn pmf(&self, x: i64) -> f64 {
        KempBinomial::pmf(self, x)
    }

    fn table(&self, _tol: f64) -> PmfTable {
        KempBinomial::table(self)
    }
}

/// Draws `KB(n, θ, q)` as a sum of independent Bernoulli variables.
#[derive(Debug, Clone)]
pub struct BernoulliSumSampler {
    probs: Vec<f64>,
}

impl BernoulliSumSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.probs.iter().filter(|&&p| rng.gen::<f64>() < p).count() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::reference::Binomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(v: f64) -> QBase {
        QBase::new(v).unwrap()
    }

    /// Straight transcription of the pmf in plain floating point; valid
    /// only where nothing overflows.
    fn naive_pmf(n: u64, theta: f64, qv: f64, x: u64) -> f64 {
        let qp = |z: f64, m: u64| (0..m).map(|i| 1.0 - z * qv.powi(i as i32)).product::<f64>();
        let qbinom = qp(qv, n) / (qp(qv, x) * qp(qv, n - x));
        qbinom * theta.powi(x as i32) * qv.powf((x * x.saturating_sub(1)) as f64 / 2.0)
            / qp(-theta, n)
    }

    #[test]
    fn small_example() {
        let d = KempBinomial::new(2, 1.0, q(0.5)).unwrap();
        let expected = [1.0 / 3.0, 0.5, 1.0 / 6.0];
        for (x, e) in expected.iter().enumerate() {
            assert!((d.pmf(x as i64) - e).abs() < 1e-15);
        }
        assert_eq!(d.pmf(-1), 0.0);
        assert_eq!(d.pmf(3), 0.0);
        let m = d.moments();
        assert!((m.mean - 5.0 / 6.0).abs() < 1e-15);
        assert!((m.variance - 17.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn matches_naive_formula() {
        for &qv in &[0.2, 0.5, 0.9] {
            for &theta in &[0.1, 1.0, 5.0] {
                let d = KempBinomial::new(15, theta, q(qv)).unwrap();
                let t = d.table();
                for x in 0..=15u64 {
                    let naive = naive_pmf(15, theta, qv, x);
                    assert!((t.prob(x as i64) - naive).abs() < 1e-13);
                    assert!((d.pmf(x as i64) - naive).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn near_one_is_binomial() {
        let d = KempBinomial::new(5, 1.0, q(0.9999)).unwrap();
        let b = Binomial::new(5, 0.5).unwrap();
        let worst = (0..=5)
            .map(|x| (d.pmf(x) - b.pmf(x)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn vanishing_theta() {
        let b = q(0.5);
        let d = KempBinomial::with_scaled_theta(10, ScaledReal::new(1.0, 1000, b)).unwrap();
        let m = d.moments();
        assert!(m.mean < 1e-290 && m.variance < 1e-290);
        let zero = KempBinomial::new(10, 0.0, b).unwrap();
        assert_eq!(zero.table().probs()[0], 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = zero.sampler();
        assert!((0..1000).all(|_| s.sample(&mut rng) == 0));
    }

    #[test]
    fn rejects_negative_theta() {
        assert!(KempBinomial::new(3, -1.0, q(0.5)).is_err());
        assert!(KempBinomial::new(3, f64::INFINITY, q(0.5)).is_err());
    }

    #[test]
    fn brute_force_mean() {
        let d = KempBinomial::new(20, 1.3, q(0.6)).unwrap();
        assert!((d.table().mean() - d.moments().mean).abs() < 1e-10);
        assert!((kb_mean(1.3, q(0.6), 20) - d.moments().mean).abs() < 1e-14);
    }

    #[test]
    fn huge_theta_is_finite() {
        // θ = 2 q^{-3000}: far outside binary64, mass piles up at x = n
        let b = q(0.5);
        let d = KempBinomial::with_scaled_theta(3000, ScaledReal::new(2.0, -3000, b)).unwrap();
        let t = d.table();
        assert!((t.captured_mass() - 1.0).abs() < 1e-12);
        assert!(t.prob(3000) > 0.5);
    }

    #[test]
    fn sampler_stays_in_range() {
        let d = KempBinomial::new(7, 2.0, q(0.4)).unwrap();
        let s = d.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!((0..10_000).all(|_| s.sample(&mut rng) <= 7));
    }

    #[test]
    fn sample_mean_within_clt_band() {
        let d = KempBinomial::new(20, 1.3, q(0.6)).unwrap();
        let m = d.moments();
        let s = d.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 1_000_000;
        let total: u64 = (0..draws).map(|_| s.sample(&mut rng)).sum();
        let empirical = total as f64 / draws as f64;
        let band = 4.0 * m.variance.sqrt() / 1000.0;
        assert!((empirical - m.mean).abs() < band);
    }
}
