//! q-calculus primitives: the base `q`, q-shifted factorials, Gaussian
//! binomial coefficients, q-numbers and the two q-exponentials.
//!
//! Finite products that can leave the `f64` range are returned as
//! [`ScaledReal`]. Infinite products are summed in log space with
//! compensated summation and truncated once the remaining factors are
//! certified to move the result by less than `1e-17` relatively.

mod scaled;

pub use scaled::ScaledReal;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Truncation threshold for infinite products and series.
pub(crate) const TAIL_EPS: f64 = 1e-17;

/// A base `q` strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QBase {
    q: f64,
    ln_q: f64,
}

impl QBase {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::invalid(format!("q must lie in (0, 1), got {q}")));
        }
        Ok(QBase { q, ln_q: q.ln() })
    }

    pub fn value(self) -> f64 {
        self.q
    }

    /// `ln q`, always negative.
    pub fn ln(self) -> f64 {
        self.ln_q
    }

    /// `q^x` for real `x`.
    pub fn pow(self, x: f64) -> f64 {
        (x * self.ln_q).exp()
    }

    /// `q^k`; exact for dyadic `q` and small `k`.
    pub fn powi(self, k: i64) -> f64 {
        if k.abs() <= 64 && (k as f64 * self.ln_q).abs() < 600.0 {
            self.q.powi(k as i32)
        } else {
            (k as f64 * self.ln_q).exp()
        }
    }

    /// `1 - q^x`, without cancellation for small `x` or `q` near 1.
    pub fn one_minus_pow(self, x: f64) -> f64 {
        -(x * self.ln_q).exp_m1()
    }

    /// `ln(1 - q^x)` for `x > 0`.
    pub fn ln_one_minus_pow(self, x: f64) -> f64 {
        let w = (x * self.ln_q).exp();
        if w < 0.5 {
            (-w).ln_1p()
        } else {
            self.one_minus_pow(x).ln()
        }
    }
}

/// `(z; q)_n = ∏_{i<n} (1 - z q^i)` for real `z`.
pub fn q_pochhammer(z: f64, q: QBase, n: u64) -> ScaledReal {
    q_pochhammer_scaled(ScaledReal::from_f64(z, q), n)
}

/// `(z; q)_n` for a scaled argument; the base is taken from `z`.
pub fn q_pochhammer_scaled(z: ScaledReal, n: u64) -> ScaledReal {
    let mut acc = ScaledReal::one(z.base());
    let minus_z = -z;
    for i in 0..n {
        acc = acc * minus_z.scale_q(i as i64).one_plus();
        if acc.is_zero() {
            break;
        }
    }
    acc
}

/// `(−θ; q)_n = ∏_{i<n} (1 + θ q^i)` for a scaled `θ`.
pub(crate) fn positive_pochhammer(theta: ScaledReal, n: u64) -> ScaledReal {
    q_pochhammer_scaled(-theta, n)
}

/// Sign, log-magnitude and smallest factor magnitude of `(z; q)_∞`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct InfiniteProduct {
    pub negative: bool,
    pub ln_abs: f64,
    pub min_factor: f64,
    pub min_index: u64,
}

pub(crate) fn infinite_product(z: f64, q: QBase) -> InfiniteProduct {
    let one_minus_q = 1.0 - q.value();
    let mut ln_sum = CompensatedSum::new();
    let mut negative = false;
    let mut min_factor = f64::INFINITY;
    let mut min_index = 0;
    let mut i: u64 = 0;
    loop {
        let w = z * q.powi(i as i64);
        let aw = w.abs();
        // remaining ∏_{j>=i}(1 - z q^j) has |ln| <= |w| / ((1-q)(1-|w|))
        if aw < 0.5 && aw / (one_minus_q * (1.0 - aw)) < TAIL_EPS {
            break;
        }
        let factor = 1.0 - w;
        if factor.abs() < min_factor {
            min_factor = factor.abs();
            min_index = i;
        }
        if factor == 0.0 {
            return InfiniteProduct {
                negative: false,
                ln_abs: f64::NEG_INFINITY,
                min_factor: 0.0,
                min_index: i,
            };
        }
        if factor < 0.0 {
            negative = !negative;
        }
        ln_sum.add(if aw < 0.5 {
            (-w).ln_1p()
        } else {
            factor.abs().ln()
        });
        i += 1;
    }
    InfiniteProduct {
        negative,
        ln_abs: ln_sum.value(),
        min_factor,
        min_index,
    }
}

/// `(z; q)_∞`.
pub fn q_pochhammer_inf(z: f64, q: QBase) -> f64 {
    let p = infinite_product(z, q);
    let mag = p.ln_abs.exp();
    if p.negative {
        -mag
    } else {
        mag
    }
}

/// `ln (z; q)_∞` for `z < 1`, where every factor is positive.
pub(crate) fn ln_q_pochhammer_inf(z: f64, q: QBase) -> f64 {
    debug_assert!(z < 1.0);
    infinite_product(z, q).ln_abs
}

/// `ln [n choose k]_q`, or `-inf` outside `0 <= k <= n`.
pub fn ln_q_binomial(n: u64, k: i64, q: QBase) -> f64 {
    if k < 0 || k as u64 > n {
        return f64::NEG_INFINITY;
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = CompensatedSum::new();
    for i in 1..=k {
        acc.add(q.ln_one_minus_pow((n - k + i) as f64));
        acc.add(-q.ln_one_minus_pow(i as f64));
    }
    acc.value()
}

/// The Gaussian binomial coefficient `(q;q)_n / ((q;q)_k (q;q)_{n-k})`,
/// zero outside `0 <= k <= n`.
pub fn q_binomial(n: u64, k: i64, q: QBase) -> f64 {
    ln_q_binomial(n, k, q).exp()
}

/// `ln (q; q)_j` for `j = 0..=n`.
pub(crate) fn ln_q_factorials(n: u64, q: QBase) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = CompensatedSum::new();
    out.push(0.0);
    for j in 1..=n {
        acc.add(q.ln_one_minus_pow(j as f64));
        out.push(acc.value());
    }
    out
}

/// The q-number `[x]_q = (1 - q^x) / (1 - q)`.
pub fn q_number(x: f64, q: QBase) -> f64 {
    q.one_minus_pow(x) / (1.0 - q.value())
}

/// Factors of `(z;q)_∞` closer to zero than this are treated as poles of `e_q`.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// The q-exponential `e_q(z) = 1 / (z; q)_∞`.
pub fn e_q(z: f64, q: QBase) -> Result<f64> {
    let p = infinite_product(z, q);
    if p.min_factor < POLE_TOLERANCE {
        return Err(Error::PoleProximity {
            z,
            index: p.min_index,
        });
    }
    let mag = (-p.ln_abs).exp();
    Ok(if p.negative { -mag } else { mag })
}

/// `ln e_q(z)` for `z < 1` (no poles, positive value).
pub(crate) fn ln_e_q(z: f64, q: QBase) -> f64 {
    -ln_q_pochhammer_inf(z, q)
}

/// The second q-exponential `E_q(z) = (−z; q)_∞`.
#[allow(non_snake_case)]
pub fn E_q(z: f64, q: QBase) -> f64 {
    q_pochhammer_inf(-z, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(v: f64) -> QBase {
        QBase::new(v).unwrap()
    }

    /// Plain truncated product, the independent oracle for the infinite
    /// products.
    fn naive_inf(z: f64, qv: f64, factors: usize) -> f64 {
        (0..factors).map(|i| 1.0 - z * qv.powi(i as i32)).product()
    }

    #[test]
    fn rejects_bad_base() {
        for v in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(QBase::new(v).is_err(), "{v}");
        }
    }

    #[test]
    fn finite_pochhammer_examples() {
        assert_eq!(q_pochhammer(0.7, q(0.5), 0).to_f64(), 1.0);
        assert!((q_pochhammer(0.5, q(0.5), 2).to_f64() - 0.375).abs() < 1e-15);
        assert!((q_pochhammer(-1.0, q(0.5), 3).to_f64() - 3.75).abs() < 1e-15);
        // a vanishing factor gives zero
        assert!(q_pochhammer(4.0, q(0.5), 5).is_zero());
    }

    #[test]
    fn infinite_pochhammer_examples() {
        assert_eq!(q_pochhammer_inf(0.0, q(0.5)), 1.0);
        let oracle = naive_inf(0.5, 0.5, 60);
        assert!((oracle - 0.2887880951).abs() < 1e-10);
        assert!((q_pochhammer_inf(0.5, q(0.5)) / oracle - 1.0).abs() < 1e-14);
        let oracle = naive_inf(-1.0, 0.5, 60);
        assert!((oracle - 4.768).abs() < 5e-4);
        assert!((q_pochhammer_inf(-1.0, q(0.5)) / oracle - 1.0).abs() < 1e-14);
    }

    #[test]
    fn infinite_pochhammer_matches_oracle_on_grid() {
        for &qv in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            for &z in &[-3.0, -1.0, -0.2, 0.1, 0.5, 0.95, 2.5] {
                let oracle = naive_inf(z, qv, 2000);
                let got = q_pochhammer_inf(z, q(qv));
                assert!(
                    (got - oracle).abs() <= 1e-13 * oracle.abs(),
                    "z={z} q={qv}: {got} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn q_binomial_examples() {
        assert_eq!(q_binomial(5, 0, q(0.3)), 1.0);
        // Gaussian polynomial 1 + q + 2q^2 + q^3 + q^4 at q = 1/2
        assert!((q_binomial(4, 2, q(0.5)) - 2.1875).abs() < 1e-14);
        assert_eq!(q_binomial(5, 2, q(0.3)), q_binomial(5, 3, q(0.3)));
        assert_eq!(q_binomial(5, 6, q(0.3)), 0.0);
        assert_eq!(q_binomial(5, -1, q(0.3)), 0.0);
    }

    #[test]
    fn q_binomial_matches_pochhammer_ratio() {
        let b = q(0.6);
        for n in 0..25u64 {
            for k in 0..=n {
                let via = q_pochhammer(0.6, b, n)
                    / (q_pochhammer(0.6, b, k) * q_pochhammer(0.6, b, n - k));
                let direct = q_binomial(n, k as i64, b);
                assert!((direct / via.to_f64() - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn q_number_examples() {
        assert_eq!(q_number(0.0, q(0.5)), 0.0);
        assert!((q_number(2.0, q(0.5)) - 1.5).abs() < 1e-15);
        assert!((q_number(3.0, q(0.999)) - 3.0).abs() < 0.01);
    }

    #[test]
    fn q_exponentials() {
        assert_eq!(e_q(0.0, q(0.5)).unwrap(), 1.0);
        assert_eq!(E_q(0.0, q(0.5)), 1.0);
        let prod = e_q(0.5, q(0.5)).unwrap() * E_q(-0.5, q(0.5));
        assert!((prod - 1.0).abs() < 1e-12);
        let qv = 0.999;
        let limit = e_q(1.0 - qv, q(qv)).unwrap();
        assert!((limit - std::f64::consts::E).abs() < 0.01);
    }

    #[test]
    fn e_q_guards_poles() {
        // z = q^{-2}
        let err = e_q(4.0, q(0.5)).unwrap_err();
        assert!(matches!(err, Error::PoleProximity { index: 2, .. }));
        // past the poles the sign alternates but the value is finite
        assert!(e_q(3.0, q(0.5)).unwrap().is_finite());
    }

    #[test]
    fn finite_products_tend_to_e_q() {
        // θ_n → θ  ⇒  ∏_{i<n}(1 + θ_n q^i) → E_q(θ), with error ≈ E_q'(θ)·|θ_n − θ|
        let b = q(0.5);
        let theta = 0.7;
        let gap = |theta_n: f64, n: u64| {
            (positive_pochhammer(ScaledReal::from_f64(theta_n, b), n).to_f64() - E_q(theta, b))
                .abs()
        };
        let (e3, e4) = (gap(theta + 1e-3, 1_000), gap(theta + 1e-4, 10_000));
        assert!(e4 < 1e-3);
        assert!((e3 / e4 - 10.0).abs() < 0.1, "{e3} {e4}");
        // a sequence converging like 1/n² is within 1e-6 at n = 10^4
        assert!(gap(theta + 1e-8, 10_000) < 1e-6);
    }

    proptest! {
        #[test]
        fn pochhammer_recurrence(z in -5.0f64..5.0, qv in 0.05f64..0.95, n in 0u64..80) {
            let b = q(qv);
            let lhs = q_pochhammer(z, b, n + 1);
            let w = z * qv.powi(n as i32);
            let rhs = q_pochhammer(z, b, n).to_f64() * (1.0 - w);
            let l = lhs.to_f64();
            // forming 1 − w loses |w / (1 − w)| ulps in either evaluation
            let cond = (w / (1.0 - w)).abs() * 4.0 * f64::EPSILON;
            let scale = l.abs().max(rhs.abs());
            prop_assert!((l - rhs).abs() <= (1e-14 + cond) * scale + f64::MIN_POSITIVE);
        }

        #[test]
        fn reflection_identity(z in 0.01f64..50.0, qv in 0.05f64..0.95, n in 0u64..31) {
            // ∏(1+zq^i) = q^{n(n-1)/2} z^n ∏(1 + (zq^i)^{-1})
            let b = q(qv);
            let zs = ScaledReal::from_f64(z, b);
            let lhs = positive_pochhammer(zs, n);
            let mut rhs = ScaledReal::q_power((n * n.saturating_sub(1) / 2) as f64, b)
                * zs.powi(n as i64);
            for i in 0..n {
                rhs = rhs * zs.scale_q(i as i64).recip().one_plus();
            }
            prop_assert!(((lhs / rhs).to_f64() - 1.0).abs() < 1e-12);
        }
    }
}
