//! Numbers of the form `±m · q^e` with an integer q-exponent.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use super::QBase;

/// A real number stored as `sign · mantissa · q^exponent`.
///
/// The mantissa is kept in `[1, 1/q)` (or is exactly 0 for zero), which makes
/// the representation canonical for a given base. Multiplying by an integer
/// power of `q` only touches the exponent, so values such as `θ q^{-n}` for
/// `n` in the thousands stay exact in their mantissa even though they are far
/// outside the `f64` range.
#[derive(Clone, Copy, PartialEq)]
pub struct ScaledReal {
    negative: bool,
    mantissa: f64,
    exponent: i64,
    base: QBase,
}

impl ScaledReal {
    pub fn zero(base: QBase) -> Self {
        ScaledReal {
            negative: false,
            mantissa: 0.0,
            exponent: 0,
            base,
        }
    }

    pub fn one(base: QBase) -> Self {
        Self::from_f64(1.0, base)
    }

    pub fn from_f64(x: f64, base: QBase) -> Self {
        Self::new(x, 0, base)
    }

    /// `value · q^exponent`, normalized.
    ///
    /// Panics if `value` is not finite.
    pub fn new(value: f64, exponent: i64, base: QBase) -> Self {
        assert!(
            value.is_finite(),
            "ScaledReal::new: non-finite value {value}"
        );
        if value == 0.0 {
            return Self::zero(base);
        }
        Self::normalized(value < 0.0, value.abs(), exponent, base)
    }

    /// `q^x` for real `x`.
    pub fn q_power(x: f64, base: QBase) -> Self {
        assert!(
            x.is_finite(),
            "ScaledReal::q_power: non-finite exponent {x}"
        );
        let whole = x.ceil();
        // x - ceil(x) lies in (-1, 0], so the mantissa lands in [1, 1/q)
        let mantissa = base.pow(x - whole);
        Self::normalized(false, mantissa, whole as i64, base)
    }

    /// Builds `sign · exp(ln_abs)` without ever forming `exp(ln_abs)` directly.
    pub fn from_ln(negative: bool, ln_abs: f64, base: QBase) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            return Self::zero(base);
        }
        assert!(
            ln_abs.is_finite(),
            "ScaledReal::from_ln: non-finite log {ln_abs}"
        );
        let j = (ln_abs / base.ln()).ceil();
        let mantissa = (ln_abs - j * base.ln()).exp();
        Self::normalized(negative, mantissa, j as i64, base)
    }

    fn normalized(negative: bool, mut m: f64, mut e: i64, base: QBase) -> Self {
        debug_assert!(m > 0.0);
        assert!(m.is_finite(), "ScaledReal: non-finite mantissa {m}");
        if m < f64::MIN_POSITIVE {
            let mut out = Self::from_ln(negative, m.ln(), base);
            out.exponent += e;
            return out;
        }
        let q = base.value();
        let inv_q = 1.0 / q;
        if !(1.0..inv_q).contains(&m) {
            // m = m' q^{-j} with m' in [1, 1/q)
            let j = (m.ln() / -base.ln()).floor() as i64;
            m = if j.abs() <= 64 && (j as f64 * base.ln()).abs() < 600.0 {
                m * q.powi(j as i32)
            } else {
                (m.ln() + j as f64 * base.ln()).exp()
            };
            e -= j;
            while m >= inv_q {
                m *= q;
                e -= 1;
            }
            while m < 1.0 {
                m /= q;
                e += 1;
            }
        }
        ScaledReal {
            negative,
            mantissa: m,
            exponent: e,
            base,
        }
    }

    pub fn base(&self) -> QBase {
        self.base
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn is_negative(&self) -> bool {
        self.negative && !self.is_zero()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    /// Natural log of the absolute value; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mantissa.ln() + self.exponent as f64 * self.base.ln()
    }

    /// Nearest `f64`; saturates to ±inf or 0 outside the binary64 range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.signum() * self.mantissa * self.base.powi(self.exponent)
    }

    /// Multiplies by `q^k`.
    pub fn scale_q(self, k: i64) -> Self {
        if self.is_zero() {
            return self;
        }
        ScaledReal {
            exponent: self.exponent + k,
            ..self
        }
    }

    pub fn mul_f64(self, x: f64) -> Self {
        self * Self::from_f64(x, self.base)
    }

    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "ScaledReal::recip of zero");
        Self::normalized(
            self.negative,
            1.0 / self.mantissa,
            -self.exponent,
            self.base,
        )
    }

    pub fn powi(self, k: i64) -> Self {
        if k == 0 {
            return Self::one(self.base);
        }
        if self.is_zero() {
            assert!(k > 0, "ScaledReal::powi: zero to a negative power");
            return self;
        }
        let negative = self.negative && k % 2 != 0;
        let ln_m = k as f64 * self.mantissa.ln();
        let mut out = Self::from_ln(negative, ln_m, self.base);
        out.exponent += k * self.exponent;
        out
    }

    /// `1 + self`, accurate for every magnitude of `self`.
    pub fn one_plus(self) -> Self {
        if self.is_zero() {
            return Self::one(self.base);
        }
        if self.ln_abs() >= 0.0 {
            // 1 + s = s (1 + 1/s) with |1/s| <= 1
            let inv = self.recip().to_f64();
            let factor = 1.0 + inv;
            if factor == 0.0 {
                return Self::zero(self.base);
            }
            self * Self::from_f64(factor, self.base)
        } else {
            Self::from_f64(1.0 + self.to_f64(), self.base)
        }
    }

    fn check_base(&self, other: &Self) {
        assert!(
            self.base == other.base,
            "ScaledReal: mixing bases q = {} and q = {}",
            self.base.value(),
            other.base.value()
        );
    }
}

impl Mul for ScaledReal {
    type Output = ScaledReal;

    fn mul(self, rhs: ScaledReal) -> ScaledReal {
        self.check_base(&rhs);
        if self.is_zero() || rhs.is_zero() {
            return ScaledReal::zero(self.base);
        }
        let negative = self.negative != rhs.negative;
        let m = self.mantissa * rhs.mantissa;
        let e = self.exponent + rhs.exponent;
        if m.is_finite() && m >= f64::MIN_POSITIVE {
            ScaledReal::normalized(negative, m, e, self.base)
        } else {
            let mut out =
                ScaledReal::from_ln(negative, self.mantissa.ln() + rhs.mantissa.ln(), self.base);
            out.exponent += e;
            out
        }
    }
}

impl Div for ScaledReal {
    type Output = ScaledReal;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: ScaledReal) -> ScaledReal {
        self * rhs.recip()
    }
}

impl Neg for ScaledReal {
    type Output = ScaledReal;

    fn neg(self) -> ScaledReal {
        if self.is_zero() {
            return self;
        }
        ScaledReal {
            negative: !self.negative,
            ..self
        }
    }
}

impl PartialOrd for ScaledReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.base != other.base {
            return None;
        }
        let (a, b) = (self.signum(), other.signum());
        if a != b || a == 0.0 {
            return a.partial_cmp(&b);
        }
        let by_magnitude = self.ln_abs().partial_cmp(&other.ln_abs())?;
        Some(if a > 0.0 {
            by_magnitude
        } else {
            by_magnitude.reverse()
        })
    }
}

impl fmt::Debug for ScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{:?}*q^{} (q={})",
            if self.negative { "-" } else { "" },
            self.mantissa,
            self.exponent,
            self.base.value()
        )
    }
}

impl fmt::Display for ScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if v.is_finite() && (v == 0.0 || v.abs() > 1e-300) {
            write!(f, "{v}")
        } else {
            write!(
                f,
                "{}{}*q^{}",
                if self.negative { "-" } else { "" },
                self.mantissa,
                self.exponent
            )
        }
    }
}
