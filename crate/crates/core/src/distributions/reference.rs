use super::{LatticeLaw, PmfTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binomial {
    n: u64,
    p: f64,
}

impl Binomial {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "binomial p must lie in [0, 1], got {p}"
            )));
        }
        Ok(Binomial { n, p })
    }

    pub fn pmf(&self, x: i64) -> f64 {
        if x < 0 || x as u64 > self.n {
            return 0.0;
        }
        let (n, k) = (self.n, x as u64);
        // 0^0 = 1 at the endpoints p = 0 and p = 1
        if self.p == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        if self.p == 1.0 {
            return if k == n { 1.0 } else { 0.0 };
        }
        let m = k.min(n - k);
        let ln_choose: f64 = (1..=m).map(|i| ((n - m + i) as f64 / i as f64).ln()).sum();
        (ln_choose + k as f64 * self.p.ln() + (n - k) as f64 * (-self.p).ln_1p()).exp()
    }

    pub fn table(&self) -> PmfTable {
        let probs = (0..=self.n as i64).map(|x| self.pmf(x)).collect();
        PmfTable::new(0, probs).expect("binomial probabilities are valid")
    }
}

impl LatticeLaw for Binomial {
    fn pmf(&self, x: i64) -> f64 {
        Binomial::pmf(self, x)
    }

    fn table(&self, _tol: f64) -> PmfTable {
        Binomial::table(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poisson {
    lambda: f64,
}

impl Poisson {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::invalid(format!(
                "Poisson rate must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(Poisson { lambda })
    }

    fn ln_pmf(&self, x: u64, ln_fact: f64) -> f64 {
        x as f64 * self.lambda.ln() - ln_fact - self.lambda
    }

    pub fn pmf(&self, x: i64) -> f64 {
        if x < 0 {
            return 0.0;
        }
        if self.lambda == 0.0 {
            return if x == 0 { 1.0 } else { 0.0 };
        }
        let ln_fact: f64 = (2..=x as u64).map(|i| (i as f64).ln()).sum();
        self.ln_pmf(x as u64, ln_fact).exp()
    }

    pub fn table(&self, tol: f64) -> PmfTable {
        if self.lambda == 0.0 {
            return PmfTable::point_mass(0);
        }
        let mut probs = Vec::new();
        let mut ln_fact = 0.0;
        let mut x: u64 = 0;
        loop {
            if x > 1 {
                ln_fact += (x as f64).ln();
            }
            let p = self.ln_pmf(x, ln_fact).exp();
            probs.push(p);
            let ratio = self.lambda / (x + 1) as f64;
            if ratio < 1.0 && p * ratio / (1.0 - ratio) < tol {
                break;
            }
            x += 1;
        }
        PmfTable::new(0, probs).expect("Poisson probabilities are valid")
    }
}

impl LatticeLaw for Poisson {
    fn pmf(&self, x: i64) -> f64 {
        Poisson::pmf(self, x)
    }

    fn table(&self, tol: f64) -> PmfTable {
        Poisson::table(self, tol)
    }
}
