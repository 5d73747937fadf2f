//! Lattice laws: Kemp's q-binomial, its Heine and discrete-normal limits,
//! and the classical binomial and Poisson laws used as references.
//!
//! Every law can be evaluated pointwise and tabulated into a [`PmfTable`].
//! Infinite-support laws are cut off by a certified tail bound and the table
//! records the mass it actually captured.

mod dnorm;
mod heine;
mod kemp;
mod reference;
mod sampling;
mod table;

use serde::{Deserialize, Serialize};

pub use dnorm::DiscreteNormal;
pub use heine::Heine;
pub(crate) use kemp::bernoulli_pair;
#[cfg(test)]
pub(crate) use kemp::kb_mean;
pub use kemp::{BernoulliSumSampler, KempBinomial};
pub use reference::{Binomial, Poisson};
pub use sampling::{sample_by_inversion, InversionSampler};
pub use table::{format_sig17, PmfTable};

/// Default truncation tolerance for infinite-support tables.
pub const TAIL_TOLERANCE: f64 = 1e-15;

/// A probability law on the integers.
pub trait LatticeLaw {
    /// `P(X = x)`.
    fn pmf(&self, x: i64) -> f64;

    /// A finite table whose uncaptured mass is at most `tol`.
    fn table(&self, tol: f64) -> PmfTable;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub mean: f64,
    pub variance: f64,
}
