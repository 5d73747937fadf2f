//! Kemp's q-analogue of the binomial distribution and its limit family.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcalc`] holds the q-calculus primitives (q-Pochhammer symbols,
//!   Gaussian binomials, q-exponentials) and [`ScaledReal`], a
//!   mantissa/q-exponent number used wherever `θ q^{-n}` would overflow.
//! * [`distributions`] evaluates, tabulates and samples the Kemp binomial,
//!   Heine, discrete normal, binomial and Poisson laws.
//! * [`asymptotics`] implements the mean expansion `μ_n ≈ f(n) + c(β, q)` and
//!   the discrete-normal limit laws along constant-β subsequences.
//! * [`solvers`] couples θ to a prescribed mean or Poisson rate.
//! * [`metrics`] measures distances between lattice laws and runs the
//!   convergence sweeps.
//! * [`cli`] is the command-line front end used by the `qbinom` binary.

pub mod asymptotics;
pub mod cli;
pub mod distributions;
mod error;
pub mod metrics;
pub mod qcalc;
pub mod solvers;
mod sum;

pub use error::{Error, Result};
pub use qcalc::{QBase, ScaledReal};
