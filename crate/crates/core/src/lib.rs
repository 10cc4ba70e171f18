//! Numerical machinery for the weighted Carleman inequality
//!
//! ```text
//!     Σ_n G_n ≤ C Σ_n a_n,     G_n = Π_{k≤n} a_k^{λ_k/Λ_n},   Λ_n = λ_1 + … + λ_n
//! ```
//!
//! The crate is organised by task:
//!
//! - [`weights`] and [`means`]: weight sequences, partial sums, log-space
//!   weighted geometric means and a direct inequality verifier.
//! - [`constants`]: finite-horizon estimates of the ratio-difference
//!   constant `L = sup (r_{n+1} - r_n)` and the log-ratio constant
//!   `M = sup r_n ln(r_{n+1}/r_n)` where `r_n = Λ_n/λ_n`.
//! - [`extremal`]: the exact best constant `μ_N` of the `N`-term inequality,
//!   obtained by bisection on the terminal condition of the Ω-recursion,
//!   together with the maximizing sequence and its stationarity residual.
//! - [`matrixnorm`]: weighted mean matrices as implicit operators and a
//!   nonlinear power method for lower bounds on their `l^p` norms.
//! - [`bennett`]: the verification pipeline for power weights `λ_k = k^α`,
//!   `0 < α < 1`.
//!
//! Indices in error values and reports are 1-based, matching the usual
//! mathematical notation; slices are 0-based as always.

pub mod bennett;
pub mod constants;
mod error;
pub mod extremal;
pub mod matrixnorm;
pub mod means;
pub mod sum;
pub mod weights;

pub use error::{Error, Result};
pub use means::{geometric_means, verify_inequality, GeometricMeans, TermSequence, VerifyReport};
pub use weights::{make_power_weights, profile, Generator, WeightProfile, WeightSequence};
