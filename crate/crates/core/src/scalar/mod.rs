//! Scalars shared by every other module: the exact Clifford+T ring, dense
//! float matrices with the operator norm, and probability distributions.

pub mod distribution;
pub mod exact;
pub mod matrix;

pub use distribution::{tvd, tvd_unchecked, Mass, OutputDistribution};
pub use exact::{exact_mul, ExactAmplitude};
pub use matrix::{distance_mod_center, operator_norm, DenseMatrix, C64};
