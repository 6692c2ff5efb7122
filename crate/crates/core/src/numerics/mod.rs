//! Dense linear algebra and random streams shared by the rest of the crate.

mod cholesky;
mod matrix;
mod rng;

pub use cholesky::{
    cho_solve, cho_solve_matrix, cholesky, cholesky_jittered, solve_lower, solve_upper_transposed,
    DEFAULT_JITTER,
};
pub use matrix::{dot, gemm, norm, squared_distance, Matrix};
pub use rng::Rng;
