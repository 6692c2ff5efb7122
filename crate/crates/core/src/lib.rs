//! Fidelity-weighted learning.
//!
//! A student network is pretrained on cheap, weakly annotated data. A
//! Gaussian-process teacher is then fit on a handful of strongly labeled
//! samples, in the student's learned representation space, and relabels the
//! whole pool with soft labels plus a per-sample uncertainty. Finally the
//! student is fine-tuned on the relabeled pool with each sample's step size
//! scaled by `exp(-beta * uncertainty)`.

pub mod data;
pub mod engine;
mod error;
pub mod experiments;
pub mod gp;
pub mod numerics;
pub mod stats;
pub mod student;

pub use error::{Error, Result};
pub use numerics::{Matrix, Rng};
