use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, squared_distance, Matrix};

/// One additive covariance term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelTerm {
    /// `exp(-r² / 2l²)`
    Rbf { length_scale: f64 },
    /// `(1 + √3 r/l) exp(-√3 r/l)`
    Matern32 { length_scale: f64 },
    /// `σ₀² + x·x'`
    Linear { sigma0: f64 },
    /// Observation noise: `noise_level` on the diagonal of the training Gram
    /// matrix, zero everywhere else.
    White { noise_level: f64 },
}

/// Sum of kernel terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    terms: Vec<KernelTerm>,
}

impl KernelSpec {
    pub fn new(terms: Vec<KernelTerm>) -> Result<Self> {
        if !terms.iter().any(|t| !matches!(t, KernelTerm::White { .. })) {
            return Err(Error::ConfigParse(
                "kernel needs at least one non-white term".into(),
            ));
        }
        for t in &terms {
            let ok = match *t {
                KernelTerm::Rbf { length_scale } | KernelTerm::Matern32 { length_scale } => {
                    length_scale > 0.0 && length_scale.is_finite()
                }
                KernelTerm::Linear { sigma0 } => sigma0.is_finite(),
                KernelTerm::White { noise_level } => noise_level >= 0.0 && noise_level.is_finite(),
            };
            if !ok {
                return Err(Error::ConfigParse(format!("invalid kernel term {t:?}")));
            }
        }
        Ok(Self { terms })
    }

    /// RBF(l=1) + White, the regression teacher.
    pub fn rbf_white(noise_level: f64) -> Self {
        Self::new(vec![
            KernelTerm::Rbf { length_scale: 1.0 },
            KernelTerm::White { noise_level },
        ])
        .expect("valid kernel")
    }

    /// Matern3/2(l=1) + Linear(σ₀=0) + White, the ranking teacher.
    pub fn matern_linear_white(noise_level: f64) -> Self {
        Self::new(vec![
            KernelTerm::Matern32 { length_scale: 1.0 },
            KernelTerm::Linear { sigma0: 0.0 },
            KernelTerm::White { noise_level },
        ])
        .expect("valid kernel")
    }

    /// RBF(l=1) + Linear(σ₀=0) + White, the classification teacher.
    pub fn rbf_linear_white(noise_level: f64) -> Self {
        Self::new(vec![
            KernelTerm::Rbf { length_scale: 1.0 },
            KernelTerm::Linear { sigma0: 0.0 },
            KernelTerm::White { noise_level },
        ])
        .expect("valid kernel")
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn has_linear(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, KernelTerm::Linear { .. }))
    }

    /// Kernel value. `same_training_row` marks a diagonal entry of the
    /// training Gram matrix, the only place the white term is active.
    pub fn eval(&self, x1: &[f64], x2: &[f64], same_training_row: bool) -> Result<f64> {
        if x1.len() != x2.len() {
            return Err(Error::dim(x1.len(), x2.len(), "kernel inputs"));
        }
        Ok(self.eval_unchecked(x1, x2, same_training_row))
    }

    pub(crate) fn eval_unchecked(&self, x1: &[f64], x2: &[f64], same_training_row: bool) -> f64 {
        let mut sq_dist = None;
        let mut total = 0.0;
        for term in &self.terms {
            total += match *term {
                KernelTerm::Rbf { length_scale } => {
                    let r2 = *sq_dist.get_or_insert_with(|| squared_distance(x1, x2));
                    (-r2 / (2.0 * length_scale * length_scale)).exp()
                }
                KernelTerm::Matern32 { length_scale } => {
                    let r2 = *sq_dist.get_or_insert_with(|| squared_distance(x1, x2));
                    let s = 3f64.sqrt() * r2.sqrt() / length_scale;
                    (1.0 + s) * (-s).exp()
                }
                KernelTerm::Linear { sigma0 } => sigma0 * sigma0 + dot(x1, x2),
                KernelTerm::White { noise_level } => {
                    if same_training_row {
                        noise_level
                    } else {
                        0.0
                    }
                }
            };
        }
        total
    }

    /// Training Gram matrix, white noise on the diagonal.
    pub fn gram(&self, inputs: &Matrix) -> Matrix {
        let n = inputs.rows();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.eval_unchecked(inputs.row(i), inputs.row(j), i == j);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    /// Cross-covariances `k(x_i, x)` between every training row and `x`.
    pub fn cross(&self, inputs: &Matrix, x: &[f64]) -> Vec<f64> {
        inputs
            .row_iter()
            .map(|row| self.eval_unchecked(row, x, false))
            .collect()
    }

    /// Prior variance `k(x, x)` at a query point (no white term).
    pub fn prior_variance(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x, x, false)
    }
}
