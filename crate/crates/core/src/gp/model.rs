use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::KernelSpec;
use crate::numerics::{cho_solve_matrix, cholesky_jittered, solve_lower, Matrix, DEFAULT_JITTER};

/// Posterior mean (one entry per output dimension) and scalar variance.
///
/// All outputs share one kernel and one set of inputs, so the posterior
/// variance is the same for every output dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub variance: f64,
}

/// Exact GP regression fitted on `n` inputs with `p` independent outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    kernel: KernelSpec,
    jitter: f64,
    train_inputs: Matrix,
    train_targets: Matrix,
    chol_factor: Matrix,
    alpha: Matrix,
}

impl GpModel {
    /// Fits with the default diagonal jitter.
    pub fn fit(kernel: &KernelSpec, inputs: &Matrix, targets: &Matrix) -> Result<Self> {
        Self::fit_with_jitter(kernel, inputs, targets, DEFAULT_JITTER)
    }

    pub fn fit_with_jitter(
        kernel: &KernelSpec,
        inputs: &Matrix,
        targets: &Matrix,
        jitter: f64,
    ) -> Result<Self> {
        if inputs.rows() == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        if targets.rows() != inputs.rows() {
            return Err(Error::dim(inputs.rows(), targets.rows(), "gp targets rows"));
        }
        if inputs.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gp inputs"));
        }
        if targets.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gp targets"));
        }
        let gram = kernel.gram(inputs);
        let chol_factor = cholesky_jittered(&gram, jitter)?;
        let alpha = cho_solve_matrix(&chol_factor, targets)?;
        Ok(Self {
            kernel: kernel.clone(),
            jitter,
            train_inputs: inputs.clone(),
            train_targets: targets.clone(),
            chol_factor,
            alpha,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.input_dim() {
            return Err(Error::dim(self.input_dim(), x.len(), "gp query"));
        }
        let k_star = self.kernel.cross(&self.train_inputs, x);
        let p = self.output_dim();
        let mut mean = vec![0.0; p];
        for (i, k) in k_star.iter().enumerate() {
            for (m, a) in mean.iter_mut().zip(self.alpha.row(i)) {
                *m += k * a;
            }
        }
        let v = solve_lower(&self.chol_factor, &k_star)?;
        let explained: f64 = v.iter().map(|x| x * x).sum();
        let variance = (self.kernel.prior_variance(x) - explained).max(0.0);
        Ok(Prediction { mean, variance })
    }

    /// Checks that the stored state is internally consistent, e.g. after
    /// loading from disk.
    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.train_inputs.rows();
        if n == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        if self.chol_factor.shape() != (n, n) {
            return Err(Error::dim(n, self.chol_factor.rows(), "stored cholesky factor"));
        }
        if self.train_targets.rows() != n || self.alpha.shape() != self.train_targets.shape() {
            return Err(Error::dim(n, self.alpha.rows(), "stored alpha"));
        }
        Ok(())
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn train_inputs(&self) -> &Matrix {
        &self.train_inputs
    }

    pub fn train_targets(&self) -> &Matrix {
        &self.train_targets
    }

    pub fn chol_factor(&self) -> &Matrix {
        &self.chol_factor
    }

    pub fn alpha(&self) -> &Matrix {
        &self.alpha
    }

    pub fn input_dim(&self) -> usize {
        self.train_inputs.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.train_targets.cols()
    }
}
