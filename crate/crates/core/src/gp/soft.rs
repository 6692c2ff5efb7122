use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output space of a learning problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification,
}

/// A teacher output mapped into label space.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftPrediction {
    /// Soft label.
    pub label: Vec<f64>,
    /// Scalar uncertainty, `>= 0`.
    pub sigma: f64,
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Maps a posterior mean and per-dimension variances to a soft label and a
/// scalar uncertainty. Regression keeps the mean; classification takes its
/// softmax. The uncertainty is the mean of the variances (for a single
/// output, the variance itself).
pub fn to_soft(mean: &[f64], variances: &[f64], task: Task) -> Result<SoftPrediction> {
    if mean.is_empty() {
        return Err(Error::BadDimension {
            got: 0,
            reason: "empty posterior mean",
        });
    }
    if variances.len() != mean.len() {
        return Err(Error::dim(mean.len(), variances.len(), "variance vector"));
    }
    let label = match task {
        Task::Regression => mean.to_vec(),
        Task::Classification => {
            if mean.len() < 2 {
                return Err(Error::BadDimension {
                    got: mean.len(),
                    reason: "classification needs at least two classes",
                });
            }
            softmax(mean)
        }
    };
    let sigma = variances.iter().sum::<f64>() / variances.len() as f64;
    if !(sigma >= 0.0) {
        return Err(Error::NegativeInput("posterior variance"));
    }
    Ok(SoftPrediction { label, sigma })
}
