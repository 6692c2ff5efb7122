use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{KernelSpec, Task};
use crate::student::{Activation, Architecture, LossKind};

/// Training strategies: the proposed method, its variants and baselines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// The weak annotator itself, no training.
    #[serde(rename = "WA")]
    WeakAnnotator,
    /// Student trained on weak data only.
    #[serde(rename = "NN_W")]
    NnWeak,
    /// Student trained on strong data only.
    #[serde(rename = "NN_S")]
    NnStrong,
    /// Alternating weak batches (without replacement) and strong batches
    /// (with replacement).
    #[serde(rename = "NN_SplusW")]
    NnStrongPlusWeak,
    /// Weak pretraining, then fine-tuning on strong data.
    #[serde(rename = "NN_WtoS")]
    NnWeakToStrong,
    /// Weak pretraining at a constant step-size factor ω, then fine-tuning
    /// on strong data.
    #[serde(rename = "NN_WomegaToS")]
    NnWeakOmegaToStrong,
    /// Teacher on raw inputs, fresh student trained on the soft set.
    #[serde(rename = "FWL_unsuprep")]
    FwlUnsupRep,
    /// Full pipeline without confidence modulation.
    #[serde(rename = "FWL_noSigma")]
    FwlNoSigma,
    #[serde(rename = "FWL")]
    Fwl,
    /// Full pipeline; confidences drive minibatch sampling instead of the
    /// step size.
    #[serde(rename = "FWL_s")]
    FwlSampling,
}

impl Strategy {
    pub const ALL: [Strategy; 10] = [
        Strategy::WeakAnnotator,
        Strategy::NnWeak,
        Strategy::NnStrong,
        Strategy::NnStrongPlusWeak,
        Strategy::NnWeakToStrong,
        Strategy::NnWeakOmegaToStrong,
        Strategy::FwlUnsupRep,
        Strategy::FwlNoSigma,
        Strategy::Fwl,
        Strategy::FwlSampling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::WeakAnnotator => "WA",
            Strategy::NnWeak => "NN_W",
            Strategy::NnStrong => "NN_S",
            Strategy::NnStrongPlusWeak => "NN_SplusW",
            Strategy::NnWeakToStrong => "NN_WtoS",
            Strategy::NnWeakOmegaToStrong => "NN_WomegaToS",
            Strategy::FwlUnsupRep => "FWL_unsuprep",
            Strategy::FwlNoSigma => "FWL_noSigma",
            Strategy::Fwl => "FWL",
            Strategy::FwlSampling => "FWL_s",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::ConfigParse(format!("unknown strategy `{s}`")))
    }
}

/// Space the teacher works in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeacherInput {
    RawInput,
    StudentRepr,
}

/// Everything that determines one training run.
///
/// Stage budgets are optimizer steps, so fine-tuning on a handful of strong
/// samples and on the full soft set performs the same number of updates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub strategy: Strategy,
    pub beta: f64,
    pub pretrain_steps: usize,
    pub finetune_steps: usize,
    pub batch_size: usize,
    pub base_rate: f64,
    pub l2: f64,
    pub seed: u64,
    pub teacher_input: TeacherInput,
    /// Teacher cluster count; `None` means `max(1, ⌊n_strong / 10⌋)`.
    pub clusters: Option<usize>,
    /// Constant step-size factor for `NN_WomegaToS`; `None` means the mean
    /// fidelity of the FWL run with the same seed.
    pub omega: Option<f64>,
    pub white_noise: f64,
    pub gp_jitter: f64,
    /// Teacher kernel; `None` picks RBF+White for regression and
    /// RBF+Linear+White for classification.
    pub kernel: Option<KernelSpec>,
    pub architecture: Architecture,
    pub loss: LossKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Fwl,
            beta: 1.0,
            pretrain_steps: 1000,
            finetune_steps: 3000,
            batch_size: 10,
            base_rate: 1e-3,
            l2: 0.0,
            seed: 0,
            teacher_input: TeacherInput::StudentRepr,
            clusters: None,
            omega: None,
            white_noise: 0.01,
            gp_jitter: crate::numerics::DEFAULT_JITTER,
            kernel: None,
            architecture: Architecture::toy(),
            loss: LossKind::Mse,
        }
    }
}

impl TrainConfig {
    /// Settings for the synthetic blob classification task.
    pub fn classification(classes: usize, input_dim: usize) -> Self {
        Self {
            architecture: Architecture {
                input_dim,
                hidden: vec![32, 32],
                output_dim: classes,
                hidden_activation: Activation::Tanh,
                output_activation: Activation::Identity,
            },
            loss: LossKind::CrossEntropy,
            batch_size: 20,
            base_rate: 3e-3,
            pretrain_steps: 1500,
            finetune_steps: 600,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigParse(m.to_string()));
        if !(self.beta >= 0.0) || !self.beta.is_finite() && self.beta != f64::INFINITY {
            return bad("beta must be >= 0");
        }
        if let Some(w) = self.omega {
            if !(0.0..=1.0).contains(&w) {
                return bad("omega must lie in [0, 1]");
            }
        }
        if self.clusters == Some(0) {
            return bad("cluster count must be >= 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be >= 1");
        }
        if !(self.base_rate > 0.0) {
            return bad("base rate must be > 0");
        }
        if !(self.l2 >= 0.0) {
            return bad("l2 must be >= 0");
        }
        if !(self.white_noise >= 0.0) || !(self.gp_jitter >= 0.0) {
            return bad("noise and jitter must be >= 0");
        }
        Ok(())
    }

    pub fn teacher_kernel(&self, task: Task) -> KernelSpec {
        self.kernel.clone().unwrap_or_else(|| match task {
            Task::Regression => KernelSpec::rbf_white(self.white_noise),
            Task::Classification => KernelSpec::rbf_linear_white(self.white_noise),
        })
    }

    pub fn cluster_count(&self, n_strong: usize) -> usize {
        self.clusters
            .unwrap_or_else(|| (n_strong / 10).max(1))
            .min(n_strong.max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
        let err = "NN_X".parse::<Strategy>().unwrap_err();
        assert!(err.to_string().contains("NN_X"));
    }

    #[test]
    fn config_defaults_fill_missing_fields() {
        let c: TrainConfig = serde_json::from_str(r#"{"beta": 2.0, "strategy": "NN_WtoS"}"#).unwrap();
        assert_eq!(c.beta, 2.0);
        assert_eq!(c.strategy, Strategy::NnWeakToStrong);
        assert_eq!(c.base_rate, 1e-3);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"betta": 2.0}"#).is_err());
    }

    #[test]
    fn validation_and_cluster_default() {
        let c = TrainConfig::default();
        assert!(c.validate().is_ok());
        assert_eq!(c.cluster_count(10), 1);
        assert_eq!(c.cluster_count(57), 5);
        assert_eq!(c.cluster_count(5), 1);
        assert!(TrainConfig { beta: -1.0, ..c.clone() }.validate().is_err());
        assert!(TrainConfig { omega: Some(1.5), ..c.clone() }.validate().is_err());
        assert!(TrainConfig { clusters: Some(0), ..c }.validate().is_err());
    }
}
