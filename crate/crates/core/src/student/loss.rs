use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::softmax;
use crate::numerics::Matrix;
use crate::student::StudentNet;

/// Floor applied to probabilities before taking logs.
pub const LOG_CLIP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Mean of squared errors over output dimensions.
    Mse,
    /// Cross-entropy between a (possibly soft) target distribution and the
    /// softmax of the network output.
    CrossEntropy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    /// Coefficient of the `λ‖w‖²` penalty over all parameters.
    pub l2: f64,
}

impl LossSpec {
    pub fn mse() -> Self {
        Self {
            kind: LossKind::Mse,
            l2: 0.0,
        }
    }

    pub fn cross_entropy() -> Self {
        Self {
            kind: LossKind::CrossEntropy,
            l2: 0.0,
        }
    }

    pub fn with_l2(mut self, l2: f64) -> Self {
        self.l2 = l2;
        self
    }

    /// Per-sample loss and its gradient with respect to the network output.
    fn sample(&self, output: &[f64], target: &[f64], grad: &mut [f64]) -> f64 {
        match self.kind {
            LossKind::Mse => {
                let p = output.len() as f64;
                let mut loss = 0.0;
                for ((g, o), t) in grad.iter_mut().zip(output).zip(target) {
                    let r = o - t;
                    loss += r * r;
                    *g = 2.0 * r / p;
                }
                loss / p
            }
            LossKind::CrossEntropy => {
                let probs = softmax(output);
                let mut loss = 0.0;
                // ∂/∂z_j of -Σ_k y_k log(max(s_k, clip)); clipped entries
                // contribute nothing to the gradient
                let mut live_mass = 0.0;
                for (k, (&s, &y)) in probs.iter().zip(target).enumerate() {
                    if s > LOG_CLIP {
                        loss -= y * s.ln();
                        live_mass += y;
                        grad[k] = -y;
                    } else {
                        loss -= y * LOG_CLIP.ln();
                        grad[k] = 0.0;
                    }
                }
                for (g, s) in grad.iter_mut().zip(&probs) {
                    *g += s * live_mass;
                }
                loss
            }
        }
    }

    fn check_target(&self, target: &[f64]) -> Result<()> {
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target"));
        }
        if self.kind == LossKind::CrossEntropy {
            let sum: f64 = target.iter().sum();
            if (sum - 1.0).abs() > 1e-6 || target.iter().any(|&v| v < 0.0) {
                return Err(Error::NonDistributionTarget { sum });
            }
        }
        Ok(())
    }
}

/// Loss and flat parameter gradient over a batch.
///
/// With `weights = None` every row counts `1/b`; otherwise row `i` counts
/// `weights[i]`. The penalty gradient `2λw` is added once. The returned loss
/// is the plain (unweighted) mean data loss.
pub fn batch_loss_and_grad(
    net: &StudentNet,
    inputs: &Matrix,
    targets: &Matrix,
    weights: Option<&[f64]>,
    spec: &LossSpec,
) -> Result<(f64, Vec<f64>)> {
    let b = inputs.rows();
    if b == 0 {
        return Err(Error::EmptyDataset);
    }
    if targets.rows() != b {
        return Err(Error::dim(b, targets.rows(), "target rows"));
    }
    if targets.cols() != net.output_dim() {
        return Err(Error::dim(net.output_dim(), targets.cols(), "target dimension"));
    }
    if let Some(w) = weights {
        if w.len() != b {
            return Err(Error::dim(b, w.len(), "sample weights"));
        }
    }
    let cache = net.forward_batch(inputs)?;
    let out = cache.output();
    let mut delta = Matrix::zeros(b, out.cols());
    let uniform = 1.0 / b as f64;
    let mut total = 0.0;
    for i in 0..b {
        let target = targets.row(i);
        spec.check_target(target)?;
        let l = spec.sample(out.row(i), target, delta.row_mut(i));
        total += l;
        let w = weights.map_or(uniform, |w| w[i]);
        delta.row_mut(i).iter_mut().for_each(|d| *d *= w);
    }
    let mut grad = net.backward(&cache, delta);
    if spec.l2 > 0.0 {
        for (g, p) in grad.iter_mut().zip(net.params()) {
            *g += 2.0 * spec.l2 * p;
        }
    }
    Ok((total / b as f64, grad))
}

/// Single-sample loss `l + λ‖w‖²` and its exact gradient.
pub fn loss_and_grad(
    net: &StudentNet,
    x: &[f64],
    target: &[f64],
    spec: &LossSpec,
) -> Result<(f64, Vec<f64>)> {
    let inputs = Matrix::from_vec(1, x.len(), x.to_vec())?;
    let targets = Matrix::from_vec(1, target.len(), target.to_vec())?;
    let (data, grad) = batch_loss_and_grad(net, &inputs, &targets, None, spec)?;
    Ok((data + spec.l2 * net.squared_param_norm(), grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use crate::student::{Activation, Architecture};

    fn small_net(seed: u64, out_act: Activation) -> StudentNet {
        let arch = Architecture {
            input_dim: 2,
            hidden: vec![3],
            output_dim: 2,
            hidden_activation: Activation::Tanh,
            output_activation: out_act,
        };
        StudentNet::new(&arch, &mut Rng::new(seed)).unwrap()
    }

    #[test]
    fn mse_at_target_is_only_penalty() {
        let net = small_net(1, Activation::Identity);
        let x = [0.3, -0.2];
        let target = net.forward(&x).unwrap().0;
        let (loss, _) = loss_and_grad(&net, &x, &target, &LossSpec::mse()).unwrap();
        assert_eq!(loss, 0.0);
        let spec = LossSpec::mse().with_l2(0.1);
        let (loss, _) = loss_and_grad(&net, &x, &target, &spec).unwrap();
        assert!((loss - 0.1 * net.squared_param_norm()).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_near_zero_on_confident_match() {
        // logits (40, 0) give softmax ≈ (1, 4e-18): loss = -ln(1 - 4e-18) ≈ 0
        let net = StudentNet::from_layers(
            vec![crate::student::Layer {
                weights: Matrix::from_rows(&[[40.0, 0.0]]).unwrap(),
                bias: vec![0.0, 0.0],
                activation: Activation::Identity,
            }],
            1,
        )
        .unwrap();
        let (loss, grad) =
            loss_and_grad(&net, &[1.0], &[1.0, 0.0], &LossSpec::cross_entropy()).unwrap();
        assert!(loss <= 1e-9, "loss {loss}");
        assert!(grad.iter().all(|g| g.abs() < 1e-9));
    }

    #[test]
    fn cross_entropy_rejects_non_distribution() {
        let net = small_net(2, Activation::Identity);
        let r = loss_and_grad(&net, &[0.0, 0.0], &[0.5, 0.6], &LossSpec::cross_entropy());
        assert!(matches!(r, Err(Error::NonDistributionTarget { .. })));
        let r = loss_and_grad(&net, &[0.0, 0.0], &[0.5], &LossSpec::mse());
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn weighted_batch_is_weighted_sum_of_samples() {
        let net = small_net(3, Activation::Identity);
        let x = Matrix::from_rows(&[[0.1, 0.2], [-0.5, 0.9], [1.0, -1.0]]).unwrap();
        let y = Matrix::from_rows(&[[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]).unwrap();
        let w = [0.2, 0.5, 0.3];
        for spec in [LossSpec::mse(), LossSpec::cross_entropy()] {
            let (_, batch) = batch_loss_and_grad(&net, &x, &y, Some(&w), &spec).unwrap();
            let mut expected = vec![0.0; batch.len()];
            for i in 0..3 {
                let (_, g) = loss_and_grad(&net, x.row(i), y.row(i), &spec).unwrap();
                for (e, g) in expected.iter_mut().zip(g) {
                    *e += w[i] * g;
                }
            }
            for (a, b) in batch.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }
}
