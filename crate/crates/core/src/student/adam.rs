use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::student::StudentNet;

/// Adam moments and hyperparameters for one network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub base_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(param_count: usize, base_rate: f64) -> Self {
        Self {
            base_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
            step: 0,
        }
    }

    pub fn for_net(net: &StudentNet, base_rate: f64) -> Self {
        Self::new(net.param_count(), base_rate)
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.second_moment
    }
}

/// One Adam update whose parameter delta is scaled by `fidelity`.
///
/// The moments see the unscaled gradient; only the final step
/// `-η₁·m̂/(√v̂ + ε)` is multiplied by `fidelity`, so the effective rate is
/// `η₁·fidelity`.
pub fn adam_step(
    net: &mut StudentNet,
    state: &mut AdamState,
    grads: &[f64],
    fidelity: f64,
) -> Result<()> {
    if grads.len() != net.param_count() || state.first_moment.len() != grads.len() {
        return Err(Error::dim(net.param_count(), grads.len(), "adam gradient"));
    }
    if !(fidelity > 0.0 && fidelity <= 1.0) {
        return Err(Error::BadFidelity(fidelity));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient);
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let bias1 = 1.0 - b1.powi(t);
    let bias2 = 1.0 - b2.powi(t);

    let mut off = 0;
    for layer in net.layers_mut() {
        for p in layer
            .weights
            .as_mut_slice()
            .iter_mut()
            .chain(layer.bias.iter_mut())
        {
            let g = grads[off];
            let m = &mut state.first_moment[off];
            let v = &mut state.second_moment[off];
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            let delta = -state.base_rate * m_hat / (v_hat.sqrt() + state.epsilon);
            *p += fidelity * delta;
            off += 1;
        }
    }
    Ok(())
}
