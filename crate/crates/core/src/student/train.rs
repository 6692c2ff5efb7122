use crate::data::LabeledSet;
use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::student::{adam_step, batch_loss_and_grad, AdamState, LossSpec, StudentNet};

/// One minibatch update over the rows `batch` of `data`.
///
/// Without fidelities this is a plain Adam step on the mean gradient. With
/// per-sample fidelities `f_i`, each sample's gradient is weighted by its
/// `f_i` (normalized by the batch total) and the resulting Adam delta is
/// scaled by the batch mean fidelity. For a single-sample batch that is
/// exactly an Adam step at rate `η₁·f_i`; a batch with zero total fidelity
/// leaves the network and optimizer untouched.
///
/// Returns the unweighted mean data loss of the batch.
pub fn train_step(
    net: &mut StudentNet,
    state: &mut AdamState,
    data: &LabeledSet,
    batch: &[usize],
    fidelities: Option<&[f64]>,
    spec: &LossSpec,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let inputs = data.inputs().select_rows(batch);
    let targets = data.labels().select_rows(batch);
    let Some(fid) = fidelities else {
        let (loss, grad) = batch_loss_and_grad(net, &inputs, &targets, None, spec)?;
        adam_step(net, state, &grad, 1.0)?;
        return Ok(loss);
    };

    let f: Vec<f64> = batch.iter().map(|&i| fid[i]).collect();
    if f.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::BadFidelity(
            f.into_iter().find(|v| !(0.0..=1.0).contains(v)).unwrap_or(f64::NAN),
        ));
    }
    let total: f64 = f.iter().sum();
    if total == 0.0 {
        let (loss, _) = batch_loss_and_grad(net, &inputs, &targets, None, spec)?;
        return Ok(loss);
    }
    let weights: Vec<f64> = f.iter().map(|v| v / total).collect();
    let (loss, grad) = batch_loss_and_grad(net, &inputs, &targets, Some(&weights), spec)?;
    let mean_fidelity = (total / f.len() as f64).min(1.0);
    adam_step(net, state, &grad, mean_fidelity)?;
    Ok(loss)
}

/// Shuffled minibatch training. Returns the mean training loss of each
/// epoch. `fidelities`, when given, holds one value in `[0, 1]` per sample.
#[allow(clippy::too_many_arguments)]
pub fn train_epochs(
    net: &mut StudentNet,
    data: &LabeledSet,
    spec: &LossSpec,
    state: &mut AdamState,
    fidelities: Option<&[f64]>,
    epochs: usize,
    batch_size: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if let Some(f) = fidelities {
        if f.len() != n {
            return Err(Error::dim(n, f.len(), "fidelities"));
        }
    }
    let bs = batch_size.clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        for batch in order.chunks(bs) {
            total += batch.len() as f64 * train_step(net, state, data, batch, fidelities, spec)?;
        }
        trace.push(total / n as f64);
    }
    Ok(trace)
}

/// Like [`train_epochs`] but stops after exactly `steps` minibatch updates;
/// the last epoch may be partial. Returns the mean loss of each (possibly
/// partial) epoch.
#[allow(clippy::too_many_arguments)]
pub fn train_steps(
    net: &mut StudentNet,
    data: &LabeledSet,
    spec: &LossSpec,
    state: &mut AdamState,
    fidelities: Option<&[f64]>,
    steps: usize,
    batch_size: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if let Some(f) = fidelities {
        if f.len() != n {
            return Err(Error::dim(n, f.len(), "fidelities"));
        }
    }
    let bs = batch_size.clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::new();
    let mut remaining = steps;
    while remaining > 0 {
        rng.shuffle(&mut order);
        let (mut total, mut seen) = (0.0, 0usize);
        for batch in order.chunks(bs).take(remaining) {
            total += batch.len() as f64 * train_step(net, state, data, batch, fidelities, spec)?;
            seen += batch.len();
            remaining -= 1;
        }
        trace.push(total / seen as f64);
    }
    Ok(trace)
}

/// Draws indices with probability proportional to fixed nonnegative weights.
#[derive(Clone, Debug)]
pub struct WeightedSampler {
    cumulative: Vec<f64>,
}

impl WeightedSampler {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::NegativeInput("sampling weight"));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if acc <= 0.0 {
            return Err(Error::NegativeInput("sampling weights sum to zero"));
        }
        Ok(Self { cumulative })
    }

    /// Normalized sampling probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total();
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|c| {
                let p = (c - prev) / total;
                prev = *c;
                p
            })
            .collect()
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn sample(&self, rng: &mut Rng) -> usize {
        let u = rng.uniform() * self.total();
        // first index whose cumulative weight exceeds u; zero-weight entries
        // share their predecessor's cumulative value and are never chosen
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1)
    }
}

/// Training where each minibatch is drawn with replacement according to
/// `sampler`, with uniform step size. An epoch is `⌈n / batch_size⌉` batches.
#[allow(clippy::too_many_arguments)]
pub fn train_weighted_sampling(
    net: &mut StudentNet,
    data: &LabeledSet,
    spec: &LossSpec,
    state: &mut AdamState,
    sampler: &WeightedSampler,
    epochs: usize,
    batch_size: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if sampler.cumulative.len() != n {
        return Err(Error::dim(n, sampler.cumulative.len(), "sampler weights"));
    }
    let bs = batch_size.clamp(1, n);
    let batches = n.div_ceil(bs);
    let mut trace = Vec::with_capacity(epochs);
    let mut batch = vec![0usize; bs];
    for _ in 0..epochs {
        let mut total = 0.0;
        for _ in 0..batches {
            batch.iter_mut().for_each(|b| *b = sampler.sample(rng));
            total += train_step(net, state, data, &batch, None, spec)?;
        }
        trace.push(total / batches as f64);
    }
    Ok(trace)
}

/// Weighted-sampling training for exactly `steps` minibatches of
/// `batch_size` draws. Returns the loss of every block of `⌈n / batch_size⌉`
/// batches (the last block may be shorter).
#[allow(clippy::too_many_arguments)]
pub fn train_weighted_steps(
    net: &mut StudentNet,
    data: &LabeledSet,
    spec: &LossSpec,
    state: &mut AdamState,
    sampler: &WeightedSampler,
    steps: usize,
    batch_size: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if sampler.cumulative.len() != n {
        return Err(Error::dim(n, sampler.cumulative.len(), "sampler weights"));
    }
    let bs = batch_size.clamp(1, n);
    let per_block = n.div_ceil(bs);
    let mut batch = vec![0usize; bs];
    let mut trace = Vec::new();
    let mut remaining = steps;
    while remaining > 0 {
        let count = per_block.min(remaining);
        let mut total = 0.0;
        for _ in 0..count {
            batch.iter_mut().for_each(|b| *b = sampler.sample(rng));
            total += train_step(net, state, data, &batch, None, spec)?;
        }
        remaining -= count;
        trace.push(total / count as f64);
    }
    Ok(trace)
}
