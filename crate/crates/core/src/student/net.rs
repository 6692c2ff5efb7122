use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gemm, Matrix, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: &mut [f64]) {
        match self {
            Activation::Tanh => z.iter_mut().for_each(|v| *v = v.tanh()),
            Activation::Relu => z.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Identity => {}
        }
    }

    /// Multiplies `delta` in place by the derivative, given the activation
    /// output `a`.
    fn backprop(self, a: &[f64], delta: &mut [f64]) {
        match self {
            Activation::Tanh => {
                for (d, a) in delta.iter_mut().zip(a) {
                    *d *= 1.0 - a * a;
                }
            }
            Activation::Relu => {
                for (d, a) in delta.iter_mut().zip(a) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Activation::Identity => {}
        }
    }
}

/// Fully connected layer computing `act(x·W + b)`; `W` is `in×out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn input_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn param_count(&self) -> usize {
        self.weights.as_slice().len() + self.bias.len()
    }
}

/// Architecture description used to build a fresh network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl Architecture {
    /// 3 hidden tanh layers of width 128 and a linear output.
    pub fn toy() -> Self {
        Self {
            input_dim: 1,
            hidden: vec![128; 3],
            output_dim: 1,
            hidden_activation: Activation::Tanh,
            output_activation: Activation::Identity,
        }
    }
}

/// Multilayer perceptron split into a representation part (layers before
/// `repr_boundary`) and a prediction head (the remaining layers).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudentNet {
    layers: Vec<Layer>,
    repr_boundary: usize,
}

/// Activations of one forward pass over a batch: `acts[0]` is the input and
/// `acts[i + 1]` the output of layer `i`.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    acts: Vec<Matrix>,
    repr_boundary: usize,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.acts.last().expect("non-empty cache")
    }

    pub fn representation(&self) -> &Matrix {
        &self.acts[self.repr_boundary]
    }
}

const NET_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NetFile {
    format: String,
    version: u32,
    net: StudentNet,
}

impl StudentNet {
    pub fn from_layers(layers: Vec<Layer>, repr_boundary: usize) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::BadNetwork("no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::BadNetwork(format!(
                    "layer output {} feeds layer input {}",
                    pair[0].output_dim(),
                    pair[1].input_dim()
                )));
            }
        }
        for l in &layers {
            if l.bias.len() != l.output_dim() {
                return Err(Error::BadNetwork("bias length differs from layer width".into()));
            }
        }
        // a single layer has no head; its representation is the output itself
        let valid_boundary = if layers.len() == 1 {
            repr_boundary == 1
        } else {
            (1..layers.len()).contains(&repr_boundary)
        };
        if !valid_boundary {
            return Err(Error::BadNetwork(format!(
                "representation boundary {repr_boundary} outside 1..{}",
                layers.len()
            )));
        }
        Ok(Self {
            layers,
            repr_boundary,
        })
    }

    /// Fresh network with fan-in scaled uniform weights
    /// `U(-1/√fan_in, 1/√fan_in)`, the same range for biases. The
    /// representation is the output of the last hidden layer.
    pub fn new(arch: &Architecture, rng: &mut Rng) -> Result<Self> {
        let mut dims = vec![arch.input_dim];
        dims.extend(&arch.hidden);
        dims.push(arch.output_dim);
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::BadNetwork("zero-width layer".into()));
        }
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let (fan_in, fan_out) = (dims[i], dims[i + 1]);
                let limit = 1.0 / (fan_in as f64).sqrt();
                let weights =
                    Matrix::from_fn(fan_in, fan_out, |_, _| rng.uniform_range(-limit, limit));
                let bias = (0..fan_out).map(|_| rng.uniform_range(-limit, limit)).collect();
                let activation = if i + 1 == n {
                    arch.output_activation
                } else {
                    arch.hidden_activation
                };
                Layer {
                    weights,
                    bias,
                    activation,
                }
            })
            .collect();
        let boundary = if n == 1 { 1 } else { n - 1 };
        Self::from_layers(layers, boundary)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn repr_boundary(&self) -> usize {
        self.repr_boundary
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").output_dim()
    }

    pub fn repr_dim(&self) -> usize {
        self.layers[self.repr_boundary - 1].output_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// All parameters, layer by layer, weights (row-major) before bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    /// Inverse of [`StudentNet::params`].
    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::dim(self.param_count(), params.len(), "parameter vector"));
        }
        let mut off = 0;
        for l in &mut self.layers {
            let w = l.weights.as_mut_slice();
            w.copy_from_slice(&params[off..off + w.len()]);
            off += w.len();
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[off..off + nb]);
            off += nb;
        }
        Ok(())
    }

    pub fn squared_param_norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.as_slice().iter().chain(&l.bias))
            .map(|v| v * v)
            .sum()
    }

    /// Batched forward pass; rows of `inputs` are samples.
    pub fn forward_batch(&self, inputs: &Matrix) -> Result<ForwardCache> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::dim(self.input_dim(), inputs.cols(), "network input"));
        }
        let b = inputs.rows();
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(inputs.clone());
        for layer in &self.layers {
            let prev = acts.last().expect("input pushed");
            let mut z = Matrix::zeros(b, layer.output_dim());
            for i in 0..b {
                z.row_mut(i).copy_from_slice(&layer.bias);
            }
            gemm(1.0, prev, false, &layer.weights, false, 1.0, &mut z);
            layer.activation.apply(z.as_mut_slice());
            acts.push(z);
        }
        Ok(ForwardCache {
            acts,
            repr_boundary: self.repr_boundary,
        })
    }

    /// Single-sample forward pass returning `(output, representation, cache)`.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>, ForwardCache)> {
        let cache = self.forward_batch(&Matrix::from_vec(1, x.len(), x.to_vec())?)?;
        let out = cache.output().row(0).to_vec();
        let repr = cache.representation().row(0).to_vec();
        Ok((out, repr, cache))
    }

    pub fn predict(&self, inputs: &Matrix) -> Result<Matrix> {
        Ok(self.forward_batch(inputs)?.acts.pop().expect("output"))
    }

    /// ψ(x) for every row of `inputs`.
    pub fn represent(&self, inputs: &Matrix) -> Result<Matrix> {
        let mut cache = self.forward_batch(inputs)?;
        Ok(cache.acts.swap_remove(self.repr_boundary))
    }

    /// Backpropagates `output_delta` (∂loss/∂output for each batch row,
    /// already weighted) through the cached pass. Returns the flat parameter
    /// gradient in [`StudentNet::params`] order.
    pub(crate) fn backward(&self, cache: &ForwardCache, output_delta: Matrix) -> Vec<f64> {
        let mut grads: Vec<Option<(Matrix, Vec<f64>)>> = vec![None; self.layers.len()];
        let mut delta = output_delta;
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let out = &cache.acts[li + 1];
            layer.activation.backprop(out.as_slice(), delta.as_mut_slice());
            let input = &cache.acts[li];
            let mut dw = Matrix::zeros(layer.input_dim(), layer.output_dim());
            gemm(1.0, input, true, &delta, false, 0.0, &mut dw);
            let mut db = vec![0.0; layer.output_dim()];
            for row in delta.row_iter() {
                for (d, v) in db.iter_mut().zip(row) {
                    *d += v;
                }
            }
            if li > 0 {
                let mut next = Matrix::zeros(delta.rows(), layer.input_dim());
                gemm(1.0, &delta, false, &layer.weights, true, 0.0, &mut next);
                delta = next;
            }
            grads[li] = Some((dw, db));
        }
        let mut flat = Vec::with_capacity(self.param_count());
        for g in grads {
            let (dw, db) = g.expect("every layer visited");
            flat.extend_from_slice(dw.as_slice());
            flat.extend_from_slice(&db);
        }
        flat
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&NetFile {
            format: "fwl-student".into(),
            version: NET_FORMAT_VERSION,
            net: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetFile = serde_json::from_str(text)?;
        if file.version != NET_FORMAT_VERSION || file.format != "fwl-student" {
            return Err(Error::Version {
                found: file.version,
                expected: NET_FORMAT_VERSION,
            });
        }
        Self::from_layers(file.net.layers, file.net.repr_boundary)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
