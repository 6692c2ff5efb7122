use serde::{Deserialize, Serialize};

use crate::data::annotator::{toy_true, Annotator, AnnotatorSpec};
use crate::data::{LabeledSet, Tier};
use crate::error::{Error, Result};
use crate::gp::Task;
use crate::numerics::{Matrix, Rng};

/// Weak, strong and test data for one experiment, plus the annotator that
/// produced the weak labels.
#[derive(Clone, Debug)]
pub struct Problem {
    pub task: Task,
    pub weak: LabeledSet,
    pub strong: LabeledSet,
    pub test: LabeledSet,
    pub annotator: Annotator,
}

impl Problem {
    /// Keeps the first `n_weak` weak and `n_strong` strong samples.
    pub fn truncated(&self, n_weak: usize, n_strong: usize) -> Self {
        Self {
            task: self.task,
            weak: self.weak.head(n_weak),
            strong: self.strong.head(n_strong),
            test: self.test.clone(),
            annotator: self.annotator.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub n_weak: usize,
    pub n_strong: usize,
    pub x_range: (f64, f64),
    pub strong_noise_sd: f64,
    pub weak_fn: AnnotatorSpec,
    /// Evenly spaced test points over `x_range`, endpoints included.
    pub n_test: usize,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            n_weak: 100,
            n_strong: 10,
            x_range: (-10.0, 10.0),
            strong_noise_sd: 0.1,
            weak_fn: AnnotatorSpec::ToySinc { amplitude: 2.0 },
            n_test: 201,
        }
    }
}

fn column_set(xs: Vec<f64>, ys: Vec<f64>, tier: Tier) -> Result<LabeledSet> {
    let n = xs.len();
    LabeledSet::new(Matrix::from_vec(n, 1, xs)?, Matrix::from_vec(n, 1, ys)?, tier)
}

/// `n` evenly spaced points over `[lo, hi]` labeled with `sin(x)`.
pub fn toy_test_grid(range: (f64, f64), n: usize) -> Result<LabeledSet> {
    let (lo, hi) = range;
    let xs: Vec<f64> = match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    let ys = xs.iter().map(|&x| toy_true(x)).collect();
    column_set(xs, ys, Tier::Strong)
}

/// Samples the weak set (labels from the weak function) and the strong set
/// (`sin(x)` plus Gaussian noise), both uniform over `x_range`.
///
/// Weak inputs are drawn first, then strong inputs, then the strong noise,
/// so enlarging one set never changes the other's draws.
pub fn gen_toy_data(rng: &mut Rng, cfg: &ToyConfig) -> Result<(LabeledSet, LabeledSet)> {
    let (lo, hi) = cfg.x_range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::EmptyRange { lo, hi });
    }
    if cfg.n_weak == 0 || cfg.n_strong == 0 {
        return Err(Error::EmptyDataset);
    }
    cfg.weak_fn.validate()?;
    if matches!(cfg.weak_fn, AnnotatorSpec::LinearHeuristic { .. }) {
        return Err(Error::ConfigParse("toy data needs a scalar weak function".into()));
    }
    let annotator = Annotator::Scalar(cfg.weak_fn.clone());

    let mut weak_rng = rng.split(1);
    let mut strong_rng = rng.split(2);
    let mut noise_rng = rng.split(3);

    let wx: Vec<f64> = (0..cfg.n_weak).map(|_| weak_rng.uniform_range(lo, hi)).collect();
    let wy = wx.iter().map(|&x| annotator.label(&[x], &mut weak_rng)[0]).collect();
    let sx: Vec<f64> = (0..cfg.n_strong).map(|_| strong_rng.uniform_range(lo, hi)).collect();
    let sy = sx
        .iter()
        .map(|&x| Ok(toy_true(x) + noise_rng.gaussian(0.0, cfg.strong_noise_sd)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok((column_set(wx, wy, Tier::Weak)?, column_set(sx, sy, Tier::Strong)?))
}

pub fn toy_problem(rng: &mut Rng, cfg: &ToyConfig) -> Result<Problem> {
    let (weak, strong) = gen_toy_data(rng, cfg)?;
    Ok(Problem {
        task: Task::Regression,
        weak,
        strong,
        test: toy_test_grid(cfg.x_range, cfg.n_test)?,
        annotator: Annotator::Scalar(cfg.weak_fn.clone()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassTaskConfig {
    pub n_weak: usize,
    pub n_strong: usize,
    pub n_test: usize,
    pub classes: usize,
    pub input_dim: usize,
    /// Distance of every class center from the origin.
    pub center_radius: f64,
    /// Standard deviation of each blob, per coordinate.
    pub blob_spread: f64,
    pub annotator: AnnotatorSpec,
}

impl Default for ClassTaskConfig {
    fn default() -> Self {
        Self {
            n_weak: 600,
            n_strong: 30,
            n_test: 600,
            classes: 3,
            input_dim: 2,
            center_radius: 2.0,
            blob_spread: 1.0,
            annotator: AnnotatorSpec::LinearHeuristic {
                rotation: 0.6,
                bias_shift: 1.0,
                temperature: 1.0,
                noise_rate: 0.2,
            },
        }
    }
}

/// Class `k` sits at angle `2πk/K` on a circle in the first two coordinates.
pub fn class_centers(classes: usize, dim: usize, radius: f64) -> Matrix {
    Matrix::from_fn(classes, dim, |k, j| {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / classes as f64;
        match j {
            0 => radius * angle.cos(),
            1 => radius * angle.sin(),
            _ => 0.0,
        }
    })
}

/// The Bayes-optimal linear scores of equal-variance blobs, perturbed as
/// described by [`AnnotatorSpec::LinearHeuristic`].
pub fn build_class_annotator(cfg: &ClassTaskConfig) -> Result<Annotator> {
    cfg.annotator.validate()?;
    let AnnotatorSpec::LinearHeuristic {
        rotation,
        bias_shift,
        temperature,
        noise_rate,
    } = cfg.annotator
    else {
        return Err(Error::ConfigParse(
            "classification task needs a linear heuristic annotator".into(),
        ));
    };
    let centers = class_centers(cfg.classes, cfg.input_dim, cfg.center_radius);
    let var = cfg.blob_spread * cfg.blob_spread;
    let (c, s) = (rotation.cos(), rotation.sin());
    // score_k(x) = μ_k·R x / σ² - |μ_k|²/2σ²  =  (Rᵀ μ_k)·x / σ² - ...
    let weights = Matrix::from_fn(cfg.classes, cfg.input_dim, |k, j| {
        let mu = centers.row(k);
        let rotated = match j {
            0 => c * mu[0] + s * mu[1],
            1 => -s * mu[0] + c * mu[1],
            _ => mu[j],
        };
        rotated / var
    });
    let biases = (0..cfg.classes)
        .map(|k| {
            let mu = centers.row(k);
            let shift = if k == 0 { bias_shift } else { 0.0 };
            -crate::numerics::dot(mu, mu) / (2.0 * var) + shift
        })
        .collect();
    Ok(Annotator::Linear {
        weights,
        biases,
        temperature,
        noise_rate,
    })
}

fn one_hot(k: usize, classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; classes];
    v[k] = 1.0;
    v
}

fn sample_blobs(
    rng: &mut Rng,
    n: usize,
    centers: &Matrix,
    spread: f64,
) -> Result<(Matrix, Vec<usize>)> {
    let (k, d) = centers.shape();
    let mut xs = Vec::with_capacity(n * d);
    let mut classes = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % k;
        for &mu in centers.row(class) {
            xs.push(mu + rng.gaussian(0.0, spread)?);
        }
        classes.push(class);
    }
    Ok((Matrix::from_vec(n, d, xs)?, classes))
}

/// Gaussian blobs, one per class, in balanced rotation. The weak set is
/// labeled with the annotator's class distribution, the strong and test sets
/// with true one-hot labels.
pub fn gen_classification_task(rng: &mut Rng, cfg: &ClassTaskConfig) -> Result<Problem> {
    if cfg.classes < 2 {
        return Err(Error::BadClassCount(cfg.classes));
    }
    if cfg.input_dim < 2 {
        return Err(Error::BadDimension {
            got: cfg.input_dim,
            reason: "blob inputs need at least two coordinates",
        });
    }
    if cfg.n_weak == 0 || cfg.n_strong == 0 || cfg.n_test == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(cfg.blob_spread > 0.0) {
        return Err(Error::NegativeSd(cfg.blob_spread));
    }
    let annotator = build_class_annotator(cfg)?;
    let centers = class_centers(cfg.classes, cfg.input_dim, cfg.center_radius);
    let k = cfg.classes;

    let (wx, _) = sample_blobs(&mut rng.split(1), cfg.n_weak, &centers, cfg.blob_spread)?;
    let mut label_rng = rng.split(2);
    let mut wy = Vec::with_capacity(cfg.n_weak * k);
    for row in wx.row_iter() {
        wy.extend(annotator.label(row, &mut label_rng));
    }
    let (sx, sc) = sample_blobs(&mut rng.split(3), cfg.n_strong, &centers, cfg.blob_spread)?;
    let (tx, tc) = sample_blobs(&mut rng.split(4), cfg.n_test, &centers, cfg.blob_spread)?;
    let hot = |cs: &[usize]| -> Result<Matrix> {
        Matrix::from_vec(cs.len(), k, cs.iter().flat_map(|&c| one_hot(c, k)).collect())
    };

    Ok(Problem {
        task: Task::Classification,
        weak: LabeledSet::new(wx, Matrix::from_vec(cfg.n_weak, k, wy)?, Tier::Weak)?,
        strong: LabeledSet::new(sx, hot(&sc)?, Tier::Strong)?,
        test: LabeledSet::new(tx, hot(&tc)?, Tier::Strong)?,
        annotator,
    })
}
