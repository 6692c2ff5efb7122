//! Summary statistics, metrics and the paired t-test used to compare
//! strategies across seeds.

use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); 0 for fewer than two
/// values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate() {
        if v > xs[best] {
            best = i;
        }
    }
    best
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> f64 {
    let se: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    (se / pred.len() as f64).sqrt()
}

/// Unweighted mean of per-class F1. A class with no predictions and no true
/// members scores 0, as does any class whose precision and recall are both 0.
pub fn macro_f1(pred: &[usize], truth: &[usize], classes: usize) -> f64 {
    let mut tp = vec![0usize; classes];
    let mut fp = vec![0usize; classes];
    let mut fn_ = vec![0usize; classes];
    for (&p, &t) in pred.iter().zip(truth) {
        if p == t {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let f1: f64 = (0..classes)
        .map(|c| {
            let denom = 2 * tp[c] + fp[c] + fn_[c];
            if denom == 0 {
                0.0
            } else {
                2.0 * tp[c] as f64 / denom as f64
            }
        })
        .sum();
    f1 / classes as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairedTTest {
    /// Mean of `a - b`.
    pub mean_diff: f64,
    pub t: f64,
    /// Two-sided p-value.
    pub p_value: f64,
}

/// Paired two-sided t-test of `a` against `b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> PairedTTest {
    assert_eq!(a.len(), b.len(), "paired samples");
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let m = mean(&diffs);
    let sd = sample_sd(&diffs);
    if sd == 0.0 {
        let p_value = if m == 0.0 { 1.0 } else { 0.0 };
        return PairedTTest {
            mean_diff: m,
            t: if m == 0.0 { 0.0 } else { m.signum() * f64::INFINITY },
            p_value,
        };
    }
    let t = m / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("n >= 2");
    PairedTTest {
        mean_diff: m,
        t,
        p_value: 2.0 * (1.0 - dist.cdf(t.abs())),
    }
}
