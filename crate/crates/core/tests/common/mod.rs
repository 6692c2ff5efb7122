//! Brute-force references shared by the integration suites.

#![allow(dead_code)]

use fwl_core::gp::KernelTerm;
use fwl_core::student::{loss_and_grad, LossSpec, StudentNet};
use fwl_core::{Matrix, Rng};

pub fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.uniform_range(-1.0, 1.0))
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        let pivot = m[c][c];
        m[c].iter_mut().for_each(|v| *v /= pivot);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                m[r].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Closed-form kernel value; `diag` switches the white term on.
pub fn kernel_value(terms: &[KernelTerm], a: &[f64], b: &[f64], diag: bool) -> f64 {
    let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    terms
        .iter()
        .map(|t| match *t {
            KernelTerm::Rbf { length_scale: l } => (-0.5 * r2 / (l * l)).exp(),
            KernelTerm::Matern32 { length_scale: l } => {
                let s = (3.0 * r2).sqrt() / l;
                (1.0 + s) * (-s).exp()
            }
            KernelTerm::Linear { sigma0 } => sigma0 * sigma0 + a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>(),
            KernelTerm::White { noise_level } => {
                if diag {
                    noise_level
                } else {
                    0.0
                }
            }
        })
        .sum()
}

/// Four kernel families; together they exercise every term kind.
pub fn kernel_family(which: usize, length: f64, noise: f64) -> Vec<KernelTerm> {
    let white = KernelTerm::White { noise_level: noise };
    match which % 4 {
        0 => vec![KernelTerm::Rbf { length_scale: length }, white],
        1 => vec![KernelTerm::Matern32 { length_scale: length }, white],
        2 => vec![KernelTerm::Linear { sigma0: 0.5 }, white],
        _ => vec![
            KernelTerm::Rbf { length_scale: length },
            KernelTerm::Linear { sigma0: 1.0 },
            white,
        ],
    }
}

/// GP posterior mean per output and variance at `query`, from the explicit
/// inverse of the jittered Gram matrix.
pub fn dense_posterior(terms: &[KernelTerm], x: &Matrix, y: &Matrix, query: &[f64], jitter: f64) -> (Vec<f64>, f64) {
    let n = x.rows();
    let gram: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| kernel_value(terms, x.row(i), x.row(j), i == j) + if i == j { jitter } else { 0.0 })
                .collect()
        })
        .collect();
    let inv = dense_inverse(&gram);
    let k: Vec<f64> = (0..n).map(|i| kernel_value(terms, x.row(i), query, false)).collect();
    let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| inv[i][j] * k[j]).sum()).collect();
    let mean = (0..y.cols()).map(|c| (0..n).map(|i| w[i] * y[(i, c)]).sum()).collect();
    let var = kernel_value(terms, query, query, false) - k.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    (mean, var.max(0.0))
}

/// Worst violation of `|g - fd| <= rel·max(|g|, |fd|) + floor` over all
/// parameters, with central differences of step `h`; ≤ 0 means every
/// parameter passes.
pub fn gradient_check(net: &StudentNet, x: &[f64], target: &[f64], spec: &LossSpec, rel: f64, floor: f64) -> f64 {
    let (_, grad) = loss_and_grad(net, x, target, spec).unwrap();
    let params = net.params();
    let h = 1e-6;
    let mut probe = net.clone();
    let mut worst = f64::NEG_INFINITY;
    for (i, g) in grad.iter().enumerate() {
        let mut shifted = params.clone();
        shifted[i] = params[i] + h;
        probe.set_params(&shifted).unwrap();
        let up = loss_and_grad(&probe, x, target, spec).unwrap().0;
        shifted[i] = params[i] - h;
        probe.set_params(&shifted).unwrap();
        let down = loss_and_grad(&probe, x, target, spec).unwrap().0;
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((g - fd).abs() - rel * g.abs().max(fd.abs()) - floor);
    }
    worst
}
