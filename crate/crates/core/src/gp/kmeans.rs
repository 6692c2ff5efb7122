use crate::error::{Error, Result};
use crate::numerics::{squared_distance, Matrix, Rng};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Clone, Debug)]
pub struct KMeans {
    pub centroids: Matrix,
    /// Cluster index of every input row.
    pub assignment: Vec<usize>,
    /// Within-cluster sum of squares after each iteration.
    pub sse_trace: Vec<f64>,
}

impl KMeans {
    pub fn sse(&self) -> f64 {
        self.sse_trace.last().copied().unwrap_or(0.0)
    }

    pub fn iterations(&self) -> usize {
        self.sse_trace.len()
    }
}

/// Index of the nearest row of `centroids`; ties go to the lowest index.
pub fn nearest_centroid(centroids: &Matrix, x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, row) in centroids.row_iter().enumerate() {
        let d = squared_distance(row, x);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn sse(points: &Matrix, centroids: &Matrix, assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| squared_distance(points.row(i), centroids.row(c)))
        .sum()
}

fn update_centroids(points: &Matrix, assignment: &[usize], k: usize) -> Matrix {
    let d = points.cols();
    let mut sums = Matrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (i, &c) in assignment.iter().enumerate() {
        counts[c] += 1;
        for (s, v) in sums.row_mut(c).iter_mut().zip(points.row(i)) {
            *s += v;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        let inv = 1.0 / count as f64;
        sums.row_mut(c).iter_mut().for_each(|s| *s *= inv);
    }
    sums
}

/// Moves points into empty clusters. Each empty cluster takes the point
/// farthest from its own centroid among clusters that can spare one.
fn fill_empty_clusters(points: &Matrix, centroids: &mut Matrix, assignment: &mut [usize], k: usize) {
    let mut counts = vec![0usize; k];
    for &c in assignment.iter() {
        counts[c] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &c) in assignment.iter().enumerate() {
            if counts[c] < 2 {
                continue;
            }
            let d = squared_distance(points.row(i), centroids.row(c));
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let i = far.expect("k <= n guarantees a cluster with two members");
        counts[assignment[i]] -= 1;
        counts[empty] = 1;
        assignment[i] = empty;
        centroids.row_mut(empty).copy_from_slice(points.row(i));
    }
}

/// Lloyd's algorithm, seeded with `k` distinct input rows drawn uniformly.
///
/// Stops when the assignment no longer changes or after
/// [`MAX_ITERATIONS`]. No cluster is ever left empty.
pub fn kmeans(points: &Matrix, k: usize, rng: &mut Rng) -> Result<KMeans> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let seeds = rng.sample_without_replacement(n, k);
    let mut centroids = points.select_rows(&seeds);
    let mut assignment: Vec<usize> = Vec::new();
    let mut sse_trace = Vec::new();

    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<usize> = points
            .row_iter()
            .map(|p| nearest_centroid(&centroids, p))
            .collect();
        fill_empty_clusters(points, &mut centroids, &mut next, k);
        let converged = next == assignment;
        assignment = next;
        centroids = update_centroids(points, &assignment, k);
        sse_trace.push(sse(points, &centroids, &assignment));
        if converged {
            break;
        }
    }

    Ok(KMeans {
        centroids,
        assignment,
        sse_trace,
    })
}
