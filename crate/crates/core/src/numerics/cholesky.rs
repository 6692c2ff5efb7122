use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Diagonal jitter added to kernel Gram matrices before factorization.
pub const DEFAULT_JITTER: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-10;

/// Lower Cholesky factor `L` with `L·Lᵀ = a`.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    cholesky_jittered(a, 0.0)
}

/// Factorizes `a + jitter·I`. Fails when a pivot is not strictly positive.
pub fn cholesky_jittered(a: &Matrix, jitter: f64) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::dim(a.rows(), a.cols(), "cholesky needs a square matrix"));
    }
    let n = a.rows();
    for i in 0..n {
        for j in 0..i {
            let (x, y) = (a[(i, j)], a[(j, i)]);
            if (x - y).abs() > SYMMETRY_TOL * x.abs().max(y.abs()).max(1.0) {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }

    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)] + jitter;
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite { row: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            let (ri, rj) = (l.row(i), l.row(j));
            for k in 0..j {
                s -= ri[k] * rj[k];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L·y = b` for lower-triangular `L`.
pub fn solve_lower(l: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = l.rows();
    if b.len() != n {
        return Err(Error::dim(n, b.len(), "triangular solve rhs"));
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let row = l.row(i);
        let mut s = y[i];
        for k in 0..i {
            s -= row[k] * y[k];
        }
        y[i] = s / row[i];
    }
    Ok(y)
}

/// Solves `Lᵀ·x = y` for lower-triangular `L`.
pub fn solve_upper_transposed(l: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let n = l.rows();
    if y.len() != n {
        return Err(Error::dim(n, y.len(), "triangular solve rhs"));
    }
    let mut x = y.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

/// Solves `(L·Lᵀ)·x = b` given the Cholesky factor `L`.
pub fn cho_solve(l: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if !l.is_square() {
        return Err(Error::dim(l.rows(), l.cols(), "cholesky factor must be square"));
    }
    let y = solve_lower(l, b)?;
    solve_upper_transposed(l, &y)
}

/// Column-wise [`cho_solve`] for an `n×p` right-hand side.
pub fn cho_solve_matrix(l: &Matrix, b: &Matrix) -> Result<Matrix> {
    if b.rows() != l.rows() {
        return Err(Error::dim(l.rows(), b.rows(), "cho_solve rhs rows"));
    }
    let mut out = Matrix::zeros(b.rows(), b.cols());
    let mut col = vec![0.0; b.rows()];
    for j in 0..b.cols() {
        for (i, c) in col.iter_mut().enumerate() {
            *c = b[(i, j)];
        }
        let x = cho_solve(l, &col)?;
        for (i, v) in x.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_factor() {
        let l = cholesky(&Matrix::identity(3)).unwrap();
        assert_eq!(l, Matrix::identity(3));
    }

    #[test]
    fn two_by_two_by_hand() {
        // [[4,2],[2,3]]: l11 = 2, l21 = 2/2 = 1, l22 = sqrt(3 - 1) = sqrt 2
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]).unwrap();
        let l = cholesky(&a).unwrap();
        assert_abs_diff_eq!(l[(0, 0)], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l[(0, 1)], 0.0);
        assert_abs_diff_eq!(l[(1, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l[(1, 1)], 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite { row: 1, .. })));
    }

    #[test]
    fn asymmetric_and_nonsquare_rejected() {
        let a = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&a), Err(Error::NotSymmetric { .. })));
        assert!(matches!(
            cholesky(&Matrix::zeros(2, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn jitter_rescues_semidefinite() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(cholesky(&a).is_err());
        assert!(cholesky_jittered(&a, DEFAULT_JITTER).is_ok());
    }

    #[test]
    fn solve_examples() {
        let x = cho_solve(&Matrix::identity(2), &[1.0, 2.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);

        // inverse of [[4,2],[2,3]] is [[3,-2],[-2,4]]/8, times [1,1] = [1/8, 2/8]
        let l = cholesky(&Matrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]).unwrap()).unwrap();
        let x = cho_solve(&l, &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(x[0], 0.125, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 0.25, epsilon = 1e-14);

        assert!(matches!(
            cho_solve(&l, &[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
