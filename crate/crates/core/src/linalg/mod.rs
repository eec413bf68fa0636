//! Dense linear-algebra kernels: symmetric eigensolvers, a small SVD,
//! matrix norms and double centering.

mod eigen;
mod matrix;
mod norms;
mod svd;

pub use eigen::{lanczos_norm, symmetric_eigen, symmetric_eigenvalues, top_p_eigen, EigenPairs, DENSE_LIMIT};
pub use matrix::{dot, norm2, Matrix, SymMatrix};
pub use norms::{
    frobenius_norm, inf_norm, spectral_norm, two_to_inf_norm, NormEstimate, PowerIteration,
};
pub use svd::{svd_small, SmallSvd, SMALL_SVD_MAX};

use crate::rng::Stream;

/// Haar-distributed random orthogonal `p×p` matrix (Gram-Schmidt on a
/// Gaussian matrix).
pub fn random_orthogonal(p: usize, seed: u64) -> Matrix {
    let mut stream = Stream::new(seed);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    while cols.len() < p {
        let mut c: Vec<f64> = (0..p).map(|_| stream.standard_normal()).collect();
        for _ in 0..2 {
            for q in &cols {
                let proj = dot(&c, q);
                c.iter_mut().zip(q).for_each(|(x, &y)| *x -= proj * y);
            }
        }
        let norm = norm2(&c);
        if norm > 1e-8 {
            cols.push(c.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut m = Matrix::zeros(p, p);
    for (j, c) in cols.iter().enumerate() {
        m.set_col(j, c);
    }
    m
}

/// `−½ H D H` with `H = I − J/n`.
pub fn double_center(d: &SymMatrix) -> SymMatrix {
    let n = d.n();
    let nf = n as f64;
    let means: Vec<f64> = (0..n).map(|i| d.row(i).iter().sum::<f64>() / nf).collect();
    let grand = means.iter().sum::<f64>() / nf;
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let row = d.row(i);
        let ri = means[i];
        let out_row = out.row_mut(i);
        for j in i..n {
            out_row[j] = -0.5 * (row[j] - ri - means[j] + grand);
        }
    }
    SymMatrix::from_upper(out)
}

/// `H A H` for a square matrix, computed by subtracting row, column and
/// grand means.
pub fn two_sided_center(a: &Matrix) -> Matrix {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum::<f64>() / nf).collect();
    let col_means = a.col_means();
    let grand = row_means.iter().sum::<f64>() / nf;
    Matrix::from_fn(n, n, |i, j| a[(i, j)] - row_means[i] - col_means[j] + grand)
}
