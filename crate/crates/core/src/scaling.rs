//! Classical scaling: double-center, keep the top-p eigenpairs, and scale
//! the eigenvectors by the square roots of their eigenvalues.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{double_center, norm2, top_p_eigen, Matrix, SymMatrix};
use crate::noise::DissimilarityMatrix;

const RESIDUAL_POWER_STEPS: usize = 20;

#[derive(Clone, Debug)]
pub struct Embedding {
    /// n×p embedded points `Û Λ̂^{1/2}`.
    pub points: Matrix,
    /// Retained eigenvalues before clamping, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Number of retained eigenvalues that were negative and clamped to 0.
    pub clamped_count: usize,
    /// Power-iteration estimate of the spectral norm of the discarded part.
    pub residual_spectrum_norm: f64,
    /// The p-th eigenvalue ties with the (p+1)-th.
    pub degenerate_tie: bool,
}

/// Embeds `d` into ℝᵖ.
pub fn classical_scaling(d: &DissimilarityMatrix, p: usize) -> Result<Embedding> {
    let n = d.n();
    if p >= n {
        return Err(Error::DimensionTooLarge { p, n });
    }
    if p == 0 {
        return Err(Error::InvalidArgument("embedding dimension must be >= 1".into()));
    }
    embed_centered(&double_center(d.as_sym()), p)
}

/// Spectral embedding of an already double-centered matrix.
pub fn embed_centered(b: &SymMatrix, p: usize) -> Result<Embedding> {
    let n = b.n();
    let pairs = top_p_eigen(b, p)?;
    let clamped_count = pairs.values.iter().filter(|&&v| v < 0.0).count();
    let roots: Vec<f64> = pairs.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let points = Matrix::from_fn(n, p, |i, j| pairs.vectors[(i, j)] * roots[j]);
    let residual_spectrum_norm = deflated_norm(b, &pairs.vectors, &pairs.values);
    Ok(Embedding {
        points,
        eigenvalues: pairs.values,
        clamped_count,
        residual_spectrum_norm,
        degenerate_tie: pairs.degenerate_tie,
    })
}

/// A few power steps on `B − U Λ Uᵀ`, applied matrix-free.
fn deflated_norm(b: &SymMatrix, u: &Matrix, values: &[f64]) -> f64 {
    let n = b.n();
    if u.cols() >= n {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xdef1_a7ed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let apply = |x: &[f64]| {
        let mut y = b.matvec(x);
        let coeffs: Vec<f64> = u.t_matvec(x);
        for i in 0..n {
            let row = u.row(i);
            let mut s = 0.0;
            for j in 0..values.len() {
                s += row[j] * values[j] * coeffs[j];
            }
            y[i] -= s;
        }
        y
    };
    let mut estimate = 0.0;
    for _ in 0..RESIDUAL_POWER_STEPS {
        let nx = norm2(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = apply(&x);
        estimate = norm2(&y);
        x = y;
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{distance_matrix, Configuration};

    #[test]
    fn three_points_on_a_line() {
        let x = Configuration::from_rows(&[[0.0], [1.0], [2.0]]);
        let emb = classical_scaling(&distance_matrix(&x), 1).unwrap();
        assert!((emb.eigenvalues[0] - 2.0).abs() < 1e-14);
        let col = emb.points.col(0);
        let sign = col[0].signum();
        for (got, want) in col.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got * -sign - want).abs() < 1e-14 || (got - want).abs() < 1e-14);
        }
        assert!((col[0] + col[2]).abs() < 1e-14 && col[1].abs() < 1e-14);
        assert_eq!(emb.clamped_count, 0);
    }

    #[test]
    fn rejects_oversized_dimension() {
        let x = Configuration::from_rows(&[[0.0], [1.0]]);
        assert!(matches!(
            classical_scaling(&distance_matrix(&x), 2),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn negative_eigenvalues_are_clamped() {
        // Non-Euclidean dissimilarities: equilateral triangle with one
        // stretched edge violates the triangle inequality on square roots.
        let d = DissimilarityMatrix::from_matrix(Matrix::from_rows(&[
            [0.0, 1.0, 1.0, 16.0],
            [1.0, 0.0, 1.0, 1.0],
            [1.0, 1.0, 0.0, 1.0],
            [16.0, 1.0, 1.0, 0.0],
        ]))
        .unwrap();
        let emb = classical_scaling(&d, 3).unwrap();
        assert!(emb.clamped_count >= 1);
        let last = emb.points.col(2);
        assert!(last.iter().all(|&v| v == 0.0));
    }
}
