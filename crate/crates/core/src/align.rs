//! Orthogonal Procrustes alignment and the reconstruction losses.

use crate::config::{center_matrix, Configuration};
use crate::error::{Error, Result};
use crate::linalg::{norm2, svd_small, Matrix};

/// Solution of `min_Q ‖A − BQ‖_F` over orthogonal `Q`.
#[derive(Clone, Debug)]
pub struct Procrustes {
    pub rotation: Matrix,
    /// `BᵀA` had a (numerically) zero singular value, so the minimizer is
    /// not unique. The returned rotation is still optimal.
    pub degenerate: bool,
}

/// `Q* = W₁W₂ᵀ` where `BᵀA = W₁ S W₂ᵀ`. Reflections are allowed.
pub fn procrustes(a: &Matrix, b: &Matrix) -> Result<Procrustes> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            actual: b.shape(),
        });
    }
    let cross = b.t_matmul(a);
    let svd = svd_small(&cross);
    let top = svd.singulars.first().copied().unwrap_or(0.0);
    let floor = top * cross.rows() as f64 * 1e-12;
    let degenerate = top == 0.0 || svd.singulars.iter().any(|&s| s <= floor);
    Ok(Procrustes {
        rotation: svd.left.matmul(&svd.right.transpose()),
        degenerate,
    })
}

/// Frobenius-optimal rigid map `g(x) = xQ + w` taking `X` onto `X̂`, with
/// the three losses of the residual `X̂ − g(X)`.
#[derive(Clone, Debug)]
pub struct AlignmentResult {
    pub rotation: Matrix,
    pub translation: Vec<f64>,
    /// `√(Σ‖r_i‖²/n)`
    pub loss_rmse: f64,
    /// `max_i ‖r_i‖`
    pub loss_two_inf: f64,
    /// `Σ‖r_i‖/n`
    pub loss_avg: f64,
    pub degenerate: bool,
}

pub fn optimal_rigid_alignment(xhat: &Configuration, x: &Configuration) -> Result<AlignmentResult> {
    align_matrices(&xhat.points, &x.points)
}

pub fn align_matrices(xhat: &Matrix, x: &Matrix) -> Result<AlignmentResult> {
    if xhat.shape() != x.shape() {
        return Err(Error::ShapeMismatch {
            expected: xhat.shape(),
            actual: x.shape(),
        });
    }
    let n = x.rows();
    let mean_hat = xhat.col_means();
    let mean_x = x.col_means();
    let a = center_matrix(xhat);
    let b = center_matrix(x);
    let Procrustes {
        rotation,
        degenerate,
    } = procrustes(&a, &b)?;
    let residual = a.sub(&b.matmul(&rotation));

    let row_norms: Vec<f64> = (0..n).map(|i| norm2(residual.row(i))).collect();
    let nf = n as f64;
    let loss_rmse = (row_norms.iter().map(|r| r * r).sum::<f64>() / nf).sqrt();
    let loss_two_inf = row_norms.iter().copied().fold(0.0, f64::max);
    let loss_avg = row_norms.iter().sum::<f64>() / nf;

    let shifted = rotation.t_matvec(&mean_x);
    let translation = mean_hat.iter().zip(&shifted).map(|(h, s)| h - s).collect();
    Ok(AlignmentResult {
        rotation,
        translation,
        loss_rmse,
        loss_two_inf,
        loss_avg,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::sample_unit_ball;
    use crate::linalg::random_orthogonal;

    #[test]
    fn identical_inputs() {
        let a = sample_unit_ball(12, 3, 1).points;
        let q = procrustes(&a, &a).unwrap();
        let r = a.sub(&a.matmul(&q.rotation));
        assert!(norm2(r.as_slice()) <= 1e-10);
    }

    #[test]
    fn recovers_rotation() {
        let b = sample_unit_ball(20, 3, 2).points;
        let r = random_orthogonal(3, 5);
        let a = b.matmul(&r);
        let q = procrustes(&a, &b).unwrap();
        assert!(q.rotation.sub(&r).max_abs() < 1e-9);
        assert!(!q.degenerate);
    }

    #[test]
    fn degenerate_cross_is_flagged() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0]]);
        let b = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0]]);
        let q = procrustes(&a, &b).unwrap();
        assert!(q.degenerate);
        let g = q.rotation.t_matmul(&q.rotation);
        assert!(g.sub(&Matrix::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn rigid_and_translated_copies_have_zero_loss() {
        let x = sample_unit_ball(30, 3, 3);
        let q = random_orthogonal(3, 8);
        let rotated = x.points.matmul(&q);
        let moved = Matrix::from_fn(30, 3, |i, j| rotated[(i, j)] + [2.0, -1.0, 0.5][j]);
        let res = align_matrices(&moved, &x.points).unwrap();
        let tol = 1e-9 * (1.0 + crate::linalg::two_to_inf_norm(&center_matrix(&x.points)));
        assert!(res.loss_rmse <= tol && res.loss_two_inf <= tol && res.loss_avg <= tol);
        // g(X) reproduces X̂.
        let mapped = x.points.matmul(&res.rotation);
        for i in 0..30 {
            for j in 0..3 {
                assert!((mapped[(i, j)] + res.translation[j] - moved[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch() {
        let a = Matrix::zeros(3, 2);
        let b = Matrix::zeros(4, 2);
        assert!(matches!(align_matrices(&a, &b), Err(Error::ShapeMismatch { .. })));
    }
}
