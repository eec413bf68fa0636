use super::matrix::{dot, norm2, Matrix};

/// Largest order accepted by [`svd_small`].
pub const SMALL_SVD_MAX: usize = 32;

/// `M = left · diag(singulars) · rightᵀ` for a small square matrix.
#[derive(Clone, Debug)]
pub struct SmallSvd {
    pub left: Matrix,
    /// Non-negative, descending.
    pub singulars: Vec<f64>,
    pub right: Matrix,
}

impl SmallSvd {
    pub fn reconstruct(&self) -> Matrix {
        let scaled = Matrix::from_fn(self.left.rows(), self.left.cols(), |i, j| {
            self.left[(i, j)] * self.singulars[j]
        });
        scaled.matmul(&self.right.transpose())
    }
}

/// One-sided Jacobi SVD of a square `p×p` matrix, `p ≤ 32`.
///
/// Panics on non-square or oversized input, or non-finite entries.
pub fn svd_small(m: &Matrix) -> SmallSvd {
    let p = m.rows();
    assert_eq!(p, m.cols(), "svd_small expects a square matrix");
    assert!(p <= SMALL_SVD_MAX, "svd_small is limited to {SMALL_SVD_MAX}x{SMALL_SVD_MAX}");
    assert!(m.is_finite(), "svd_small requires finite input");

    // Work on columns: u_j = M e_j, accumulate the right rotations in v.
    let mut u: Vec<Vec<f64>> = (0..p).map(|j| m.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|j| (0..p).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let alpha = dot(&u[i], &u[i]);
                let beta = dot(&u[j], &u[j]);
                let gamma = dot(&u[i], &u[j]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut u, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = u.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let top = norms.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = top * p as f64 * f64::EPSILON;
    let mut left_cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut singulars = Vec::with_capacity(p);
    let mut right = Matrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        right.set_col(dst, &v[src]);
        if s > cutoff && s > 0.0 {
            singulars.push(s);
            left_cols.push(u[src].iter().map(|x| x / s).collect());
        } else {
            singulars.push(0.0);
            left_cols.push(Vec::new());
        }
    }
    complete_basis(&mut left_cols, p);
    let mut left = Matrix::zeros(p, p);
    for (j, c) in left_cols.iter().enumerate() {
        left.set_col(j, c);
    }
    SmallSvd {
        left,
        singulars,
        right,
    }
}

fn rotate_pair(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(j);
    for (a, b) in head[i].iter_mut().zip(tail[0].iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Fills empty entries of `cols` with unit vectors orthogonal to the rest,
/// drawn from the standard basis by Gram-Schmidt.
fn complete_basis(cols: &mut [Vec<f64>], p: usize) {
    let mut candidate = 0;
    for j in 0..cols.len() {
        if !cols[j].is_empty() {
            continue;
        }
        loop {
            assert!(candidate < p, "failed to complete orthonormal basis");
            let mut e: Vec<f64> = (0..p).map(|i| if i == candidate { 1.0 } else { 0.0 }).collect();
            candidate += 1;
            for _ in 0..2 {
                for other in cols.iter().filter(|c| !c.is_empty()) {
                    let proj = dot(&e, other);
                    for (x, &o) in e.iter_mut().zip(other) {
                        *x -= proj * o;
                    }
                }
            }
            let norm = norm2(&e);
            if norm > 0.5 {
                cols[j] = e.into_iter().map(|x| x / norm).collect();
                break;
            }
        }
    }
}
