//! Symmetric eigensolvers.
//!
//! The dense path is a Householder reduction to tridiagonal form followed by
//! the implicitly shifted QL iteration (the EISPACK `tred2`/`tql2` pair,
//! reorganized for row-major storage). For large matrices where only a few
//! leading eigenpairs are wanted, a block subspace iteration with
//! Rayleigh-Ritz extraction is tried first; its Ritz problems are solved by
//! the dense path, and any failure to certify convergence falls back to it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{dot, norm2, Matrix, SymMatrix};
use super::norms::NormEstimate;
use crate::error::{Error, Result};

/// Matrices up to this order always use the dense solver.
pub const DENSE_LIMIT: usize = 384;

const SUBSPACE_MAX_ITER: usize = 400;

/// Leading eigenpairs of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    /// Eigenvalues, non-increasing.
    pub values: Vec<f64>,
    /// n×p matrix whose orthonormal columns are the eigenvectors.
    pub vectors: Matrix,
    /// Set when the p-th and (p+1)-th eigenvalues coincide, so the retained
    /// subspace is not uniquely determined.
    pub degenerate_tie: bool,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.col(j)
    }
}

/// Full eigendecomposition: all eigenvalues (descending) with eigenvectors
/// stored as the *rows* of the returned matrix.
pub fn symmetric_eigen(s: &SymMatrix) -> Result<(Vec<f64>, Matrix)> {
    let n = s.n();
    let mut a = s.as_matrix().clone();
    let tri = tridiagonalize(&mut a);
    let mut zt = tri.accumulate_q().transpose();
    let mut d = tri.diag;
    let mut e = tri.offdiag;
    tql(&mut d, &mut e, Some(&mut zt), 50 * n.max(1))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut sorted = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.row_mut(dst).copy_from_slice(zt.row(src));
    }
    Ok((values, sorted))
}

/// `‖S‖₂` for symmetric `S`, from the extreme Ritz values of a Lanczos run
/// with full reorthogonalization. Stops once the residual bound of the
/// extreme Ritz pair drops below `tol·‖S‖` or after `max_steps` steps.
pub fn lanczos_norm(s: &SymMatrix, max_steps: usize, tol: f64) -> NormEstimate {
    let n = s.n();
    let steps = max_steps.min(n);
    let zero = NormEstimate {
        value: 0.0,
        iterations: 0,
        converged: true,
    };
    if steps == 0 {
        return zero;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a4c_2005);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut value = 0.0;
    for k in 0..steps {
        let mut w = s.matvec(&v);
        alpha.push(dot(&w, &v));
        basis.push(v);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(x, &y)| *x -= c * y);
            }
        }
        let b = norm2(&w);

        let m = k + 1;
        let mut d = alpha.clone();
        let mut e = Vec::with_capacity(m);
        e.push(0.0);
        e.extend_from_slice(&beta);
        let mut zt = Matrix::identity(m);
        if tql(&mut d, &mut e, Some(&mut zt), 50 * m).is_err() {
            return NormEstimate {
                value,
                iterations: m,
                converged: false,
            };
        }
        let (idx, theta) = d
            .iter()
            .enumerate()
            .map(|(i, &t)| (i, t.abs()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        value = theta;
        let residual = b * zt[(idx, m - 1)].abs();
        if theta == 0.0 && b == 0.0 {
            return zero;
        }
        if residual <= tol * theta || b <= f64::EPSILON * theta {
            return NormEstimate {
                value,
                iterations: m,
                converged: true,
            };
        }
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
    NormEstimate {
        value,
        iterations: steps,
        // A full-length run spans the whole space.
        converged: steps == n,
    }
}

/// All eigenvalues (descending), no vectors.
pub fn symmetric_eigenvalues(s: &SymMatrix) -> Result<Vec<f64>> {
    let n = s.n();
    let mut a = s.as_matrix().clone();
    let tri = tridiagonalize(&mut a);
    let mut d = tri.diag;
    let mut e = tri.offdiag;
    tql(&mut d, &mut e, None, 50 * n.max(1))?;
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// The `p` algebraically largest eigenpairs of `s`.
pub fn top_p_eigen(s: &SymMatrix, p: usize) -> Result<EigenPairs> {
    let n = s.n();
    if p == 0 || p > n {
        return Err(Error::InvalidArgument(format!(
            "requested {p} eigenpairs of a {n}x{n} matrix"
        )));
    }
    if !s.as_matrix().is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let mut pairs = if n > DENSE_LIMIT && 4 * (p + 6) < n {
        match subspace_top_p(s, p) {
            Some(pairs) => pairs,
            None => dense_top_p(s, p)?,
        }
    } else {
        dense_top_p(s, p)?
    };
    for j in 0..p {
        let mut v = pairs.vectors.col(j);
        canonical_sign(&mut v);
        pairs.vectors.set_col(j, &v);
    }
    Ok(pairs)
}

fn dense_top_p(s: &SymMatrix, p: usize) -> Result<EigenPairs> {
    let n = s.n();
    let (values, zt) = symmetric_eigen(s)?;
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let degenerate_tie = p < n && is_tie(values[p - 1], values[p], scale, n);
    let mut vectors = Matrix::zeros(n, p);
    for j in 0..p {
        vectors.set_col(j, zt.row(j));
    }
    Ok(EigenPairs {
        values: values[..p].to_vec(),
        vectors,
        degenerate_tie,
    })
}

fn is_tie(a: f64, b: f64, scale: f64, n: usize) -> bool {
    (a - b).abs() <= 64.0 * n as f64 * f64::EPSILON * scale.max(f64::MIN_POSITIVE)
}

/// Flips `v` so that its largest-magnitude entry is positive. Entries whose
/// magnitudes agree to 1e-12 relative count as tied; the lowest index wins.
pub(crate) fn canonical_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

struct Tridiagonal {
    n: usize,
    diag: Vec<f64>,
    /// `offdiag[i]` couples rows `i-1` and `i`; `offdiag[0]` is unused.
    offdiag: Vec<f64>,
    /// Householder vectors `(beta, v)` for steps `k = 0..n-2`, acting on
    /// indices `k+1..n`.
    reflectors: Vec<(f64, Vec<f64>)>,
}

/// Householder reduction of the full symmetric matrix `a` (destroyed).
fn tridiagonalize(a: &mut Matrix) -> Tridiagonal {
    let n = a.rows();
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        diag[k] = a[(k, k)];
        let m = n - k - 1;
        let mut v: Vec<f64> = a.row(k)[k + 1..].to_vec();
        let scale = v.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if scale == 0.0 {
            offdiag[k + 1] = 0.0;
            reflectors.push((0.0, v));
            continue;
        }
        v.iter_mut().for_each(|x| *x /= scale);
        let norm = norm2(&v);
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        offdiag[k + 1] = alpha * scale;
        if vtv == 0.0 {
            reflectors.push((0.0, v));
            continue;
        }
        let beta = 2.0 / vtv;

        // p = beta * B v over the trailing block B = a[k+1.., k+1..].
        let p = &mut p[..m];
        for (i, pi) in p.iter_mut().enumerate() {
            *pi = beta * dot(&a.row(k + 1 + i)[k + 1..], &v);
        }
        let kk = 0.5 * beta * dot(p, &v);
        for (pi, vi) in p.iter_mut().zip(&v) {
            *pi -= kk * vi;
        }
        // B -= v wᵀ + w vᵀ with w = p.
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a.row_mut(k + 1 + i)[k + 1..];
            for ((b, &vj), &wj) in row.iter_mut().zip(&v).zip(p.iter()) {
                *b -= vi * wj + wi * vj;
            }
        }
        reflectors.push((beta, v));
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2, n - 2)];
        diag[n - 1] = a[(n - 1, n - 1)];
        offdiag[n - 1] = a[(n - 1, n - 2)];
    } else if n == 1 {
        diag[0] = a[(0, 0)];
    }
    Tridiagonal {
        n,
        diag,
        offdiag,
        reflectors,
    }
}

impl Tridiagonal {
    /// Explicit orthogonal `Q` with `A = Q T Qᵀ`.
    fn accumulate_q(&self) -> Matrix {
        let n = self.n;
        let mut q = Matrix::identity(n);
        let mut w = vec![0.0; n];
        for (k, (beta, v)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let off = k + 1;
            let w = &mut w[..n - off];
            w.iter_mut().for_each(|x| *x = 0.0);
            for (i, &vi) in v.iter().enumerate() {
                for (wj, &qij) in w.iter_mut().zip(&q.row(off + i)[off..]) {
                    *wj += vi * qij;
                }
            }
            for (i, &vi) in v.iter().enumerate() {
                let f = beta * vi;
                for (qij, &wj) in q.row_mut(off + i)[off..].iter_mut().zip(w.iter()) {
                    *qij -= f * wj;
                }
            }
        }
        q
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. On return `d` holds the
/// (unsorted) eigenvalues. When `zt` is given, the rotations are applied to
/// its rows so that row `i` becomes the eigenvector of `d[i]`.
fn tql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut Matrix>, budget: usize) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let mut iterations = 0usize;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            loop {
                iterations += 1;
                if iterations > budget {
                    return Err(Error::NonConvergence {
                        what: "tridiagonal QL",
                        budget,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        rotate_rows(z, i, c, s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonConvergence {
            what: "tridiagonal QL",
            budget,
        });
    }
    Ok(())
}

/// Rows `i` and `i+1` of `z` ← rotation by `(c, s)`.
#[inline]
fn rotate_rows(z: &mut Matrix, i: usize, c: f64, s: f64) {
    let cols = z.cols();
    let data = z.as_mut_slice();
    let (head, tail) = data.split_at_mut((i + 1) * cols);
    let zi = &mut head[i * cols..];
    let zi1 = &mut tail[..cols];
    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}

/// Block subspace iteration with Rayleigh-Ritz. Returns `None` when the
/// result cannot be certified, in which case the caller falls back to the
/// dense path.
fn subspace_top_p(s: &SymMatrix, p: usize) -> Option<EigenPairs> {
    let n = s.n();
    let k = (p + 6).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_5ab5_9ace ^ n as u64);
    let mut v = Matrix::from_fn(n, k, |_, _| rng.random::<f64>() - 0.5);
    orthonormalize_columns(&mut v, &mut rng);

    for _ in 0..SUBSPACE_MAX_ITER {
        let w = s.mul_block(&v);
        let h = SymMatrix::from_upper(v.t_matmul(&w));
        let (theta, y_rows) = symmetric_eigen(&h).ok()?;
        let y = y_rows.transpose();
        let ritz = v.matmul(&y);
        let s_ritz = w.matmul(&y);

        let scale = theta.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let tol = 1e-11 * (scale + 1.0);
        let worst = (0..p)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let r = s_ritz[(i, j)] - theta[j] * ritz[(i, j)];
                        r * r
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        let smallest_magnitude = theta.iter().fold(f64::INFINITY, |m, t| m.min(t.abs()));
        let captured = theta[p - 1] > 0.0 && smallest_magnitude < 0.9 * theta[p - 1];

        if worst <= tol {
            if !captured {
                return None;
            }
            let mut vectors = Matrix::zeros(n, p);
            for j in 0..p {
                vectors.set_col(j, &ritz.col(j));
            }
            let degenerate_tie = p < k && is_tie(theta[p - 1], theta[p], scale, n);
            let pairs = EigenPairs {
                values: theta[..p].to_vec(),
                vectors,
                degenerate_tie,
            };
            return certify(s, &pairs, scale).then_some(pairs);
        }
        v = s_ritz;
        orthonormalize_columns(&mut v, &mut rng);
    }
    None
}

/// Direct residual check `‖S v − λ v‖ ≤ 1e-9 (‖S‖ + 1)` for every pair.
fn certify(s: &SymMatrix, pairs: &EigenPairs, norm_estimate: f64) -> bool {
    let sv = s.mul_block(&pairs.vectors);
    (0..pairs.len()).all(|j| {
        let r: f64 = (0..s.n())
            .map(|i| {
                let d = sv[(i, j)] - pairs.values[j] * pairs.vectors[(i, j)];
                d * d
            })
            .sum::<f64>()
            .sqrt();
        r <= 1e-9 * (norm_estimate + 1.0)
    })
}

/// Twice-iterated modified Gram-Schmidt on the columns of an n×k block.
/// Columns that collapse numerically are replaced with fresh random
/// directions.
fn orthonormalize_columns(v: &mut Matrix, rng: &mut ChaCha8Rng) {
    let (n, k) = v.shape();
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| v.col(j)).collect();
    for j in 0..k {
        let mut attempts = 0;
        loop {
            let original = norm2(&cols[j]);
            for _ in 0..2 {
                for i in 0..j {
                    let (done, rest) = cols.split_at_mut(j);
                    let proj = dot(&done[i], &rest[0]);
                    for (x, &q) in rest[0].iter_mut().zip(&done[i]) {
                        *x -= proj * q;
                    }
                }
            }
            let norm = norm2(&cols[j]);
            if norm > 1e-10 * original && norm > 0.0 {
                cols[j].iter_mut().for_each(|x| *x /= norm);
                break;
            }
            attempts += 1;
            assert!(attempts < 16, "cannot complete an orthonormal block");
            cols[j] = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        }
    }
    for (j, c) in cols.iter().enumerate() {
        v.set_col(j, c);
    }
}
