use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{norm2, Matrix};
use crate::error::{Error, Result};

/// Budget and stopping rule for the power iteration behind
/// [`spectral_norm`].
#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    pub max_iter: usize,
    /// Stop once the relative change of the `‖A v‖²` estimate falls below
    /// this for three consecutive iterations.
    pub tol: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            tol: 1e-14,
        }
    }
}

/// Outcome of a (possibly truncated) power iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    /// Lower bound on `‖A‖₂`, exact at convergence.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl PowerIteration {
    /// Power iteration on `AᵀA` from a fixed pseudo-random start. A start
    /// vector that lands in the null space is replaced by the next
    /// deterministic candidate.
    pub fn estimate(&self, a: &Matrix) -> NormEstimate {
        let cols = a.cols();
        if cols == 0 || a.rows() == 0 {
            return NormEstimate {
                value: 0.0,
                iterations: 0,
                converged: true,
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x0005_9ec7_4a1e);
        let mut v: Vec<f64> = (0..cols).map(|_| rng.random::<f64>() + 0.5).collect();
        normalize(&mut v);

        let mut estimate = 0.0;
        let mut calm = 0;
        let mut restarts = 0;
        for it in 1..=self.max_iter {
            let av = a.matvec(&v);
            let sq = av.iter().map(|x| x * x).sum::<f64>();
            let mut w = a.t_matvec(&av);
            let wn = norm2(&w);
            if wn == 0.0 || sq == 0.0 {
                // Stalled in the null space: try another direction.
                if restarts >= cols + 1 {
                    return NormEstimate {
                        value: 0.0,
                        iterations: it,
                        converged: true,
                    };
                }
                v = (0..cols).map(|_| rng.random::<f64>() - 0.5).collect();
                if restarts < cols {
                    v[restarts] += cols as f64;
                }
                normalize(&mut v);
                restarts += 1;
                continue;
            }
            let change = (sq - estimate).abs() / sq;
            estimate = sq;
            if change <= self.tol {
                calm += 1;
                if calm >= 3 {
                    return NormEstimate {
                        value: estimate.sqrt(),
                        iterations: it,
                        converged: true,
                    };
                }
            } else {
                calm = 0;
            }
            w.iter_mut().for_each(|x| *x /= wn);
            v = w;
        }
        NormEstimate {
            value: estimate.sqrt(),
            iterations: self.max_iter,
            converged: false,
        }
    }
}

fn normalize(v: &mut [f64]) {
    let n = norm2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Largest singular value `‖A‖₂`.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    let power = PowerIteration::default();
    let est = power.estimate(a);
    if !est.value.is_finite() {
        return Err(Error::InvalidArgument("non-finite matrix entries".into()));
    }
    if est.converged {
        Ok(est.value)
    } else {
        Err(Error::NonConvergence {
            what: "spectral norm power iteration",
            budget: power.max_iter,
        })
    }
}

/// `‖A‖₂→∞`, the largest row ℓ₂ norm.
pub fn two_to_inf_norm(a: &Matrix) -> f64 {
    (0..a.rows()).map(|i| norm2(a.row(i))).fold(0.0, f64::max)
}

pub fn frobenius_norm(a: &Matrix) -> f64 {
    norm2(a.as_slice())
}

/// Induced ∞-norm (largest absolute row sum).
pub fn inf_norm(a: &Matrix) -> f64 {
    (0..a.rows())
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
