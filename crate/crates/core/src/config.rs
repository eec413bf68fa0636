//! Latent configurations and their Euclidean dissimilarities.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, two_to_inf_norm, Matrix, SymMatrix};
use crate::noise::DissimilarityMatrix;
use crate::rng::Stream;

/// An n×p matrix of latent points plus where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub points: Matrix,
    pub seed: Option<u64>,
    pub generator: String,
}

impl Configuration {
    pub fn new(points: Matrix, generator: impl Into<String>) -> Self {
        Self {
            points,
            seed: None,
            generator: generator.into(),
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        Self::new(Matrix::from_rows(rows), "explicit")
    }

    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn p(&self) -> usize {
        self.points.cols()
    }

    pub fn is_finite(&self) -> bool {
        self.points.is_finite()
    }

    fn derived(&self, points: Matrix, step: &str) -> Self {
        Self {
            points,
            seed: self.seed,
            generator: format!("{}+{step}", self.generator),
        }
    }
}

/// Singular-value and row-radius summary of `HX/√n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MembershipReport {
    pub s_max: f64,
    pub s_min: f64,
    /// `‖HX‖₂→∞`.
    pub row_radius: f64,
    /// Smallest κ for which the singular values fit in `[1/κ, κ]`.
    pub kappa_fit: f64,
    pub in_class: bool,
}

/// `n` points drawn uniformly from the unit ball in ℝᵖ.
pub fn sample_unit_ball(n: usize, p: usize, seed: u64) -> Configuration {
    assert!(n >= 1 && p >= 1, "need at least one point in at least one dimension");
    let mut stream = Stream::new(seed);
    let mut points = Matrix::zeros(n, p);
    for i in 0..n {
        let row = points.row_mut(i);
        let norm = loop {
            row.iter_mut().for_each(|x| *x = stream.standard_normal());
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break norm;
            }
        };
        let radius = stream.uniform().powf(1.0 / p as f64);
        row.iter_mut().for_each(|x| *x *= radius / norm);
    }
    Configuration {
        points,
        seed: Some(seed),
        generator: "unit_ball".into(),
    }
}

/// Diagonal entries spaced linearly from `1/κ` to `κ`.
pub fn condition_scales(p: usize, kappa: f64) -> Result<Vec<f64>> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidKappa(kappa));
    }
    if p == 1 {
        return Ok(vec![kappa]);
    }
    let lo = 1.0 / kappa;
    let step = (kappa - lo) / (p - 1) as f64;
    Ok((0..p).map(|j| lo + j as f64 * step).collect())
}

/// `X·S` with `S = diag(condition_scales(p, κ))`.
pub fn apply_condition_scaling(x: &Configuration, kappa: f64) -> Result<Configuration> {
    let scales = condition_scales(x.p(), kappa)?;
    if kappa == 1.0 {
        return Ok(x.clone());
    }
    let points = Matrix::from_fn(x.n(), x.p(), |i, j| x.points[(i, j)] * scales[j]);
    Ok(x.derived(points, &format!("kappa={kappa}")))
}

/// Squared Euclidean distances, accumulated coordinate-wise.
pub fn distance_matrix(x: &Configuration) -> DissimilarityMatrix {
    let n = x.n();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        let xi = x.points.row(i);
        for j in (i + 1)..n {
            let xj = x.points.row(j);
            d[(i, j)] = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
        }
    }
    DissimilarityMatrix::from_sym(SymMatrix::from_upper(d))
        .expect("squared distances are hollow and symmetric")
}

/// `HX`: subtracts the column means.
pub fn center(x: &Configuration) -> Configuration {
    let points = center_matrix(&x.points);
    x.derived(points, "center")
}

pub(crate) fn center_matrix(m: &Matrix) -> Matrix {
    let means = m.col_means();
    Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] - means[j])
}

/// Singular values of `HX/√n`, descending.
pub fn centered_singular_values(x: &Matrix) -> Vec<f64> {
    let hx = center_matrix(x);
    let gram = SymMatrix::from_upper(hx.t_matmul(&hx).scale(1.0 / x.rows() as f64));
    let (values, _) = symmetric_eigen(&gram).expect("p×p Gram eigendecomposition");
    values.into_iter().map(|v| v.max(0.0).sqrt()).collect()
}

/// Computes the quantities that define membership in the configuration
/// class with condition bound `kappa` and row radius `rx`.
pub fn check_membership(x: &Configuration, kappa: f64, rx: f64) -> Result<MembershipReport> {
    if !(kappa > 1.0) || !(rx > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "membership needs kappa > 1 and rx > 0, got kappa={kappa}, rx={rx}"
        )));
    }
    let s = centered_singular_values(&x.points);
    let s_max = s[0];
    let s_min = *s.last().expect("p >= 1");
    if s_min <= 1e-12 {
        return Err(Error::RankDeficient(s_min));
    }
    let row_radius = two_to_inf_norm(&center_matrix(&x.points));
    let kappa_fit = s_max.max(1.0 / s_min);
    let in_class = 1.0 / kappa <= s_min && s_max <= kappa && row_radius <= rx;
    Ok(MembershipReport {
        s_max,
        s_min,
        row_radius,
        kappa_fit,
        in_class,
    })
}
