//! Random perturbations of dissimilarity matrices.
//!
//! Observed dissimilarities are `D = Δ + Ψ(Δ, Ξ)` where `Ξ` is a symmetric
//! hollow matrix of i.i.d. draws `ξ = γ + σ·T` and `Ψ` is one of six
//! entrywise noise models.

use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::rng::Stream;

/// Symmetric matrix of squared dissimilarities with an exactly zero
/// diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarityMatrix(SymMatrix);

impl DissimilarityMatrix {
    pub fn from_sym(s: SymMatrix) -> Result<Self> {
        if let Some(i) = (0..s.n()).find(|&i| s[(i, i)] != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dissimilarity diagonal must be zero, entry ({i},{i}) is {}",
                s[(i, i)]
            )));
        }
        Ok(Self(s))
    }

    /// Accepts a square matrix that is symmetric up to `1e-12` relative
    /// and hollow; the upper triangle is kept.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if m.rows() != m.cols() || m.rows() == 0 {
            return Err(Error::ShapeMismatch {
                expected: (m.rows(), m.rows()),
                actual: m.shape(),
            });
        }
        let tol = 1e-12 * m.max_abs();
        let n = m.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (m[(i, j)] - m[(j, i)]).abs() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "dissimilarity matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Self::from_sym(SymMatrix::from_upper(m))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &Matrix {
        self.0.as_matrix()
    }

    pub fn into_sym(self) -> SymMatrix {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum XiFamily {
    Gaussian,
    /// Student-t with `dof` degrees of freedom; `dof = ∞` is the normal.
    StudentT { dof: f64 },
    Rademacher,
}

impl XiFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            XiFamily::Gaussian => "gaussian",
            XiFamily::StudentT { .. } => "student_t",
            XiFamily::Rademacher => "rademacher",
        }
    }

    pub fn dof(&self) -> Option<f64> {
        match self {
            XiFamily::StudentT { dof } => Some(*dof),
            _ => None,
        }
    }

    /// `E|T|^k` of the standardized family member, `None` when infinite.
    pub fn abs_moment(&self, k: f64) -> Option<f64> {
        let half_sqrt_pi_ln = 0.5 * std::f64::consts::PI.ln();
        match *self {
            XiFamily::Rademacher => Some(1.0),
            XiFamily::Gaussian => Some(gaussian_abs_moment(k)),
            XiFamily::StudentT { dof } if dof.is_infinite() => Some(gaussian_abs_moment(k)),
            XiFamily::StudentT { dof } => (dof > k).then(|| {
                (0.5 * k * dof.ln() + ln_gamma(0.5 * (k + 1.0)) + ln_gamma(0.5 * (dof - k))
                    - half_sqrt_pi_ln
                    - ln_gamma(0.5 * dof))
                .exp()
            }),
        }
    }
}

fn gaussian_abs_moment(k: f64) -> f64 {
    (0.5 * k * 2f64.ln() + ln_gamma(0.5 * (k + 1.0)) - 0.5 * std::f64::consts::PI.ln()).exp()
}

/// Distribution of the entries `ξ = mean_shift + scale·T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiDistribution {
    pub family: XiFamily,
    /// σ ≥ 0.
    pub scale: f64,
    /// γ = E(ξ).
    pub mean_shift: f64,
}

impl XiDistribution {
    pub fn new(family: XiFamily, scale: f64) -> Result<Self> {
        if !(scale >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise scale must be >= 0, got {scale}")));
        }
        if let XiFamily::StudentT { dof } = family {
            if !(dof > 0.0) {
                return Err(Error::InvalidArgument(format!("t dof must be > 0, got {dof}")));
            }
        }
        Ok(Self {
            family,
            scale,
            mean_shift: 0.0,
        })
    }

    pub fn gaussian(scale: f64) -> Self {
        Self::new(XiFamily::Gaussian, scale).expect("valid gaussian scale")
    }

    pub fn student_t(dof: f64, scale: f64) -> Self {
        Self::new(XiFamily::StudentT { dof }, scale).expect("valid t parameters")
    }

    pub fn with_mean_shift(mut self, gamma: f64) -> Self {
        self.mean_shift = gamma;
        self
    }

    /// Whether `E|ξ|^k < ∞`.
    pub fn has_q_moments(&self, k: f64) -> bool {
        match self.family {
            XiFamily::StudentT { dof } => dof > k,
            _ => true,
        }
    }

    /// Upper bound on `‖ξ‖_{L^k}` (exact when the mean shift is zero).
    pub fn lk_norm(&self, k: f64) -> Option<f64> {
        if self.scale == 0.0 {
            return Some(self.mean_shift.abs());
        }
        self.family
            .abs_moment(k)
            .map(|m| self.mean_shift.abs() + self.scale * m.powf(1.0 / k))
    }

    /// One draw `γ + σ·T`.
    pub fn draw(&self, stream: &mut Stream) -> f64 {
        let t = match self.family {
            XiFamily::Gaussian => stream.standard_normal(),
            XiFamily::StudentT { dof } => stream.student_t(dof),
            XiFamily::Rademacher => stream.rademacher(),
        };
        self.mean_shift + self.scale * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseModel {
    Additive,
    Multiplicative,
    AbsAdditive,
    AbsMultiplicative,
    ThreshAdditive,
    ThreshMultiplicative,
}

impl NoiseModel {
    pub const ALL: [NoiseModel; 6] = [
        NoiseModel::Additive,
        NoiseModel::Multiplicative,
        NoiseModel::AbsAdditive,
        NoiseModel::AbsMultiplicative,
        NoiseModel::ThreshAdditive,
        NoiseModel::ThreshMultiplicative,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            NoiseModel::Additive => "additive",
            NoiseModel::Multiplicative => "multiplicative",
            NoiseModel::AbsAdditive => "abs_additive",
            NoiseModel::AbsMultiplicative => "abs_multiplicative",
            NoiseModel::ThreshAdditive => "thresh_additive",
            NoiseModel::ThreshMultiplicative => "thresh_multiplicative",
        }
    }

    /// Observed dissimilarity for one off-diagonal entry.
    #[inline]
    pub fn observe(&self, delta: f64, xi: f64) -> f64 {
        match self {
            NoiseModel::Additive => delta + xi,
            NoiseModel::Multiplicative => delta * (1.0 + xi),
            NoiseModel::AbsAdditive => {
                let r = delta.max(0.0).sqrt() + xi;
                r * r
            }
            NoiseModel::AbsMultiplicative => {
                let f = 1.0 + xi;
                delta * f * f
            }
            NoiseModel::ThreshAdditive => (delta + xi).max(0.0),
            NoiseModel::ThreshMultiplicative => (delta * (1.0 + xi)).max(0.0),
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseModel::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::Parse(format!("unknown noise model `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    pub xi: XiDistribution,
}

/// `model=<tag> family=<tag> dof=<real> sigma=<real> gamma=<real>`
impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dof = self.xi.family.dof().unwrap_or(f64::INFINITY);
        write!(
            f,
            "model={} family={} dof={} sigma={} gamma={}",
            self.model,
            self.xi.family.tag(),
            dof,
            self.xi.scale,
            self.xi.mean_shift
        )
    }
}

impl FromStr for NoiseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut model = None;
        let mut family = None;
        let mut dof = None;
        let mut sigma = None;
        let mut gamma = 0.0;
        for token in s.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{token}`")))?;
            let real = || {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("`{key}` expects a real, got `{value}`")))
            };
            match key {
                "model" => model = Some(value.parse::<NoiseModel>()?),
                "family" => family = Some(value.to_owned()),
                "dof" => dof = Some(real()?),
                "sigma" => sigma = Some(real()?),
                "gamma" => gamma = real()?,
                _ => return Err(Error::Parse(format!("unknown noise key `{key}`"))),
            }
        }
        let family = match family.as_deref() {
            Some("gaussian") => XiFamily::Gaussian,
            Some("rademacher") => XiFamily::Rademacher,
            Some("student_t") => XiFamily::StudentT {
                dof: dof.ok_or_else(|| Error::Parse("student_t requires dof".into()))?,
            },
            Some(other) => return Err(Error::Parse(format!("unknown noise family `{other}`"))),
            None => return Err(Error::Parse("missing `family`".into())),
        };
        let xi = XiDistribution::new(family, sigma.ok_or_else(|| Error::Parse("missing `sigma`".into()))?)?
            .with_mean_shift(gamma);
        Ok(NoiseSpec {
            model: model.ok_or_else(|| Error::Parse("missing `model`".into()))?,
            xi,
        })
    }
}

/// Symmetric hollow matrix with i.i.d. upper-triangular entries drawn from
/// `dist`, filled row by row.
pub fn sample_xi_matrix(dist: &XiDistribution, n: usize, seed: u64) -> SymMatrix {
    assert!(n >= 1);
    let mut stream = Stream::new(seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let row = m.row_mut(i);
        for x in row[i + 1..].iter_mut() {
            *x = dist.draw(&mut stream);
        }
    }
    SymMatrix::from_upper(m)
}

/// Entrywise `d_ij = Ψ(δ_ij, ξ_ij)` off the diagonal, zero on it.
pub fn apply_noise_model(
    spec: &NoiseSpec,
    delta: &DissimilarityMatrix,
    xi: &SymMatrix,
) -> Result<DissimilarityMatrix> {
    let n = delta.n();
    if xi.n() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, n),
            actual: (xi.n(), xi.n()),
        });
    }
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        let drow = delta.as_sym().row(i);
        let xrow = xi.row(i);
        let out = d.row_mut(i);
        for j in (i + 1)..n {
            out[j] = spec.model.observe(drow[j], xrow[j]);
        }
    }
    DissimilarityMatrix::from_sym(SymMatrix::from_upper(d))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MomentBound {
    Finite(f64),
    Unbounded,
}

/// Bound on `max E[|ε|^k | δ]^{1/k}` over `δ ∈ [0, delta_max]`, from
/// Minkowski's inequality applied to each model's error term.
pub fn conditional_moment_bound(spec: &NoiseSpec, delta_max: f64, k: f64) -> MomentBound {
    assert!(k >= 1.0, "moment order must be >= 1");
    let xi = &spec.xi;
    let norm_k = xi.lk_norm(k);
    // ‖ξ²‖_k = ‖ξ‖_{2k}²
    let norm_sq = xi.lk_norm(2.0 * k).map(|v| v * v);
    let bound = match spec.model {
        NoiseModel::Additive | NoiseModel::ThreshAdditive => norm_k,
        NoiseModel::Multiplicative | NoiseModel::ThreshMultiplicative => norm_k.map(|v| delta_max * v),
        NoiseModel::AbsAdditive => norm_k
            .zip(norm_sq)
            .map(|(a, b)| b + 2.0 * delta_max.max(0.0).sqrt() * a),
        NoiseModel::AbsMultiplicative => norm_k.zip(norm_sq).map(|(a, b)| delta_max * (2.0 * a + b)),
    };
    match bound {
        Some(v) => MomentBound::Finite(v),
        None => MomentBound::Unbounded,
    }
}
