//! Packing constructions behind the minimax lower bounds, built as concrete
//! configurations so that their properties can be checked numerically.
//!
//! Two families are provided. The Fano family perturbs an isotropic base
//! `X = γ√n·U` along a fixed direction `v` with sign patterns `ω(τ)` indexed
//! by binary codewords `τ`. The Le Cam family pushes one row at a time
//! outward along its own direction. Both bases use `γ = 2κ/(κ²+1)`, the
//! harmonic mean of `1/κ` and `κ`.
//!
//! Hamming distances follow the convention `d_H(τ, τ') = ½‖τ − τ'‖₁`.

use std::fmt;
use std::str::FromStr;

use crate::align::align_matrices;
use crate::config::{center_matrix, centered_singular_values, distance_matrix, Configuration};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, norm2, random_orthogonal, two_to_inf_norm, Matrix};
use crate::noise::DissimilarityMatrix;
use crate::rng::Stream;

/// `d_H(a, b) = ½‖a − b‖₁`.
pub fn half_hamming(a: &[u8], b: &[u8]) -> f64 {
    0.5 * a.iter().zip(b).filter(|(x, y)| x != y).count() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryCode {
    pub m: usize,
    /// Every pair of words satisfies `d_H ≥ min_sep`.
    pub min_sep: f64,
    /// The first word is all zeros.
    pub words: Vec<Vec<u8>>,
}

impl BinaryCode {
    /// Smallest pairwise `d_H`, by exhaustive scan.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut min = f64::INFINITY;
        for (i, a) in self.words.iter().enumerate() {
            for b in &self.words[i + 1..] {
                min = min.min(half_hamming(a, b));
            }
        }
        min
    }
}

/// `(τ, −τ)` for even `n`, `(τ, 0, −τ)` for odd `n`.
pub fn omega_embed(tau: &[u8], n: usize) -> Result<Vec<i8>> {
    let m = n / 2;
    if tau.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: tau.len(),
        });
    }
    let mut out = Vec::with_capacity(n);
    out.extend(tau.iter().map(|&t| t as i8));
    if n % 2 == 1 {
        out.push(0);
    }
    out.extend(tau.iter().map(|&t| -(t as i8)));
    Ok(out)
}

/// Randomized greedy code: draw uniform words and keep those at distance at
/// least `min_sep` from every kept word, stopping at `max(2, 2^⌊m/8⌋)`
/// words or after the attempt budget.
pub fn varshamov_gilbert(m: usize, min_sep: f64, seed: u64) -> Result<BinaryCode> {
    let target = 1usize.checked_shl((m / 8) as u32).unwrap_or(usize::MAX).max(2);
    let budget = 20_000usize;
    let mut stream = Stream::new(seed);
    let mut words = vec![vec![0u8; m]];
    let mut attempts = 0;
    while words.len() < target && attempts < budget {
        attempts += 1;
        let candidate: Vec<u8> = (0..m).map(|_| (stream.uniform() < 0.5) as u8).collect();
        if words.iter().all(|w| half_hamming(w, &candidate) >= min_sep) {
            words.push(candidate);
        }
    }
    if words.len() < 2 {
        return Err(Error::BudgetExhausted {
            found: words.len(),
            min_sep,
            attempts,
        });
    }
    Ok(BinaryCode { m, min_sep, words })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PackingKind {
    Fano,
    LeCam,
}

impl fmt::Display for PackingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PackingKind::Fano => "fano",
            PackingKind::LeCam => "lecam",
        })
    }
}

impl FromStr for PackingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fano" => Ok(PackingKind::Fano),
            "lecam" => Ok(PackingKind::LeCam),
            other => Err(Error::Parse(format!("unknown packing kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PackingFamily {
    pub kind: PackingKind,
    pub base: Configuration,
    pub members: Vec<Configuration>,
    pub eta: f64,
    /// Fano only: the perturbation direction `v`.
    pub direction: Option<Vec<f64>>,
    /// Fano only: the codeword behind each member.
    pub codewords: Vec<Vec<u8>>,
    /// Le Cam only: whether the base satisfies `X_k = −X_{k+n/2}`.
    pub antipodal: bool,
}

/// `2κ/(κ²+1)`.
pub fn harmonic_scale(kappa: f64) -> f64 {
    2.0 * kappa / (kappa * kappa + 1.0)
}

/// Base configuration for a packing family.
#[derive(Clone, Debug)]
pub struct PackingBase {
    pub x: Configuration,
    pub gamma: f64,
    /// Target for `‖U‖₂→∞`, namely `Rx/(2√n)`.
    pub frame_radius_target: f64,
    pub frame_radius: f64,
    pub meets_target: bool,
}

/// Orthonormal `n×p` frame built from discrete Fourier columns. With
/// `include_constant` the first column is `1/√n`; otherwise every column is
/// orthogonal to the all-ones vector. Row norms are exactly `√(p/n)`
/// whenever the pairing works out (always for even `n`).
fn fourier_frame(n: usize, p: usize, include_constant: bool) -> Result<Matrix> {
    let nf = n as f64;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    if include_constant {
        cols.push(vec![1.0 / nf.sqrt(); n]);
    }
    let mut freq = 1;
    while cols.len() < p {
        let remaining = p - cols.len();
        if remaining == 1 && n % 2 == 0 {
            cols.push((0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt()).collect());
            break;
        }
        if 2 * freq >= n {
            return Err(Error::InvalidArgument(format!(
                "cannot fit a {p}-column frame into {n} points"
            )));
        }
        let w = std::f64::consts::TAU * freq as f64 / nf;
        let amp = (2.0 / nf).sqrt();
        cols.push((0..n).map(|i| amp * (w * i as f64).cos()).collect());
        if cols.len() < p {
            cols.push((0..n).map(|i| amp * (w * i as f64).sin()).collect());
        }
        freq += 1;
    }
    let mut m = Matrix::zeros(n, p);
    for (j, c) in cols.iter().enumerate() {
        m.set_col(j, c);
    }
    Ok(m)
}

/// Randomizes a frame by a row permutation and a right rotation, which
/// keeps orthonormality, orthogonality to `1` and the row norms.
fn randomize_frame(frame: &Matrix, seed: u64) -> Matrix {
    let (n, p) = frame.shape();
    let mut stream = Stream::new(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (stream.uniform() * (i + 1) as f64) as usize;
        perm.swap(i, j.min(i));
    }
    let permuted = Matrix::from_fn(n, p, |i, j| frame[(perm[i], j)]);
    permuted.matmul(&random_orthogonal(p, stream.uniform().to_bits()))
}

fn base_from_frame(u: Matrix, kappa: f64, rx: f64, generator: &str, seed: u64) -> PackingBase {
    let n = u.rows();
    let gamma = harmonic_scale(kappa);
    let frame_radius = two_to_inf_norm(&u);
    let frame_radius_target = rx / (2.0 * (n as f64).sqrt());
    let x = Configuration {
        points: u.scale(gamma * (n as f64).sqrt()),
        seed: Some(seed),
        generator: generator.into(),
    };
    PackingBase {
        x,
        gamma,
        frame_radius_target,
        frame_radius,
        meets_target: frame_radius <= frame_radius_target * (1.0 + 1e-12),
    }
}

fn check_kappa_rx(kappa: f64, rx: f64) -> Result<()> {
    if !(kappa >= 1.0) || !(rx > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need kappa >= 1 and rx > 0, got kappa={kappa}, rx={rx}"
        )));
    }
    Ok(())
}

/// `X = γ√n·U` with `UᵀU = I`, `1ᵀU = 0` and equal row norms.
pub fn isotropic_base(n: usize, p: usize, kappa: f64, rx: f64, seed: u64) -> Result<PackingBase> {
    check_kappa_rx(kappa, rx)?;
    let u = randomize_frame(&fourier_frame(n, p, false)?, seed);
    Ok(base_from_frame(u, kappa, rx, "isotropic_frame", seed))
}

/// Antipodal base `U = [V; −V]/√2` for even `n`, so that `X_k = −X_{k+n/2}`.
pub fn antipodal_base(n: usize, p: usize, kappa: f64, rx: f64, seed: u64) -> Result<PackingBase> {
    check_kappa_rx(kappa, rx)?;
    if n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("antipodal base needs even n, got {n}")));
    }
    let m = n / 2;
    let v = randomize_frame(&fourier_frame(m, p, true)?, seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let u = Matrix::from_fn(n, p, |i, j| if i < m { s * v[(i, j)] } else { -s * v[(i - m, j)] });
    Ok(base_from_frame(u, kappa, rx, "antipodal_frame", seed))
}

fn require_centered(x: &Configuration) -> Result<()> {
    let sums: Vec<f64> = x.points.col_means().iter().map(|m| m * x.n() as f64).collect();
    let imbalance = norm2(&sums);
    if imbalance > 1e-9 * frobenius_norm(&x.points) {
        return Err(Error::NotCentered(imbalance));
    }
    Ok(())
}

/// `Y(τ) = X + η·ω(τ)·vᵀ`, one member per codeword.
pub fn build_fano_family(
    x: &Configuration,
    eta: f64,
    v: &[f64],
    code: &BinaryCode,
) -> Result<PackingFamily> {
    let (n, p) = (x.n(), x.p());
    if v.len() != p || (norm2(v) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("direction must be a unit p-vector".into()));
    }
    require_centered(x)?;
    let members = code
        .words
        .iter()
        .map(|tau| {
            let omega = omega_embed(tau, n)?;
            let points =
                Matrix::from_fn(n, p, |i, j| x.points[(i, j)] + eta * omega[i] as f64 * v[j]);
            Ok(Configuration {
                points,
                seed: x.seed,
                generator: format!("{}+fano", x.generator),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PackingFamily {
        kind: PackingKind::Fano,
        base: x.clone(),
        members,
        eta,
        direction: Some(v.to_vec()),
        codewords: code.words.clone(),
        antipodal: false,
    })
}

/// `X^k = X + η·e_k·(X_k/‖X_k‖)ᵀ` for every row `k`.
pub fn build_lecam_family(x: &Configuration, eta: f64) -> Result<PackingFamily> {
    let (n, p) = (x.n(), x.p());
    require_centered(x)?;
    let norms: Vec<f64> = (0..n).map(|k| norm2(x.points.row(k))).collect();
    if let Some(k) = norms.iter().position(|&r| r <= 1e-12) {
        return Err(Error::ZeroRow(k));
    }
    let antipodal = n % 2 == 0 && {
        let m = n / 2;
        let scale = x.points.max_abs();
        (0..m).all(|k| {
            (0..p).all(|j| (x.points[(k, j)] + x.points[(k + m, j)]).abs() <= 1e-12 * scale)
        })
    };
    let members = (0..n)
        .map(|k| {
            let mut points = x.points.clone();
            for (j, value) in points.row_mut(k).iter_mut().enumerate() {
                *value += eta * x.points[(k, j)] / norms[k];
            }
            Configuration {
                points,
                seed: x.seed,
                generator: format!("{}+lecam[{k}]", x.generator),
            }
        })
        .collect();
    Ok(PackingFamily {
        kind: PackingKind::LeCam,
        base: x.clone(),
        members,
        eta,
        direction: None,
        codewords: Vec::new(),
        antipodal,
    })
}

/// KL divergence between the Gaussian observation laws of two dissimilarity
/// matrices: `‖ΔA − ΔB‖_F² / (4σ²)`.
pub fn kl_gaussian_dissimilarity(
    a: &DissimilarityMatrix,
    b: &DissimilarityMatrix,
    sigma: f64,
) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::ShapeMismatch {
            expected: (a.n(), a.n()),
            actual: (b.n(), b.n()),
        });
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be > 0, got {sigma}")));
    }
    let diff = a.as_matrix().sub(b.as_matrix());
    Ok(frobenius_norm(&diff).powi(2) / (4.0 * sigma * sigma))
}

/// Upper-triangular nonzero entries of `Δ(member) − Δ(base)`, sorted by
/// position. Only pairs touching a changed row are evaluated.
fn dissimilarity_change(base: &Matrix, member: &Matrix) -> Vec<((usize, usize), f64)> {
    let n = base.rows();
    let changed: Vec<bool> = (0..n).map(|i| base.row(i) != member.row(i)).collect();
    let sq = |m: &Matrix, i: usize, j: usize| -> f64 {
        m.row(i).iter().zip(m.row(j)).map(|(a, b)| (a - b) * (a - b)).sum()
    };
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if changed[i] || changed[j] {
                let d = sq(member, i, j) - sq(base, i, j);
                if d != 0.0 {
                    out.push(((i, j), d));
                }
            }
        }
    }
    out
}

/// `⟨A, B⟩_F` of two symmetric hollow changes stored by upper triangle.
fn sparse_frobenius_dot(a: &[((usize, usize), f64)], b: &[((usize, usize), f64)]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    2.0 * s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TvBound {
    /// May exceed 1, in which case the bound is vacuous.
    pub raw: f64,
    pub clamped: f64,
}

/// Chi-square based bound on the total variation between the base law and
/// the uniform mixture over a Le Cam family.
pub fn tv_chi2_bound(family: &PackingFamily, sigma: f64) -> Result<TvBound> {
    if family.kind != PackingKind::LeCam {
        return Err(Error::InvalidArgument("TV bound applies to Le Cam families".into()));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be > 0, got {sigma}")));
    }
    let n = family.members.len();
    let changes: Vec<_> = family
        .members
        .iter()
        .map(|m| dissimilarity_change(&family.base.points, &m.points))
        .collect();
    let max_sq = changes
        .iter()
        .map(|c| sparse_frobenius_dot(c, c))
        .fold(0.0, f64::max);
    let mut max_cross = f64::NEG_INFINITY;
    for k in 0..n {
        for l in 0..n {
            if k != l {
                max_cross = max_cross.max(sparse_frobenius_dot(&changes[k], &changes[l]));
            }
        }
    }
    if n < 2 {
        max_cross = 0.0;
    }
    let s2 = sigma * sigma;
    let radicand = (max_sq / s2 - (n as f64).ln()).exp() + (max_cross / s2).exp() - 1.0;
    let raw = radicand.max(0.0).sqrt();
    Ok(TvBound {
        raw,
        clamped: raw.clamp(0.0, 1.0),
    })
}

/// One numerical check in a packing report.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    /// `None` for family-wide checks.
    pub member: Option<usize>,
    pub check: &'static str,
    pub measured: f64,
    pub bound: f64,
    /// Fitted constant for inequalities that hold up to a constant.
    pub constant: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Default)]
pub struct PackingReport {
    pub kind: Option<PackingKind>,
    pub rows: Vec<CheckRow>,
}

impl PackingReport {
    pub const CSV_HEADER: &'static str = "kind,member,check,measured,bound,constant,pass";

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_csv(&self) -> String {
        let kind = self.kind.map(|k| k.to_string()).unwrap_or_default();
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let member = r.member.map_or_else(|| "all".to_string(), |m| m.to_string());
            let constant = r.constant.map_or_else(String::new, |c| c.to_string());
            out.push_str(&format!(
                "{kind},{member},{},{},{},{constant},{}\n",
                r.check, r.measured, r.bound, r.pass
            ));
        }
        out
    }

    fn push(&mut self, member: Option<usize>, check: &'static str, measured: f64, bound: f64, pass: bool) {
        self.rows.push(CheckRow {
            member,
            check,
            measured,
            bound,
            constant: None,
            pass,
        });
    }

    fn push_fitted(
        &mut self,
        member: Option<usize>,
        check: &'static str,
        measured: f64,
        bound: f64,
        constant: f64,
        pass: bool,
    ) {
        self.rows.push(CheckRow {
            member,
            check,
            measured,
            bound,
            constant: Some(constant),
            pass,
        });
    }
}

const SV_SLACK: f64 = 1e-9;

/// Checks the structural inequalities of a packing family member by member.
///
/// Inequalities that hold only up to an absolute constant are reported with
/// the fitted constant; their pass/fail uses an explicit constant that
/// follows from the triangle inequality on the construction (64 for the
/// Fano Frobenius bound, 16 for both Le Cam Frobenius bounds).
pub fn verify_packing_properties(family: &PackingFamily, kappa: f64, rx: f64) -> PackingReport {
    let mut report = PackingReport {
        kind: Some(family.kind),
        rows: Vec::new(),
    };
    let gamma = harmonic_scale(kappa);
    let eta = family.eta;
    let n = family.base.n();
    let nf = n as f64;
    let base = &family.base.points;

    match family.kind {
        PackingKind::Fano => {
            for (k, y) in family.members.iter().enumerate() {
                let s = centered_singular_values(&y.points);
                let (s1, sp) = (s[0], *s.last().unwrap());
                report.push(Some(k), "sv_lower", sp, gamma - eta, sp >= gamma - eta - SV_SLACK);
                report.push(Some(k), "sv_upper", s1, gamma + eta, s1 <= gamma + eta + SV_SLACK);

                let change = dissimilarity_change(base, &y.points);
                let fro = sparse_frobenius_dot(&change, &change);
                let scale = nf * nf * (gamma * gamma * eta * eta + eta.powi(4));
                let c = if scale > 0.0 { fro / scale } else { 0.0 };
                report.push_fitted(Some(k), "delta_frobenius", fro, 64.0 * scale, c, fro <= 64.0 * scale * (1.0 + 1e-12));
            }

            // Pairwise separation and the ω/τ distance relation.
            let m = family.members.len();
            let omegas: Vec<Vec<i8>> = family
                .codewords
                .iter()
                .map(|t| omega_embed(t, n).expect("codeword length checked at build"))
                .collect();
            for i in 0..m {
                let mut min_c = f64::INFINITY;
                let mut min_loss = f64::INFINITY;
                let mut relation_ok = true;
                let mut zeta_ratio = f64::NAN;
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let dh = half_hamming(&family.codewords[i], &family.codewords[j]);
                    let l1: i32 = omegas[i]
                        .iter()
                        .zip(&omegas[j])
                        .map(|(a, b)| (*a as i32 - *b as i32).abs())
                        .sum();
                    relation_ok &= 0.5 * l1 as f64 == 2.0 * dh;
                    let zeta_sq: i32 = omegas[i]
                        .iter()
                        .zip(&omegas[j])
                        .map(|(a, b)| (*a as i32 - *b as i32).pow(2))
                        .sum();
                    if dh > 0.0 {
                        zeta_ratio = zeta_sq as f64 / dh;
                    }
                    if eta > 0.0 && dh > 0.0 {
                        let loss = align_matrices(&family.members[i].points, &family.members[j].points)
                            .expect("same shape")
                            .loss_rmse;
                        let shape = gamma * eta / (gamma + eta) * (dh / nf).sqrt();
                        min_c = min_c.min(loss / shape);
                        min_loss = min_loss.min(loss);
                    }
                }
                if m > 1 {
                    report.push(Some(i), "dh_relation", zeta_ratio, 4.0, relation_ok);
                }
                if m > 1 && eta > 0.0 && eta <= gamma / 8.0 && min_c.is_finite() {
                    report.push_fitted(Some(i), "rmse_separation", min_loss, 0.0, min_c, min_c > 0.0);
                }
            }
        }
        PackingKind::LeCam => {
            let changes: Vec<_> = family
                .members
                .iter()
                .map(|m| dissimilarity_change(base, &m.points))
                .collect();
            let sep_scale = nf * (eta.powi(4) + eta * eta * (gamma + rx).powi(2));
            let cross_scale = eta.powi(4) + eta * eta * rx * rx;
            for (k, xk) in family.members.iter().enumerate() {
                let radius = two_to_inf_norm(&center_matrix(&xk.points));
                let radius_bound = eta + gamma * rx / 2.0;
                report.push(Some(k), "row_radius", radius, radius_bound, radius <= radius_bound + 1e-9);

                let s = centered_singular_values(&xk.points);
                let (s1, sp) = (s[0], *s.last().unwrap());
                let shift = eta / nf.sqrt();
                report.push(Some(k), "sv_lower", sp, gamma - shift, sp >= gamma - shift - SV_SLACK);
                report.push(Some(k), "sv_upper", s1, gamma + shift, s1 <= gamma + shift + SV_SLACK);

                let sep = align_matrices(&xk.points, base).expect("same shape").loss_two_inf;
                report.push(Some(k), "two_inf_separation", sep, eta / 2.0, sep >= eta / 2.0 - 1e-9);

                let fro = sparse_frobenius_dot(&changes[k], &changes[k]);
                let c = if sep_scale > 0.0 { fro / sep_scale } else { 0.0 };
                report.push_fitted(Some(k), "delta_frobenius", fro, 16.0 * sep_scale, c, fro <= 16.0 * sep_scale * (1.0 + 1e-12));

                let cross = (0..changes.len())
                    .filter(|&l| l != k)
                    .map(|l| sparse_frobenius_dot(&changes[k], &changes[l]))
                    .fold(f64::NEG_INFINITY, f64::max);
                if cross.is_finite() {
                    let c = if cross_scale > 0.0 { cross / cross_scale } else { 0.0 };
                    report.push_fitted(Some(k), "delta_cross", cross, 16.0 * cross_scale, c, cross <= 16.0 * cross_scale * (1.0 + 1e-12));
                }
            }
        }
    }
    report
}

/// Parameters of a full packing check.
#[derive(Clone, Copy, Debug)]
pub struct PackingCheck {
    pub kind: PackingKind,
    pub n: usize,
    pub p: usize,
    pub kappa: f64,
    pub rx: f64,
    pub eta: f64,
    pub sigma: f64,
    pub seed: u64,
}

/// Builds the base and family for `params`, verifies the member-wise
/// properties, and appends family-wide checks: the codebook separation
/// (Fano), the KL identity against a per-entry Gaussian KL sum, and the
/// TV bound together with its value at η = 0 (Le Cam).
pub fn packing_check(params: &PackingCheck) -> Result<PackingReport> {
    let PackingCheck {
        kind,
        n,
        p,
        kappa,
        rx,
        eta,
        sigma,
        seed,
    } = *params;
    if n < 2 * (p + 1) || p == 0 {
        return Err(Error::InvalidArgument(format!("need p >= 1 and n >= 2(p+1), got n={n}, p={p}")));
    }
    let (base, family) = match kind {
        PackingKind::Fano => {
            let base = isotropic_base(n, p, kappa, rx, seed)?;
            let m = n / 2;
            let code = varshamov_gilbert(m, (m as f64 / 8.0).ceil(), seed ^ 0xc0de)?;
            let mut v = vec![0.0; p];
            v[0] = 1.0;
            let family = build_fano_family(&base.x, eta, &v, &code)?;
            (base, (family, Some(code)))
        }
        PackingKind::LeCam => {
            let base = antipodal_base(n, p, kappa, rx, seed)?;
            let family = build_lecam_family(&base.x, eta)?;
            (base, (family, None))
        }
    };
    let (family, code) = family;
    let mut report = verify_packing_properties(&family, kappa, rx);

    report.push(
        None,
        "base_frame_radius",
        base.frame_radius,
        base.frame_radius_target,
        base.meets_target,
    );
    if let Some(code) = &code {
        report.push(None, "vg_separation", code.min_pairwise_distance(), code.min_sep, code.min_pairwise_distance() >= code.min_sep);
    }

    let base_delta = distance_matrix(&family.base);
    let mut worst_kl = 0.0f64;
    for member in &family.members {
        let delta = distance_matrix(member);
        let kl = kl_gaussian_dissimilarity(&delta, &base_delta, sigma)?;
        let direct = per_entry_gaussian_kl(&delta, &base_delta, sigma);
        let rel = if direct == 0.0 { kl.abs() } else { (kl - direct).abs() / direct };
        worst_kl = worst_kl.max(rel);
    }
    report.push(None, "kl_identity", worst_kl, 1e-12, worst_kl <= 1e-12);

    if kind == PackingKind::LeCam {
        let tv = tv_chi2_bound(&family, sigma)?;
        report.push(None, "tv_bound", tv.raw, 1.0, tv.raw.is_finite());
        let flat = build_lecam_family(&family.base, 0.0)?;
        let tv0 = tv_chi2_bound(&flat, sigma)?.raw;
        let expect = 1.0 / (n as f64).sqrt();
        report.push(None, "tv_eta0", tv0, expect, (tv0 - expect).abs() <= 1e-12);
    }
    Ok(report)
}

/// `Σ_{k<ℓ} (a_kℓ − b_kℓ)² / (2σ²)`: KL between two Gaussian laws with
/// means `a`, `b` and common variance σ², summed entry by entry.
fn per_entry_gaussian_kl(a: &DissimilarityMatrix, b: &DissimilarityMatrix, sigma: f64) -> f64 {
    let n = a.n();
    let mut s = 0.0;
    for k in 0..n {
        for l in (k + 1)..n {
            let d = a.as_matrix()[(k, l)] - b.as_matrix()[(k, l)];
            s += d * d / (2.0 * sigma * sigma);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_examples() {
        assert_eq!(omega_embed(&[1, 0], 4).unwrap(), vec![1, 0, -1, 0]);
        assert_eq!(omega_embed(&[0, 0], 4).unwrap(), vec![0; 4]);
        assert_eq!(omega_embed(&[1, 1], 5).unwrap(), vec![1, 1, 0, -1, -1]);
        assert!(matches!(omega_embed(&[1], 4), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn small_codes() {
        let c = varshamov_gilbert(8, 1.0, 3).unwrap();
        assert!(c.words.len() >= 2);
        assert!(c.words[0].iter().all(|&b| b == 0));
        assert!(c.min_pairwise_distance() >= 1.0);
        assert!(matches!(varshamov_gilbert(4, 10.0, 1), Err(Error::BudgetExhausted { .. })));
    }

    #[test]
    fn bases_are_isotropic_and_centered() {
        for (n, p) in [(64, 3), (64, 2), (33, 3), (40, 4)] {
            let b = isotropic_base(n, p, 1.5, 4.0, 1).unwrap();
            let s = centered_singular_values(&b.x.points);
            for sv in s {
                assert!((sv - b.gamma).abs() < 1e-12, "n={n} p={p}");
            }
            let means = b.x.points.col_means();
            assert!(means.iter().all(|m| m.abs() < 1e-13));
        }
        let b = antipodal_base(64, 3, 1.5, 4.0, 2).unwrap();
        assert!(b.meets_target);
        let fam = build_lecam_family(&b.x, 0.1).unwrap();
        assert!(fam.antipodal);
        assert!(antipodal_base(63, 3, 1.5, 4.0, 2).is_err());
    }

    #[test]
    fn fano_rejects_uncentered_base() {
        let x = Configuration::from_rows(&[[1.0], [2.0], [3.0], [4.0]]);
        let code = BinaryCode {
            m: 2,
            min_sep: 0.0,
            words: vec![vec![0, 0]],
        };
        assert!(matches!(build_fano_family(&x, 0.1, &[1.0], &code), Err(Error::NotCentered(_))));
    }

    #[test]
    fn lecam_rejects_zero_rows() {
        let x = Configuration::from_rows(&[[1.0], [0.0], [-1.0]]);
        assert!(matches!(build_lecam_family(&x, 0.1), Err(Error::ZeroRow(1))));
    }

    #[test]
    fn tv_requires_lecam() {
        let b = isotropic_base(16, 2, 1.0, 4.0, 0).unwrap();
        let code = varshamov_gilbert(8, 1.0, 0).unwrap();
        let fam = build_fano_family(&b.x, 0.1, &[1.0, 0.0], &code).unwrap();
        assert!(tv_chi2_bound(&fam, 1.0).is_err());
    }

    #[test]
    fn report_csv_shape() {
        let report = packing_check(&PackingCheck {
            kind: PackingKind::LeCam,
            n: 16,
            p: 2,
            kappa: 1.5,
            rx: 4.0,
            eta: 0.05,
            sigma: 1.0,
            seed: 3,
        })
        .unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(PackingReport::CSV_HEADER));
        assert!(lines.all(|l| l.starts_with("lecam,") && l.split(',').count() == 7));
    }
}
