//! Monte-Carlo experiment driver: plans, per-trial pipeline, log-log rate
//! fits, and CSV/SVG output.

mod csv;
mod fit;
mod svg;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::align::align_matrices;
use crate::config::{apply_condition_scaling, distance_matrix, sample_unit_ball};
use crate::error::{Error, Result};
use crate::linalg::{double_center, inf_norm, lanczos_norm, two_sided_center, Matrix, SymMatrix};
use crate::noise::{apply_noise_model, sample_xi_matrix, NoiseModel, NoiseSpec, XiDistribution};
use crate::rng::derive_seed;
use crate::scaling::classical_scaling;

pub use self::csv::{emit_csv, parse_csv, read_csv, write_csv, CSV_HEADER};
pub use self::fit::{fit_loglog_slope, percentile, Group, LossField, RateFit};
pub use self::svg::{emit_svg_plot, reference_curve, render_svg};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Exp1,
    Exp2,
    Concentration,
    Custom,
}

impl Experiment {
    pub fn tag(&self) -> &'static str {
        match self {
            Experiment::Exp1 => "exp1",
            Experiment::Exp2 => "exp2",
            Experiment::Concentration => "concentration",
            Experiment::Custom => "custom",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp1" => Ok(Experiment::Exp1),
            "exp2" => Ok(Experiment::Exp2),
            "concentration" => Ok(Experiment::Concentration),
            "custom" => Ok(Experiment::Custom),
            other => Err(Error::Parse(format!("unknown experiment `{other}`"))),
        }
    }
}

/// Lanczos budget for `opnorm_dev`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpnormBudget {
    pub max_steps: usize,
    pub tol: f64,
}

impl Default for OpnormBudget {
    fn default() -> Self {
        Self {
            max_steps: 300,
            tol: 1e-6,
        }
    }
}

/// A full grid of trial cells.
///
/// `q = ∞` in `q_grid` means Gaussian ξ; finite values mean Student-t with
/// that many degrees of freedom. ξ is always `σ·T` with `T` standard.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub experiment: Experiment,
    pub n_grid: Vec<usize>,
    pub p: usize,
    pub trials: usize,
    pub kappa_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub models: Vec<NoiseModel>,
    /// Mean shift of ξ.
    pub gamma: f64,
    pub master_seed: u64,
    pub jobs: usize,
    /// Reuse one configuration per (n, κ) cell across trials instead of
    /// resampling it every trial.
    pub fixed_config: bool,
    pub opnorm: OpnormBudget,
    /// Store wall-clock times. Off by default so that output depends only on
    /// the plan.
    pub record_timing: bool,
}

pub const DEFAULT_N_GRID: [usize; 6] = [128, 256, 512, 1024, 2048, 4096];

impl ExperimentPlan {
    fn base(experiment: Experiment) -> Self {
        Self {
            experiment,
            n_grid: DEFAULT_N_GRID.to_vec(),
            p: 3,
            trials: 10,
            kappa_grid: vec![1.0],
            sigma_grid: vec![0.25],
            q_grid: vec![3.0, 5.0, 7.0],
            models: vec![NoiseModel::Additive],
            gamma: 0.0,
            master_seed: 0,
            jobs: 1,
            fixed_config: false,
            opnorm: OpnormBudget::default(),
            record_timing: false,
        }
    }

    /// Ellipsoidal configurations under additive t noise.
    pub fn exp1() -> Self {
        Self {
            kappa_grid: vec![1.0, 1.25, 1.5, 1.75, 2.0],
            sigma_grid: vec![0.1, 0.25, 0.5],
            ..Self::base(Experiment::Exp1)
        }
    }

    /// All six noise models on the unit ball.
    pub fn exp2() -> Self {
        Self {
            models: NoiseModel::ALL.to_vec(),
            ..Self::base(Experiment::Exp2)
        }
    }

    /// Additive Gaussian noise with σ = 1, to track `‖D̃c − Δ̃c‖₂`.
    pub fn concentration() -> Self {
        Self {
            n_grid: vec![256, 512, 1024, 2048],
            sigma_grid: vec![1.0],
            q_grid: vec![f64::INFINITY],
            ..Self::base(Experiment::Concentration)
        }
    }

    pub fn custom() -> Self {
        Self::base(Experiment::Custom)
    }

    pub fn defaults_for(experiment: Experiment) -> Self {
        match experiment {
            Experiment::Exp1 => Self::exp1(),
            Experiment::Exp2 => Self::exp2(),
            Experiment::Concentration => Self::concentration(),
            Experiment::Custom => Self::custom(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("n grid must be non-empty and strictly increasing: {:?}", self.n_grid));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.p == 0 || self.p >= self.n_grid[0] {
            return bad(format!("need 1 <= p < min n, got p={}", self.p));
        }
        if self.kappa_grid.is_empty() || self.kappa_grid.iter().any(|&k| !(k >= 1.0) || !k.is_finite()) {
            return bad(format!("kappa values must be finite and >= 1: {:?}", self.kappa_grid));
        }
        if self.sigma_grid.is_empty() || self.sigma_grid.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return bad(format!("sigma values must be finite and >= 0: {:?}", self.sigma_grid));
        }
        if self.q_grid.is_empty() || self.q_grid.iter().any(|&q| !(q > 0.0)) {
            return bad(format!("q values must be > 0: {:?}", self.q_grid));
        }
        if self.models.is_empty() {
            return bad("at least one noise model is required".into());
        }
        if self.jobs == 0 {
            return bad("jobs must be >= 1".into());
        }
        if !self.gamma.is_finite() {
            return bad("gamma must be finite".into());
        }
        Ok(())
    }

    /// All cells in output order: κ, σ, q, model, n, trial (outermost first).
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.cell_count());
        for (ki, &kappa) in self.kappa_grid.iter().enumerate() {
            for (si, &sigma) in self.sigma_grid.iter().enumerate() {
                for (qi, &q) in self.q_grid.iter().enumerate() {
                    for (mi, &model) in self.models.iter().enumerate() {
                        for (ni, &n) in self.n_grid.iter().enumerate() {
                            for trial in 0..self.trials {
                                out.push(Cell {
                                    n,
                                    kappa,
                                    sigma,
                                    q,
                                    model,
                                    trial,
                                    index: [ni, ki, si, qi, mi, trial],
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn cell_count(&self) -> usize {
        self.kappa_grid.len()
            * self.sigma_grid.len()
            * self.q_grid.len()
            * self.models.len()
            * self.n_grid.len()
            * self.trials
    }

    /// Noise specification of a cell.
    pub fn noise_spec(&self, cell: &Cell) -> Result<NoiseSpec> {
        let xi = if cell.q.is_infinite() {
            XiDistribution::gaussian(cell.sigma)
        } else {
            XiDistribution::new(crate::noise::XiFamily::StudentT { dof: cell.q }, cell.sigma)?
        };
        Ok(NoiseSpec {
            model: cell.model,
            xi: xi.with_mean_shift(self.gamma),
        })
    }

    /// Seeds for the configuration and for ξ. The configuration seed depends
    /// on n and the trial only (or on n alone with `fixed_config`), so every
    /// κ, σ, q and model sees the same underlying points.
    pub fn seeds(&self, cell: &Cell) -> (u64, u64) {
        const CONFIG: u64 = 0xc0f1_6000;
        const NOISE: u64 = 0x0015_e000;
        let [ni, ..] = cell.index;
        let trial = if self.fixed_config { u64::MAX } else { cell.trial as u64 };
        let config = derive_seed(self.master_seed, &[CONFIG, ni as u64, trial]);
        let mut coords = vec![NOISE];
        coords.extend(cell.index.iter().map(|&i| i as u64));
        (config, derive_seed(self.master_seed, &coords))
    }
}

/// Coordinates of one trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub kappa: f64,
    pub sigma: f64,
    pub q: f64,
    pub model: NoiseModel,
    pub trial: usize,
    /// Grid indices (n, κ, σ, q, model, trial).
    pub index: [usize; 6],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    NonConvergence,
    Failed,
}

impl TrialStatus {
    pub fn tag(&self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::NonConvergence => "nonconvergence",
            TrialStatus::Failed => "failed",
        }
    }
}

impl FromStr for TrialStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(TrialStatus::Ok),
            "nonconvergence" => Ok(TrialStatus::NonConvergence),
            "failed" => Ok(TrialStatus::Failed),
            other => Err(Error::Parse(format!("unknown trial status `{other}`"))),
        }
    }
}

/// One row of experiment output. Losses are NaN for failed trials.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub experiment: Experiment,
    pub n: usize,
    pub p: usize,
    pub kappa: f64,
    pub sigma: f64,
    pub q: f64,
    pub model: NoiseModel,
    pub trial: usize,
    pub status: TrialStatus,
    pub loss_rmse: f64,
    pub loss_two_inf: f64,
    pub loss_avg: f64,
    /// `‖double_center(D) − double_center(Δ)‖₂`.
    pub opnorm_dev: f64,
    pub clamped_count: usize,
    pub wall_ms: u64,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }
}

/// Runs one cell: sample the configuration, apply the condition scaling,
/// observe noisy dissimilarities, embed and align.
pub fn run_trial(plan: &ExperimentPlan, cell: &Cell) -> TrialRecord {
    let start = Instant::now();
    let mut record = TrialRecord {
        experiment: plan.experiment,
        n: cell.n,
        p: plan.p,
        kappa: cell.kappa,
        sigma: cell.sigma,
        q: cell.q,
        model: cell.model,
        trial: cell.trial,
        status: TrialStatus::Ok,
        loss_rmse: f64::NAN,
        loss_two_inf: f64::NAN,
        loss_avg: f64::NAN,
        opnorm_dev: f64::NAN,
        clamped_count: 0,
        wall_ms: 0,
    };
    if let Err(e) = trial_pipeline(plan, cell, &mut record) {
        record.status = match e {
            Error::NonConvergence { .. } => TrialStatus::NonConvergence,
            _ => TrialStatus::Failed,
        };
    }
    if plan.record_timing {
        record.wall_ms = start.elapsed().as_millis() as u64;
    }
    record
}

fn trial_pipeline(plan: &ExperimentPlan, cell: &Cell, record: &mut TrialRecord) -> Result<()> {
    let (config_seed, noise_seed) = plan.seeds(cell);
    let ball = sample_unit_ball(cell.n, plan.p, config_seed);
    let x = apply_condition_scaling(&ball, cell.kappa)?;
    let delta = distance_matrix(&x);
    let spec = plan.noise_spec(cell)?;
    let xi = sample_xi_matrix(&spec.xi, cell.n, noise_seed);
    let d = apply_noise_model(&spec, &delta, &xi)?;

    let error = SymMatrix::from_upper(d.as_matrix().sub(delta.as_matrix()));
    let dev = lanczos_norm(&double_center(&error), plan.opnorm.max_steps, plan.opnorm.tol);
    record.opnorm_dev = dev.value;

    let emb = classical_scaling(&d, plan.p)?;
    record.clamped_count = emb.clamped_count;
    let fit = align_matrices(&emb.points, &x.points)?;
    record.loss_rmse = fit.loss_rmse;
    record.loss_two_inf = fit.loss_two_inf;
    record.loss_avg = fit.loss_avg;
    Ok(())
}

/// Runs every cell of the plan on `plan.jobs` workers. The records come back
/// in cell order whatever the schedule.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<TrialRecord>> {
    plan.validate()?;
    let cells = plan.cells();
    if plan.jobs == 1 {
        return Ok(cells.iter().map(|c| run_trial(plan, c)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(|c| run_trial(plan, c)).collect()))
}

/// Fraction of records whose status is not `ok`.
pub fn failure_fraction(records: &[TrialRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| !r.is_ok()).count() as f64 / records.len() as f64
}

/// Empirical `‖H·mean(E)·H‖∞` over `reps` independent draws of the error
/// matrix `E = D − Δ`. Small values indicate that the centered mean error
/// is negligible for this model and configuration.
pub fn centered_mean_drift(
    spec: &NoiseSpec,
    delta: &crate::noise::DissimilarityMatrix,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    let n = delta.n();
    let mut sum = Matrix::zeros(n, n);
    for r in 0..reps.max(1) {
        let xi = sample_xi_matrix(&spec.xi, n, derive_seed(seed, &[r as u64]));
        let d = apply_noise_model(spec, delta, &xi)?;
        sum = sum.add(&d.as_matrix().sub(delta.as_matrix()));
    }
    let mean = sum.scale(1.0 / reps.max(1) as f64);
    Ok(inf_norm(&two_sided_center(&mean)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentPlan {
        ExperimentPlan {
            n_grid: vec![20, 40],
            trials: 2,
            q_grid: vec![7.0],
            ..ExperimentPlan::exp1()
        }
    }

    #[test]
    fn default_cardinalities() {
        let p = ExperimentPlan::exp1();
        assert_eq!(p.cell_count(), 5 * 3 * 3 * 6 * 10);
        assert_eq!(p.cells().len(), p.cell_count());
        assert_eq!(ExperimentPlan::exp2().models.len(), 6);
    }

    #[test]
    fn validation() {
        assert!(ExperimentPlan::exp1().validate().is_ok());
        let mut p = tiny();
        p.n_grid = vec![40, 20];
        assert!(p.validate().is_err());
        let mut p = tiny();
        p.trials = 0;
        assert!(p.validate().is_err());
        let mut p = tiny();
        p.kappa_grid = vec![0.5];
        assert!(p.validate().is_err());
    }

    #[test]
    fn noiseless_cell_recovers() {
        let mut plan = tiny();
        plan.sigma_grid = vec![0.0];
        plan.kappa_grid = vec![1.5];
        let records = run_experiment(&plan).unwrap();
        for r in &records {
            assert!(r.is_ok());
            assert!(r.loss_rmse <= 1e-8, "{}", r.loss_rmse);
            assert!(r.opnorm_dev.abs() <= 1e-12);
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let plan = tiny();
        let cell = plan.cells()[5];
        assert_eq!(run_trial(&plan, &cell), run_trial(&plan, &cell));
    }

    #[test]
    fn fixed_config_shares_points() {
        let mut plan = tiny();
        plan.fixed_config = true;
        let cells = plan.cells();
        assert_eq!(plan.seeds(&cells[0]).0, plan.seeds(&cells[1]).0);
        assert_ne!(plan.seeds(&cells[0]).1, plan.seeds(&cells[1]).1);
        plan.fixed_config = false;
        assert_ne!(plan.seeds(&cells[0]).0, plan.seeds(&cells[1]).0);
    }

    #[test]
    fn additive_noise_has_no_drift() {
        let x = sample_unit_ball(30, 2, 1);
        let delta = distance_matrix(&x);
        let spec = NoiseSpec {
            model: NoiseModel::Additive,
            xi: XiDistribution::gaussian(0.5),
        };
        let drift = centered_mean_drift(&spec, &delta, 400, 3).unwrap();
        // Averaging 400 draws leaves entries of size ~0.5/20.
        assert!(drift < 1.5, "{drift}");
    }
}
