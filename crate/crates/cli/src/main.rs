//! `noisy-mds`: run the scaling experiments, embed or align matrix files,
//! and check the lower-bound packing constructions.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noisy_mds::align::align_matrices;
use noisy_mds::harness::{
    emit_csv, emit_svg_plot, failure_fraction, fit_loglog_slope, run_experiment, write_csv, Experiment,
    ExperimentPlan, Group, LossField, RateFit, TrialRecord,
};
use noisy_mds::io::{read_matrix_file, write_matrix, write_matrix_file};
use noisy_mds::lowerbound::{harmonic_scale, packing_check, PackingCheck, PackingKind};
use noisy_mds::{classical_scaling, DissimilarityMatrix, Error, NoiseModel, NoiseSpec};

const EXIT_FAILED: u8 = 1;
const EXIT_INVALID_PLAN: u8 = 2;
const EXIT_TOO_MANY_FAILURES: u8 = 3;

#[derive(Parser)]
#[command(name = "noisy-mds", version, about = "Classical scaling on noisy dissimilarities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ellipsoidal configurations under additive Student-t noise.
    Exp1(RunArgs),
    /// The six noise models on the unit ball.
    Exp2(RunArgs),
    /// Operator-norm deviation of the centered noise, Gaussian σ = 1.
    Concentration(RunArgs),
    /// Embed a dissimilarity matrix file.
    Embed(EmbedArgs),
    /// Align an estimate to a reference configuration and print the losses.
    Align(AlignArgs),
    /// Build a packing family and check its properties.
    PackingCheck(PackingArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated, strictly increasing point counts.
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    sigma_grid: Option<String>,
    #[arg(long)]
    kappa_grid: Option<String>,
    /// Student-t degrees of freedom; `inf` means Gaussian.
    #[arg(long)]
    q_grid: Option<String>,
    /// Comma-separated noise model tags.
    #[arg(long)]
    models: Option<String>,
    /// Mean shift of ξ.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory; CSV goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// `key=value` lines that override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Keep one configuration per n across trials.
    #[arg(long)]
    fixed_config: bool,
    /// Record wall-clock milliseconds per trial (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct EmbedArgs {
    /// Square dissimilarity matrix file.
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    p: usize,
    /// Directory for `embedding.txt` and `diagnostics.json`; stdout/stderr
    /// when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    /// Estimated configuration file.
    estimate: PathBuf,
    /// Reference configuration file.
    reference: PathBuf,
}

#[derive(Args)]
struct PackingArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: PackingKind,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    p: usize,
    #[arg(long, default_value_t = 1.5)]
    kappa: f64,
    #[arg(long, default_value_t = 4.0)]
    rx: f64,
    /// Perturbation size; defaults to γ/16.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<PackingKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn plan(message: impl ToString) -> Self {
        Self {
            code: EXIT_INVALID_PLAN,
            message: message.to_string(),
        }
    }

    fn other(message: impl ToString) -> Self {
        Self {
            code: EXIT_FAILED,
            message: message.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Exp1(args) => run(Experiment::Exp1, args),
        Command::Exp2(args) => run(Experiment::Exp2, args),
        Command::Concentration(args) => run(Experiment::Concentration, args),
        Command::Embed(args) => embed(args),
        Command::Align(args) => align(args),
        Command::PackingCheck(args) => packing(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("noisy-mds: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Failure::plan(format!("bad {what} value `{t}`"))))
        .collect()
}

/// Run settings after merging defaults, flags and the config file.
struct Settings {
    plan: ExperimentPlan,
    out: Option<PathBuf>,
    format: Format,
}

fn apply_key(s: &mut Settings, key: &str, value: &str) -> Result<(), Failure> {
    let plan = &mut s.plan;
    let scalar = |what: &str| Failure::plan(format!("bad {what} value `{value}`"));
    match key.replace('-', "_").as_str() {
        "n_grid" => plan.n_grid = parse_list(value, "n")?,
        "p" => plan.p = value.parse().map_err(|_| scalar("p"))?,
        "trials" => plan.trials = value.parse().map_err(|_| scalar("trials"))?,
        "sigma_grid" => plan.sigma_grid = parse_list(value, "sigma")?,
        "kappa_grid" => plan.kappa_grid = parse_list(value, "kappa")?,
        "q_grid" => plan.q_grid = parse_list(value, "q")?,
        "models" => plan.models = parse_list::<NoiseModel>(value, "model")?,
        "gamma" => plan.gamma = value.parse().map_err(|_| scalar("gamma"))?,
        "seed" => plan.master_seed = value.parse().map_err(|_| scalar("seed"))?,
        "jobs" => plan.jobs = value.parse().map_err(|_| scalar("jobs"))?,
        "fixed_config" => plan.fixed_config = value.parse().map_err(|_| scalar("fixed_config"))?,
        "timing" => plan.record_timing = value.parse().map_err(|_| scalar("timing"))?,
        "out" => s.out = Some(PathBuf::from(value)),
        "format" => {
            s.format = Format::from_str(value, true).map_err(|_| scalar("format"))?;
        }
        "noise" => {
            let spec: NoiseSpec = value.parse().map_err(Failure::plan)?;
            plan.models = vec![spec.model];
            plan.sigma_grid = vec![spec.xi.scale];
            plan.q_grid = vec![spec.xi.family.dof().unwrap_or(f64::INFINITY)];
            plan.gamma = spec.xi.mean_shift;
        }
        other => return Err(Failure::plan(format!("unknown config key `{other}`"))),
    }
    Ok(())
}

fn settings(experiment: Experiment, args: &RunArgs) -> Result<Settings, Failure> {
    let mut s = Settings {
        plan: ExperimentPlan::defaults_for(experiment),
        out: args.out.clone(),
        format: args.format.unwrap_or(Format::Csv),
    };
    let flags: [(&str, Option<String>); 10] = [
        ("n_grid", args.n_grid.clone()),
        ("p", args.p.map(|v| v.to_string())),
        ("trials", args.trials.map(|v| v.to_string())),
        ("sigma_grid", args.sigma_grid.clone()),
        ("kappa_grid", args.kappa_grid.clone()),
        ("q_grid", args.q_grid.clone()),
        ("models", args.models.clone()),
        ("gamma", args.gamma.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
        ("jobs", args.jobs.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(value) = value {
            apply_key(&mut s, key, &value)?;
        }
    }
    s.plan.fixed_config |= args.fixed_config;
    s.plan.record_timing |= args.timing;

    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::plan(format!("{}: {e}", path.display())))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Failure::plan(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
            apply_key(&mut s, key.trim(), value.trim())?;
        }
    }
    s.plan.validate().map_err(Failure::plan)?;
    if s.format != Format::Csv && s.out.is_none() {
        return Err(Failure::plan("SVG output needs --out"));
    }
    Ok(s)
}

fn plotted_fields(experiment: Experiment) -> &'static [LossField] {
    match experiment {
        Experiment::Concentration => &[LossField::OpnormDev],
        _ => &[LossField::Rmse, LossField::TwoInf],
    }
}

fn rate_fits(records: &[TrialRecord], field: LossField) -> Vec<RateFit> {
    Group::distinct(records)
        .iter()
        .filter_map(|g| fit_loglog_slope(records, field, g).ok())
        .collect()
}

fn run(experiment: Experiment, args: RunArgs) -> Result<(), Failure> {
    let Settings { plan, out, format } = settings(experiment, &args)?;
    let records = run_experiment(&plan).map_err(Failure::plan)?;

    if let Some(dir) = &out {
        fs::create_dir_all(dir).map_err(|e| Failure::other(format!("{}: {e}", dir.display())))?;
    }
    if format != Format::Svg {
        match &out {
            Some(dir) => emit_csv(&records, dir.join(format!("{experiment}.csv"))).map_err(Failure::other)?,
            None => write_csv(&records, io::stdout().lock()).map_err(Failure::other)?,
        }
    }
    for &field in plotted_fields(experiment) {
        let fits = rate_fits(&records, field);
        for f in &fits {
            eprintln!(
                "{} {}: slope {:.4} (r² {:.3})",
                field.tag(),
                f.group.label(),
                f.slope,
                f.r_squared
            );
        }
        if format != Format::Csv {
            let dir = out.as_deref().expect("checked in settings");
            let path = dir.join(format!("{experiment}_{}.svg", field.tag()));
            emit_svg_plot(&fits, &format!("{experiment}: {}", field.tag()), path).map_err(Failure::other)?;
        }
    }

    let failed = failure_fraction(&records);
    if failed > 0.5 {
        return Err(Failure {
            code: EXIT_TOO_MANY_FAILURES,
            message: format!("{:.0}% of trials failed", 100.0 * failed),
        });
    }
    Ok(())
}

fn embed(args: EmbedArgs) -> Result<(), Failure> {
    let m = read_matrix_file(&args.input).map_err(Failure::other)?;
    let d = DissimilarityMatrix::from_matrix(m).map_err(Failure::other)?;
    let emb = classical_scaling(&d, args.p).map_err(Failure::other)?;
    let diagnostics = serde_json::json!({
        "n": d.n(),
        "p": args.p,
        "eigenvalues": emb.eigenvalues,
        "clamped_count": emb.clamped_count,
        "residual_spectrum_norm": emb.residual_spectrum_norm,
        "degenerate_tie": emb.degenerate_tie,
    })
    .to_string();
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::other(format!("{}: {e}", dir.display())))?;
            write_matrix_file(&emb.points, dir.join("embedding.txt")).map_err(Failure::other)?;
            write_text(&dir.join("diagnostics.json"), &format!("{diagnostics}\n"))?;
        }
        None => {
            write_matrix(&emb.points, io::stdout().lock()).map_err(Failure::other)?;
            eprintln!("{diagnostics}");
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::other(format!("{}: {e}", path.display())))
}

fn align(args: AlignArgs) -> Result<(), Failure> {
    let estimate = read_matrix_file(&args.estimate).map_err(Failure::other)?;
    let reference = read_matrix_file(&args.reference).map_err(Failure::other)?;
    let fit = align_matrices(&estimate, &reference).map_err(Failure::other)?;
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{},{},{}", fit.loss_rmse, fit.loss_two_inf, fit.loss_avg).map_err(Failure::other)
}

fn packing(args: PackingArgs) -> Result<(), Failure> {
    let eta = args.eta.unwrap_or_else(|| harmonic_scale(args.kappa) / 16.0);
    let report = packing_check(&PackingCheck {
        kind: args.kind,
        n: args.n,
        p: args.p,
        kappa: args.kappa,
        rx: args.rx,
        eta,
        sigma: args.sigma,
        seed: args.seed,
    })
    .map_err(Failure::plan)?;
    let csv = report.to_csv();
    match &args.out {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    let failures: Vec<_> = report.failures().collect();
    if failures.is_empty() {
        eprintln!("{}: all {} checks passed", args.kind, report.rows.len());
        Ok(())
    } else {
        for f in &failures {
            eprintln!("failed: {} member {:?}: {} vs {}", f.check, f.member, f.measured, f.bound);
        }
        Err(Failure::other(format!("{} of {} checks failed", failures.len(), report.rows.len())))
    }
}
