//! `splitreg`: fit, tune, predict and simulate from the command line.

mod artifact;
mod data;
mod experiment;
mod output;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use splitreg::tuning::{best_candidate, tune_candidates, SweepKind, DEFAULT_ALPHA, DEFAULT_FOLDS};
use splitreg::{fit, lambda_s_max, standardize, CvPlan, PenaltySpec, SolverSettings, TuningSettings};

use artifact::{CandidateSummary, CvReport, FitArtifact, FitContext, Provenance, SCHEMA_VERSION};
use output::write_atomically;

#[derive(Parser)]
#[command(name = "splitreg", version, about = "Split regularized regression")]
struct Cli {
    /// Worker threads for cross-validation and simulation (default: all cores).
    #[arg(long, global = true, env = "SPLITREG_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit G models at fixed penalties and write a fit artifact.
    Fit(FitArgs),
    /// Choose the penalties and G by cross-validation.
    Cv(CvArgs),
    /// Predict with the averaged model of a fit artifact.
    Predict(PredictArgs),
    /// Run a simulation experiment from a TOML config.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Name of the response column.
    #[arg(long, default_value = "y")]
    response: String,
}

#[derive(Args)]
struct SolverArgs {
    /// Convergence threshold on the squared change of the averaged coefficients.
    #[arg(long, default_value_t = splitreg::solver::DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value_t = splitreg::solver::DEFAULT_MAX_CYCLES)]
    max_cycles: usize,
}

impl SolverArgs {
    fn settings(&self) -> SolverSettings {
        SolverSettings::default().with_tolerance(self.tolerance).with_max_cycles(self.max_cycles)
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long)]
    lambda_s: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda_d: f64,
    #[arg(long, default_value_t = 10)]
    num_models: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output path of the fit artifact (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Candidate numbers of models.
    #[arg(long, value_delimiter = ',', default_value = "2,5,7,10")]
    num_models: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    max_outer_iterations: usize,
    /// Fit every grid point from zero instead of the previous solution.
    #[arg(long)]
    no_warm_starts: bool,
    /// Suppress the per-grid-point trace on standard output.
    #[arg(long)]
    quiet: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output path of the CV report (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Output path of the selected fit artifact (default: the report path with extension `fit.json`).
    #[arg(long)]
    fit_out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Fit artifact written by `fit` or `cv`.
    #[arg(long)]
    artifact: PathBuf,
    /// CSV whose columns are matched to the artifact's features by name.
    #[arg(long)]
    data: PathBuf,
    /// Output CSV with a single `prediction` column.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Path to a TOML config, or the name of a bundled config.
    #[arg(long)]
    config: String,
    /// Directory for records.csv, summary.csv and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let train = data::read_training(&args.data.data, &args.data.response)?;
    let design = standardize(train.x.view(), train.y.view())?;
    let spec = PenaltySpec::new(args.alpha, args.lambda_s, args.lambda_d, args.num_models)?;
    let settings = args.solver.settings();
    let out = fit(&design, &spec, &settings)?;
    let ctx = FitContext {
        feature_names: &train.feature_names,
        response: &args.data.response,
        x_raw: train.x.view(),
        design: &design,
        input_sha256: &train.sha256,
        seed: None,
    };
    let art = FitArtifact::build(&ctx, &spec, &out.bundle, out.converged, Some(out.cycles))?;
    write_atomically(&args.out, &to_json(&art)?)?;

    if out.bundle.is_null() {
        let threshold = lambda_s_max(&design, spec.alpha, spec.lambda_d, spec.num_models, &settings).ok();
        match threshold {
            Some(t) => eprintln!("warning: all models are empty (lambda_s = {} is at or above lambda_s_max = {t})", spec.lambda_s),
            None => eprintln!("warning: all models are empty"),
        }
    }
    if !out.converged {
        eprintln!("warning: solver stopped after {} cycles without converging", out.cycles);
    }
    println!("objective\t{}", art.diagnostics.objective);
    println!("ovp\t{}", art.diagnostics.ovp);
    println!("converged\t{}\t{} cycles", out.converged, out.cycles);
    let counts: Vec<String> = art.diagnostics.nonzero_counts.iter().map(|c| c.to_string()).collect();
    println!("nonzero\t{}", counts.join("\t"));
    Ok(())
}

fn sweep_name(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::LambdaS => "lambda_s",
        SweepKind::LambdaD => "lambda_d",
    }
}

fn cmd_cv(args: &CvArgs) -> Result<()> {
    let train = data::read_training(&args.data.data, &args.data.response)?;
    let design = standardize(train.x.view(), train.y.view())?;
    let plan = CvPlan::new(design.n(), args.folds, args.seed)?;
    let settings = TuningSettings {
        solver: args.solver.settings(),
        max_outer_iterations: args.max_outer_iterations,
        warm_starts: !args.no_warm_starts,
        ..Default::default()
    };
    let results = tune_candidates(&design, &args.num_models, args.alpha, &plan, &settings);

    let mut trace = String::from("num_models\touter\tsweep\tlambda_s\tlambda_d\tcv_mspe\tconverged\n");
    let mut candidates = Vec::new();
    for (g, outcome) in &results {
        match outcome {
            Ok(r) => {
                for t in &r.trace {
                    let _ = writeln!(trace, "{g}\t{}\t{}\t{}\t{}\t{}\t{}", t.outer_iteration, sweep_name(t.sweep), t.lambda_s, t.lambda_d, t.cv_mspe, t.converged);
                }
                candidates.push(CandidateSummary { num_models: *g, cv_mspe: Some(r.cv_mspe), lambda_s: Some(r.lambda_s_opt), lambda_d: Some(r.lambda_d_opt), error: None });
            }
            Err(e) => {
                eprintln!("warning: G = {g} failed: {e}");
                candidates.push(CandidateSummary { num_models: *g, cv_mspe: None, lambda_s: None, lambda_d: None, error: Some(e.to_string()) });
            }
        }
    }
    let selected = best_candidate(results).context("cross-validation failed for every candidate")?;

    let ctx = FitContext {
        feature_names: &train.feature_names,
        response: &args.data.response,
        x_raw: train.x.view(),
        design: &design,
        input_sha256: &train.sha256,
        seed: Some(args.seed),
    };
    let art = FitArtifact::build(&ctx, &selected.spec(), &selected.bundle, selected.final_fit_converged, None)?;
    let provenance = Provenance { input_sha256: train.sha256.clone(), seed: Some(args.seed), version: env!("CARGO_PKG_VERSION").to_string() };
    let report = CvReport { schema_version: SCHEMA_VERSION, folds: args.folds, seed: args.seed, candidates, selected, provenance };

    let fit_out = args.fit_out.clone().unwrap_or_else(|| args.out.with_extension("fit.json"));
    write_atomically(&args.out, &to_json(&report)?)?;
    write_atomically(&fit_out, &to_json(&art)?)?;

    if !args.quiet {
        print!("{trace}");
    }
    let s = &report.selected;
    println!("selected\tG={}\tlambda_s={}\tlambda_d={}\tcv_mspe={}", s.num_models, s.lambda_s_opt, s.lambda_d_opt, s.cv_mspe);
    if s.nonconverged_fits > 0 {
        eprintln!("warning: {} fold fits did not converge", s.nonconverged_fits);
    }
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.artifact).with_context(|| format!("cannot read {}", args.artifact.display()))?;
    let art = FitArtifact::from_json(&text).with_context(|| format!("{}: invalid fit artifact", args.artifact.display()))?;
    let x = data::read_features(&args.data, &art.feature_names, &art.response)?;
    let pred = art.predict(x.view())?;
    let mut out = String::from("prediction\n");
    for v in &pred {
        let _ = writeln!(out, "{v}");
    }
    write_atomically(&args.out, out.as_bytes())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let results = experiment::run(&args.config, &args.out_dir)?;
    print!("{}", experiment::summary_csv(&results));
    Ok(())
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            anyhow::bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot configure the thread pool")?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
