//! Command-line front end for the multigiant library.
//!
//! Subcommands mirror the pipeline: `validate` a model file, `analyze` its
//! spectral threshold, solve the companion branching process with `bp`,
//! `sample` one graph, run seeded component `simulate` trials, combine
//! prediction and measurement into a `verdict`, and trace a parametrized
//! family with `sweep`.
//!
//! Exit codes: 0 when the command completed (and any verdict passed),
//! 2 when a verdict or validation failed, 1 on any error.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use multigiant_core::branching::{
    build_offspring_law, extinction_fixed_point, simulate_total_size,
};
use multigiant_core::configuration::{sample_configuration, sample_simple};
use multigiant_core::experiments::{run_sweep, run_verdict, simulate_trials, trial_csv};
use multigiant_core::rng::child_stream;
use multigiant_core::spectral::{
    bipartite_criterion, build_mean_matrix, check_irreducible, perron_eigenpair,
};
use multigiant_core::{
    CloneGraph, DegreeSequence, DegreeSpec, ExperimentPlan, Regime, RoundingPolicy, SizeOutcome,
    SpecFamily, SweepPlan, Verdict,
};
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "multigiant",
    version,
    about = "Giant components in random multipartite graphs: predict, sample, and verify"
)]
struct Cli {
    /// Worker threads for parallel trials (0 keeps the rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model or sequence file and print its validation report.
    Validate(ValidateArgs),
    /// Mean matrix, eigenvalue, regime, and eigenvector as JSON.
    Analyze(AnalyzeArgs),
    /// Extinction probabilities and survival of the companion branching
    /// process, with an optional Monte Carlo cross-check.
    Bp(BpArgs),
    /// Sample one graph and print its edge list.
    Sample(SampleArgs),
    /// Component statistics over seeded trials, as CSV.
    Simulate(SimulateArgs),
    /// Analytic prediction plus empirical checks, as a JSON report.
    Verdict(VerdictArgs),
    /// Survival curve across an interpolated model family, as CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Model file (JSON with parts and mass atoms).
    #[arg(long, required_unless_present = "seq", conflicts_with = "seq")]
    spec: Option<PathBuf>,
    /// Realized sequence file (JSON with parts, n, and count atoms).
    #[arg(long)]
    seq: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Eigenvalue solver tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct BpArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Fixed-point solver tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Total-progeny cap above which a Monte Carlo trial counts as survival.
    #[arg(long, default_value_t = 10_000)]
    cap: u64,
    /// Monte Carlo trials; 0 skips the simulation cross-check.
    #[arg(long, default_value_t = 10_000)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SampleArgs {
    /// Realized sequence file to sample from.
    #[arg(long, conflicts_with_all = ["spec", "n"], required_unless_present = "spec")]
    seq: Option<PathBuf>,
    /// Model file to realize at --n vertices first.
    #[arg(long, requires = "n")]
    spec: Option<PathBuf>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Redraw until the graph is simple.
    #[arg(long)]
    simple: bool,
    /// Redraw budget for --simple.
    #[arg(long, default_value_t = 1_000)]
    max_attempts: u32,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    trials: u32,
    #[arg(long)]
    simple: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerdictArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Graph sizes, repeatable or comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    n: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    trials: u32,
    #[arg(long)]
    simple: bool,
    /// Also write the per-trial rows as CSV to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Model file at parameter 0.
    #[arg(long)]
    from: PathBuf,
    /// Model file at parameter 1.
    #[arg(long)]
    to: PathBuf,
    /// Interpolation parameters, repeatable or comma-separated.
    #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0])]
    params: Vec<f64>,
    /// Graph sizes, repeatable or comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    n: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    trials: u32,
    #[arg(long)]
    simple: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not errors.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let _ = writeln!(io::stderr(), "error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Bp(args) => cmd_bp(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verdict(args) => cmd_verdict(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn load_spec(path: &PathBuf) -> Result<DegreeSpec> {
    DegreeSpec::load(path).with_context(|| format!("loading model file {}", path.display()))
}

fn load_valid_spec(path: &PathBuf) -> Result<DegreeSpec> {
    let spec = load_spec(path)?;
    let report = spec.validate();
    if !report.is_valid() {
        let issues: Vec<String> = report.errors.iter().map(|e| e.to_string()).collect();
        bail!(
            "model file {} is invalid: {}",
            path.display(),
            issues.join("; ")
        );
    }
    Ok(spec)
}

fn print_stdout(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        // A consumer that closed the pipe early got everything it wanted.
        Err(err) if err.kind() == io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(err) => Err(err).context("writing to stdout"),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    print_stdout(&text)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing output file {}", path.display()))
        }
        None => print_stdout(text),
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<u8> {
    let (valid, body) = if let Some(path) = &args.spec {
        let spec = load_spec(path)?;
        let report = spec.validate();
        let valid = report.is_valid();
        (
            valid,
            serde_json::json!({ "valid": valid, "report": report }),
        )
    } else {
        let path = args.seq.as_ref().expect("clap requires one input");
        let seq = DegreeSequence::load(path)
            .with_context(|| format!("loading sequence file {}", path.display()))?;
        let report = seq.to_spec().validate();
        let valid = report.is_valid();
        (
            valid,
            serde_json::json!({ "valid": valid, "stats": seq.stats(), "report": report }),
        )
    };
    print_json(&body)?;
    Ok(if valid { 0 } else { 2 })
}

#[derive(Serialize)]
struct AnalyzeOut {
    gamma: Option<f64>,
    regime: Option<Regime>,
    irreducible: bool,
    left_vector: Option<Vec<f64>>,
    residual: Option<f64>,
    /// Ordered part-pairs labelling the matrix rows and columns, 0-based.
    types: Vec<(usize, usize)>,
    matrix: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    blocks: Vec<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    newman_sum: Option<f64>,
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<u8> {
    let spec = load_valid_spec(&args.spec)?;
    let matrix = build_mean_matrix(&spec);
    let newman_sum = bipartite_criterion(&spec).ok().map(|s| s.to_f64());
    let irreducibility = check_irreducible(&matrix);
    let out = if irreducibility.irreducible {
        let result = perron_eigenpair(&matrix, args.tol, 1_000_000)?;
        AnalyzeOut {
            gamma: Some(result.gamma),
            regime: Some(result.regime),
            irreducible: true,
            left_vector: Some(result.left_vector),
            residual: Some(result.residual),
            types: matrix.index().to_vec(),
            matrix: matrix.rows_f64(),
            blocks: Vec::new(),
            newman_sum,
        }
    } else {
        AnalyzeOut {
            gamma: None,
            regime: None,
            irreducible: false,
            left_vector: None,
            residual: None,
            types: matrix.index().to_vec(),
            matrix: matrix.rows_f64(),
            blocks: irreducibility.components,
            newman_sum,
        }
    };
    print_json(&out)?;
    Ok(0)
}

#[derive(Serialize)]
struct BpOut {
    /// Extinction probability per clone type, indexed like `types`.
    q: Vec<f64>,
    eta: f64,
    iterations: usize,
    residual: f64,
    types: Vec<(usize, usize)>,
    mc_survival: Option<f64>,
    stderr: Option<f64>,
}

fn cmd_bp(args: BpArgs) -> Result<u8> {
    let spec = load_valid_spec(&args.spec)?;
    let law = build_offspring_law(&spec);
    let solution = extinction_fixed_point(&law, args.tol, 1_000_000)?;
    let (mc_survival, stderr) = if args.trials > 0 {
        let survived: u64 = (0..args.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = child_stream(args.seed, &format!("bp/{t}"));
                u64::from(matches!(
                    simulate_total_size(&law, args.cap, &mut rng),
                    SizeOutcome::Survived
                ))
            })
            .sum();
        let freq = survived as f64 / args.trials as f64;
        let se = (freq * (1.0 - freq) / args.trials as f64).sqrt();
        (Some(freq), Some(se))
    } else {
        (None, None)
    };
    let matrix = build_mean_matrix(&spec);
    let out = BpOut {
        q: solution.q,
        eta: solution.eta,
        iterations: solution.iterations,
        residual: solution.residual,
        types: matrix.index().to_vec(),
        mc_survival,
        stderr,
    };
    print_json(&out)?;
    Ok(0)
}

fn cmd_sample(args: SampleArgs) -> Result<u8> {
    let seq = if let Some(path) = &args.seq {
        DegreeSequence::load(path)
            .with_context(|| format!("loading sequence file {}", path.display()))?
    } else {
        let spec = load_valid_spec(args.spec.as_ref().expect("clap requires one input"))?;
        let n = args.n.expect("clap ties --n to --spec");
        spec.realize(n, RoundingPolicy::LargestRemainder)
            .with_context(|| format!("realizing the model at n = {n}"))?
    };
    let mut rng = child_stream(args.seed, &format!("sample/{}", seq.n()));
    let (graph, attempts): (CloneGraph, u32) = if args.simple {
        let sample = sample_simple(&seq, &mut rng, args.max_attempts)?;
        (sample.graph, sample.attempts)
    } else {
        (sample_configuration(&seq, &mut rng)?, 1)
    };
    let mut text = format!(
        "{}\n",
        serde_json::json!({ "n": graph.n() as u64, "seed": args.seed, "attempts": attempts })
    );
    for &(u, v) in graph.edges() {
        text.push_str(&format!("{u} {v}\n"));
    }
    emit(&args.out, &text)?;
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8> {
    let spec = load_valid_spec(&args.spec)?;
    let seq = spec
        .realize(args.n, RoundingPolicy::LargestRemainder)
        .with_context(|| format!("realizing the model at n = {}", args.n))?;
    let rows = simulate_trials(&seq, args.trials, args.seed, args.simple)?;
    emit(&args.out, &trial_csv(&rows, seq.parts()))?;
    Ok(0)
}

fn cmd_verdict(args: VerdictArgs) -> Result<u8> {
    let spec = load_spec(&args.spec)?;
    let parts = spec.parts();
    let mut plan = ExperimentPlan::new(spec, args.n, args.trials, args.seed);
    plan.simple = args.simple;
    let report = run_verdict(&plan)?;
    if args.out.is_some() {
        emit(&args.out, &trial_csv(&report.trials, parts))?;
    }
    print_json(&report)?;
    Ok(match report.verdict {
        Verdict::Pass | Verdict::AnalyticOnly | Verdict::Degenerate => 0,
        Verdict::Fail => 2,
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<u8> {
    let from = load_valid_spec(&args.from)?;
    let to = load_valid_spec(&args.to)?;
    let family = SpecFamily::new(from, to)?;
    let plan = SweepPlan {
        family,
        params: args.params,
        n_grid: args.n,
        trials: args.trials,
        seed: args.seed,
        simple: args.simple,
    };
    let csv = run_sweep(&plan)?;
    emit(&args.out, &csv)?;
    Ok(0)
}
