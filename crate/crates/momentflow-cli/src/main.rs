use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use momentflow::harness::{csv_tables, emit_report, run_experiment, run_timed, ExperimentConfig, ExperimentKind, ReportFormat};

#[derive(Parser, Debug)]
#[command(name = "momentflow", version, about = "Run eigenvector moment flow experiments and write reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regularity of the Stieltjes transform and resolvent forms on a window.
    Assumptions(RunArgs),
    /// Monte Carlo drift of moment observables along the eigenvector SDE against the exact generator.
    GeneratorValidate(RunArgs),
    /// Algebraic identities of the configuration-space generator.
    OperatorSuite(RunArgs),
    /// Poincaré scaling, ultracontractive decay, Nash ratios and L¹ growth.
    Mixing(RunArgs),
    /// Finite speed of propagation for short-range dynamics.
    Fsp(RunArgs),
    /// Gaussian moments of bulk eigenvectors.
    JointNormality(RunArgs),
    /// Ansatz observable against Wick moments and the generator kernel.
    AnsatzCompare(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON config; missing fields take the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config (default: results).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for Monte Carlo loops (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Record wall-clock runtime in the report, which makes it vary between runs.
    #[arg(long)]
    timing: bool,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::Assumptions(a) => (ExperimentKind::Assumptions, a),
            Command::GeneratorValidate(a) => (ExperimentKind::GeneratorValidate, a),
            Command::OperatorSuite(a) => (ExperimentKind::OperatorSuite, a),
            Command::Mixing(a) => (ExperimentKind::Mixing, a),
            Command::Fsp(a) => (ExperimentKind::Fsp, a),
            Command::JointNormality(a) => (ExperimentKind::JointNormality, a),
            Command::AnsatzCompare(a) => (ExperimentKind::AnsatzCompare, a),
        }
    }
}

fn csv_help(kind: ExperimentKind) -> String {
    let mut s = String::from("CSV output (--format csv), one file per table named <kind>_<table>.csv:\n");
    s.push_str("  checks: name,value,target,tol,pass\n");
    for (table, cols) in csv_tables(kind) {
        s.push_str(&format!("  {table}: {cols}\n"));
    }
    s
}

fn load_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text, Some(kind)).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<bool> {
    let cfg = load_config(kind, &args)?;
    if args.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(true);
    }
    if let Some(k) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().context("configuring the thread pool")?;
    }
    let report = if args.timing { run_timed(&cfg)? } else { run_experiment(&cfg)? };
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let format = match args.format {
        Format::Json => ReportFormat::Json,
        Format::Csv => ReportFormat::Csv,
    };
    for path in emit_report(&report, format, &dir)? {
        log::info!("wrote {}", path.display());
    }
    for c in &report.checks {
        let mark = if c.pass { "pass" } else { "FAIL" };
        println!("{mark} {} value={:e} target={:e} tol={:e}", c.name, c.value, c.target, c.tol);
    }
    let failures = report.failures();
    if failures.is_empty() {
        println!("{kind}: all {} checks passed", report.checks.len());
    } else {
        let names: Vec<&str> = failures.iter().map(|c| c.name.as_str()).collect();
        println!("{kind}: {} of {} checks failed: {}", names.len(), report.checks.len(), names.join(", "));
    }
    Ok(failures.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut cmd = Cli::command();
    for kind in ExperimentKind::ALL {
        let help = csv_help(kind);
        cmd = cmd.mut_subcommand(kind.name(), |c| c.after_help(help));
    }
    let cli = match Cli::from_arg_matches(&cmd.get_matches()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let (kind, args) = cli.command.split();
    match run(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
