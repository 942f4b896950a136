use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zkovn::circuits::Variant;
use zkovn::ledger::CostModel;
use zkovn_cli::config::{parse_votes, resolve_variant};
use zkovn_cli::{recalibrate, run_attack, run_election, scaling_sweep, CliError, RunConfig, Scenario, VoteSpec};

#[derive(Parser)]
#[command(name = "zkovn", about = "Run simulated dispute-free Open Vote Network elections")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run one election (the default when no subcommand is given).
    Run(RunArgs),
    /// Run honest elections over a grid of sizes and variants and write CSVs.
    Sweep(SweepArgs),
    /// Refit the cost-model constants against the calibration targets.
    Calibrate(CalibrateArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Number of voters.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// original, committed, progressive, or a full variant name.
    #[arg(long, default_value = "original")]
    variant: String,
    /// Hash backend for committed variants: sha256 or poseidon.
    #[arg(long)]
    hash: Option<String>,
    /// Explicit ballots, e.g. 1,0,1 or 101.
    #[arg(long, conflicts_with = "yes_fraction")]
    votes: Option<String>,
    /// Fraction of yes votes, placed at seeded positions.
    #[arg(long)]
    yes_fraction: Option<f64>,
    /// Seed string; omitted means fresh OS randomness.
    #[arg(long)]
    seed: Option<String>,
    /// Output directory for transcript.jsonl, cost.csv, tree.json, report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cost-model JSON; defaults to the bundled calibration.
    #[arg(long)]
    cost_config: Option<PathBuf>,
    /// Adversarial scenario: bad-tally, non-member-register, wrong-index-cast,
    /// forged-proof, duplicate-register or abort-missing-vote.
    #[arg(long)]
    scenario: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated voter counts.
    #[arg(long, default_value = "10,50,100,150,200,250,300")]
    ns: String,
    /// Comma-separated variant names; defaults to all four.
    #[arg(long)]
    variants: Option<String>,
    /// Seed string shared by every election in the sweep.
    #[arg(long, default_value = "sweep")]
    seed: String,
    /// Output directory for cost.csv and sweep.csv.
    #[arg(long, default_value = "sweep-out")]
    out: PathBuf,
    /// Cost-model JSON; defaults to the bundled calibration.
    #[arg(long)]
    cost_config: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Model whose targets and priors are used; defaults to the bundled one.
    #[arg(long)]
    cost_config: Option<PathBuf>,
    /// Where to write the refitted model; printed to stdout when omitted.
    #[arg(long)]
    write: Option<PathBuf>,
}

fn cost_model(path: &Option<PathBuf>) -> Result<CostModel, CliError> {
    match path {
        Some(p) => CostModel::load(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
        None => Ok(CostModel::bundled()),
    }
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn run(args: RunArgs) -> Result<bool, CliError> {
    let variant = resolve_variant(&args.variant, args.hash.as_deref())?;
    let votes = match (&args.votes, args.yes_fraction) {
        (Some(v), _) => VoteSpec::Explicit(parse_votes(v)?),
        (None, Some(f)) => VoteSpec::YesFraction(f),
        (None, None) => VoteSpec::YesFraction(0.5),
    };
    let mut cfg = RunConfig::new(args.n, variant, votes);
    cfg.seed = args.seed.map(String::into_bytes);
    cfg.out = args.out;
    cfg.cost_model = cost_model(&args.cost_config)?;
    let report = match args.scenario {
        Some(s) => run_attack(s.parse::<Scenario>()?, cfg)?,
        None => run_election(cfg)?,
    };
    emit(&(serde_json::to_string_pretty(&report)? + "\n"));
    Ok(report.ok())
}

fn sweep(args: SweepArgs) -> Result<bool, CliError> {
    let ns = args
        .ns
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| CliError::Config(format!("--ns {s:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let variants = match &args.variants {
        Some(v) => v
            .split(',')
            .map(|s| s.trim().parse::<Variant>().map_err(|e| CliError::Config(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?,
        None => Variant::ALL.to_vec(),
    };
    let model = cost_model(&args.cost_config)?;
    let (costs, circuits) = scaling_sweep(&ns, &variants, Some(&args.out), &model, args.seed.as_bytes())?;
    emit(&format!(
        "wrote {} cost rows and {} circuit rows to {}\n",
        costs.len(),
        circuits.len(),
        args.out.display()
    ));
    Ok(true)
}

fn calibrate(args: CalibrateArgs) -> Result<bool, CliError> {
    let model = recalibrate(&cost_model(&args.cost_config)?)?;
    let json = serde_json::to_string_pretty(&model)? + "\n";
    match args.write {
        Some(p) => std::fs::write(p, json)?,
        None => emit(&json),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        None => run(cli.run),
        Some(Command::Run(a)) => run(a),
        Some(Command::Sweep(a)) => sweep(a),
        Some(Command::Calibrate(a)) => calibrate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
