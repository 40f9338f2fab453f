use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use probreg_cli::config::{parse_cases, ExperimentConfig, FileConfig, Overrides, OUT_ENV};
use probreg_cli::run::{run, write_dataset};
use probreg_cli::verify::{verify, Check};
use probreg_cli::CliError;
use probreg_core::metrics::table1::DEFAULT_N;

#[derive(Parser)]
#[command(name = "probreg", version, about = "Train and compare MDN and variational BNN regressors on synthetic data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train, evaluate and write artifacts for every case/model/seed.
    Run(ExperimentArgs),
    /// Gradient, bound and benchmark-ordering checks.
    Verify(ExperimentArgs),
    /// Write the generated dataset with its train/test split.
    ExportDataset(ExportArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// A, B, C, D, intro or all.
    #[arg(long)]
    case: Option<String>,
    /// mdn, bnn or both.
    #[arg(long)]
    model: Option<String>,
    /// Repeat for several seeds; defaults to 0, 1 and 2.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, env = OUT_ENV)]
    out: Option<PathBuf>,
    /// 500 epochs unless --epochs is given.
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long, default_value = "all")]
    case: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long, env = OUT_ENV, default_value = "out")]
    out: PathBuf,
}

fn resolve(args: ExperimentArgs) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = Overrides { case: args.case, model: args.model, seeds: args.seeds, epochs: args.epochs, out: args.out, quick: args.quick };
    ExperimentConfig::resolve(file, flags)
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let cfg = resolve(args)?;
            for r in run(&cfg)? {
                println!("{} {} seed {}: test NLL {}", r.case, r.model, r.seed, r.test_nll);
            }
            println!("wrote {}", cfg.out.join("summary.csv").display());
            Ok(())
        }
        Command::Verify(args) => {
            let checks = match resolve(args) {
                Ok(cfg) => verify(&cfg)?,
                Err(CliError::Usage(msg)) => vec![Check::new("config", false, msg)],
                Err(e) => return Err(e),
            };
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::ChecksFailed { failed, total: checks.len() });
            }
            Ok(())
        }
        Command::ExportDataset(args) => {
            if args.n < 5 {
                return Err(CliError::Usage(format!("n = {} is too small to split; need at least 5", args.n)));
            }
            std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
            for case in parse_cases(&args.case)? {
                println!("{}", write_dataset(&args.out, case, args.seed, args.n)?.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
