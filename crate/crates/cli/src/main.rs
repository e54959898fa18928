use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use sampleprivacy_cli::commands::{self, HeuristicKind, Options, Outcome, Preset};
use sampleprivacy_cli::scenario_file::{parse_matrix, parse_vector, ScenarioFile};
use sampleprivacy_cli::table::emit_csv;
use sampleprivacy_core::engine::DEFAULT_CAP;
use sampleprivacy_core::oracle::rational_to_f64;

/// Optimal and heuristic disclosure mappings under perfect sample privacy.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Largest number of column subsets examined during vertex enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Tolerance for the privacy and marginal checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Where to write the CSV result (presets default to `<name>.csv`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Partial,
    Preprocess,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal mapping for a scenario file.
    Solve { file: PathBuf },
    /// Self-disclosure capacity (W = X^n) for a scenario file.
    #[command(name = "self")]
    SelfDisclosure { file: PathBuf },
    /// Closed form for two binary samples, checked against the LP.
    TwoBinary {
        /// P(X1 = 0).
        #[arg(long)]
        alpha: f64,
        /// P(X2 = 0).
        #[arg(long)]
        beta: f64,
        /// P(X1 = 0, X2 = 1).
        #[arg(long)]
        r: f64,
        /// Latent channel rows over outcomes 00,01,10,11, e.g. "1,0,0,1;0,1,1,0" (default: XOR).
        #[arg(long)]
        latent: Option<String>,
    },
    /// I(W;X^n) and I_s for n = 1..n-max with i.i.d. observations.
    Scan {
        /// Prior on W, e.g. "2/3,1/3".
        #[arg(long)]
        p_w: String,
        /// Observation channel rows [x][w], e.g. "0.9,0.1;0.1,0.9".
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
    },
    /// Low-complexity mappings for i.i.d. Bernoulli(q) samples.
    Heuristic {
        #[arg(value_enum)]
        method: Method,
        /// P(X = 1).
        #[arg(long)]
        q: f64,
        #[arg(long)]
        n: usize,
        /// Window size for partial processing.
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Solve a scenario file and cross-check the result independently.
    Verify { file: PathBuf },
    /// Run a named experiment.
    Preset {
        #[arg(value_enum)]
        name: Preset,
    },
}

fn write_table(outcome: &Outcome, path: Option<&Path>) -> Result<()> {
    if let (Some(t), Some(p)) = (&outcome.table, path) {
        emit_csv(t, p)?;
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let opts = Options {
        cap: cli.cap,
        tol: cli.tol,
        seed: cli.seed,
    };
    let output = cli.output.as_deref();
    let outcome = match &cli.command {
        Command::Solve { file } => commands::solve(&ScenarioFile::load(file)?.to_scenario()?, &opts)?,
        Command::SelfDisclosure { file } => {
            commands::self_capacity(&ScenarioFile::load(file)?.to_scenario()?, &opts)?
        }
        Command::Verify { file } => commands::verify(&ScenarioFile::load(file)?.to_exact()?, &opts)?,
        Command::TwoBinary { alpha, beta, r, latent } => {
            let rows = latent
                .as_deref()
                .map(|s| -> Result<Vec<Vec<f64>>> {
                    Ok(parse_matrix(s)?.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect())
                })
                .transpose()?;
            commands::two_binary(*alpha, *beta, *r, rows.as_deref(), &opts)?
        }
        Command::Scan { p_w, channel, n_max } => {
            commands::scan(&parse_vector(p_w)?, &parse_matrix(channel)?, *n_max, &opts)?
        }
        Command::Heuristic { method, q, n, k } => {
            let kind = match method {
                Method::Partial => HeuristicKind::Partial,
                Method::Preprocess => HeuristicKind::Preprocess,
            };
            commands::heuristic(kind, *q, *n, *k, &opts)?
        }
        Command::Preset { name } => {
            let out = commands::preset(*name, &opts)?;
            let default = PathBuf::from(format!("{}.csv", name.name()));
            print!("{}", out.text);
            write_table(&out, Some(output.unwrap_or(&default)))?;
            return Ok(out.passed);
        }
    };
    print!("{}", outcome.text);
    write_table(&outcome, output)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
