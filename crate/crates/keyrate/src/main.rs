//! Command-line front end: point evaluation, loss sweeps, mean-photon-number
//! optimization, and Monte-Carlo validation.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical/evaluation
//! error (including a failed Monte-Carlo validation), 4 I/O error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use keyrate::report::{mc_validate, EmitError};
use keyrate::sweep::{evaluate_point, optimal_ppm_mu, run_sweep, SweepMetadata, SweepResult};
use keyrate::{emit_csv, parse_config, Protocol, SweepConfig};

#[derive(Parser)]
#[command(
    name = "keyrate",
    version,
    about = "Key-rate and QBER models for free-space QKD/PKD links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one protocol at one loss and print a one-row CSV.
    Point {
        /// Protocol id: decoy_bb84, bbm92, sps_bb84, ppm_pkd, heralded_pkd, sps_pkd.
        #[arg(long)]
        protocol: String,
        #[arg(long = "loss-db")]
        loss_db: f64,
        /// Scenario file (flat key = value); defaults apply when absent.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evaluate every protocol over the loss grid and emit CSV.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize the PPM mean photon number at one loss.
    Optimize {
        /// Must be ppm_pkd; the other protocols have no free photon number.
        #[arg(long)]
        protocol: String,
        #[arg(long = "loss-db")]
        loss_db: f64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compare Monte-Carlo statistics against the analytic model.
    #[command(name = "mc-validate")]
    McValidate {
        #[arg(long)]
        protocol: String,
        #[arg(long = "loss-db")]
        loss_db: f64,
        /// Number of simulated pulses or coincidence windows.
        #[arg(long)]
        n: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

enum CliError {
    Config(String),
    Eval(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Eval(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(4),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Eval(m) | CliError::Io(m) => m,
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<SweepConfig, CliError> {
    match path {
        None => Ok(SweepConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?;
            parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn parse_protocol(id: &str) -> Result<Protocol, CliError> {
    Protocol::from_id(id).ok_or_else(|| {
        CliError::Config(format!(
            "unknown protocol '{id}' (expected one of: {})",
            Protocol::ALL.map(|p| p.id()).join(", ")
        ))
    })
}

/// Wraps a single point in a result so the CSV writer can serialize it.
fn single_point_result(cfg: &SweepConfig, point: keyrate::RatePoint) -> SweepResult {
    SweepResult {
        points: vec![point],
        metadata: SweepMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: 0,
            config: keyrate::emit_config(cfg),
        },
    }
}

fn write_csv_to(result: &SweepResult, out: &Option<PathBuf>) -> Result<(), CliError> {
    let emitted = match out {
        None => {
            let stdout = std::io::stdout();
            emit_csv(result, stdout.lock())
        }
        Some(p) => {
            let file = fs::File::create(p)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", p.display())))?;
            emit_csv(result, std::io::BufWriter::new(file))
        }
    };
    match emitted {
        Ok(()) => Ok(()),
        // A closed stdout pipe (e.g. `keyrate sweep | head`) is not an error.
        Err(EmitError::Io { ref source, .. })
            if out.is_none() && source.kind() == std::io::ErrorKind::BrokenPipe =>
        {
            Ok(())
        }
        Err(e) => Err(CliError::Io(e.to_string())),
    }
}

fn run() -> Result<ExitCode, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Point {
            protocol,
            loss_db,
            config,
        } => {
            let cfg = load_config(&config)?;
            cfg.validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            let protocol = parse_protocol(&protocol)?;
            let point = evaluate_point(&cfg, protocol, loss_db)
                .map_err(|e| CliError::Eval(e.to_string()))?;
            write_csv_to(&single_point_result(&cfg, point), &None)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, out } => {
            let cfg = load_config(&config)?;
            let result = run_sweep(&cfg).map_err(|e| CliError::Eval(e.to_string()))?;
            write_csv_to(&result, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Optimize {
            protocol,
            loss_db,
            config,
        } => {
            let cfg = load_config(&config)?;
            cfg.validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            let protocol = parse_protocol(&protocol)?;
            if protocol != Protocol::PpmPkd {
                return Err(CliError::Config(format!(
                    "protocol '{}' has no tunable mean photon number; only ppm_pkd is optimized",
                    protocol.id()
                )));
            }
            let (zeta, mu) =
                optimal_ppm_mu(&cfg, loss_db).map_err(|e| CliError::Eval(e.to_string()))?;
            let point = evaluate_point(&cfg, protocol, loss_db)
                .map_err(|e| CliError::Eval(e.to_string()))?;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            writeln!(
                lock,
                "protocol,loss_db,zeta_opt,mu_opt,qber,bits_per_pulse,bits_per_second,clamped"
            )
            .and_then(|_| {
                writeln!(
                    lock,
                    "{},{},{},{},{},{},{},{}",
                    protocol.id(),
                    loss_db,
                    zeta,
                    mu,
                    point.qber,
                    point.bits_per_pulse,
                    point.bits_per_second,
                    point.clamped
                )
            })
            .map_err(|e| CliError::Io(e.to_string()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::McValidate {
            protocol,
            loss_db,
            n,
            seed,
            config,
        } => {
            let cfg = load_config(&config)?;
            let protocol = parse_protocol(&protocol)?;
            let validation = mc_validate(&cfg, protocol, loss_db, n, seed)
                .map_err(|e| CliError::Eval(e.to_string()))?;
            print!("{}", validation.render());
            if validation.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}
