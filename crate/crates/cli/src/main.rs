use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qhnf_cli::{cmd_cokernel, cmd_normalize, cmd_verify, load_certificate, load_problem, CliError, Overrides, Pipeline};

#[derive(Parser)]
#[command(name = "qhnf", version, about = "Formal normal forms of quasi-homogeneous plane vector fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Milnor number, basis and exponents of the cokernel.
    Cokernel {
        #[arg(long)]
        input: PathBuf,
    },
    /// Prenormalize and reduce; exit 0 (λ ≠ 0), 10 (λ = 0) or 11 (integrable).
    Normalize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        truncation: Option<u32>,
        /// 1-based basis index of the coefficient to reduce.
        #[arg(long)]
        pick: Option<usize>,
        #[arg(long)]
        pipeline: Option<Pipeline>,
        #[arg(long, value_name = "FILE")]
        emit_certificate: Option<PathBuf>,
    },
    /// Check a certificate against a problem.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "verify", value_name = "CERTIFICATE")]
        certificate: PathBuf,
        #[arg(long)]
        truncation: Option<u32>,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Cokernel { input } => {
            let problem = load_problem(&input)?;
            print!("{}", cmd_cokernel(&problem)?);
            Ok(0)
        }
        Command::Normalize { input, truncation, pick, pipeline, emit_certificate } => {
            let problem = load_problem(&input)?;
            let out = cmd_normalize(&problem, &Overrides { truncation, pick, pipeline })?;
            if let Some(path) = emit_certificate {
                std::fs::write(&path, out.certificate.to_json())
                    .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
            }
            print!("{}", out.report);
            Ok(out.status.exit_code())
        }
        Command::Verify { input, certificate, truncation } => {
            let problem = load_problem(&input)?;
            let cert = load_certificate(&certificate)?;
            let out = cmd_verify(&problem, &cert, &Overrides { truncation, ..Default::default() })?;
            if let Some(w) = out.warning {
                eprintln!("warning: {w}");
            }
            print!("{}", out.report);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
