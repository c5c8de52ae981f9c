use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use detqpe::qpe::QpeMode;
use detqpe::TermOrdering;

mod commands;
mod manifest;

use manifest::Window;

#[derive(Debug, Parser)]
#[command(name = "detqpe", version, about = "Determinant-space emulator of Trotterized phase estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Term counts, dimension and memory estimates.
    Inspect(InspectArgs),
    /// Emulate phase estimation and write the distribution and readout report.
    Run(RunArgs),
    /// Dense eigenvalues and Trotter error table for small spaces.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct InspectArgs {
    /// FCIDUMP file.
    #[arg(required_unless_present = "space")]
    fcidump: Option<PathBuf>,
    /// Inspect a bare space `N:KA:KB` instead of a file.
    #[arg(long, conflicts_with = "fcidump")]
    space: Option<String>,
    #[arg(long, default_value_t = 10)]
    precision_bits: u32,
    /// Write the classified Hamiltonian as JSON.
    #[arg(long)]
    dump_terms: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// FCIDUMP file.
    #[arg(required_unless_present = "manifest")]
    fcidump: Option<PathBuf>,
    /// Ansatz file (`alpha_bits beta_bits re im` per line); Hartree-Fock if omitted.
    #[arg(long)]
    ansatz: Option<PathBuf>,
    #[arg(short = 'p', long, default_value_t = 10)]
    precision_bits: u32,
    #[arg(short = 'r', long, default_value_t = 1)]
    trotter_steps: u32,
    #[arg(short = 't', long, default_value_t = 1.0)]
    time: f64,
    #[arg(long, default_value = "overlap", value_parser = parse_mode)]
    mode: QpeMode,
    #[arg(long, default_value = "default", value_parser = parse_ordering)]
    ordering: TermOrdering,
    /// Peak threshold in (0, 1).
    #[arg(long, default_value_t = detqpe::readout::DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Energy window `LO:HI` for alias resolution.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
    window: Option<Window>,
    /// Output directory (default `.`); also overrides a manifest's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded in the manifest; the run itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Re-run from a manifest or any JSON output embedding one; other run flags except `--out` are ignored.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    fcidump: PathBuf,
    #[arg(short = 't', long, default_value_t = 1.0)]
    time: f64,
    /// Trotter step counts for the error table.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    trotter_steps: Vec<u32>,
    /// Dense dimension cap.
    #[arg(long, default_value_t = detqpe::oracle::DEFAULT_DIMENSION_CAP)]
    cap: usize,
    /// Number of lowest eigenvalues to print.
    #[arg(long, default_value_t = 10)]
    eigenvalues: usize,
    /// Write the ground eigenvector as an ansatz file.
    #[arg(long)]
    ground_ansatz: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn parse_mode(s: &str) -> std::result::Result<QpeMode, String> {
    s.parse().map_err(|e: detqpe::Error| e.to_string())
}

fn parse_ordering(s: &str) -> std::result::Result<TermOrdering, String> {
    s.parse().map_err(|e: detqpe::Error| e.to_string())
}

fn parse_window(s: &str) -> std::result::Result<Window, String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("window {s:?} is not LO:HI"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad window bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad window bound {hi:?}"))?;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(format!("window {s:?} is empty"));
    }
    Ok(Window { lo, hi })
}

/// 2 for numerical breakdown, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<detqpe::Error>() {
        Some(detqpe::Error::Numerical(_)) => 2,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Inspect(args) => commands::inspect(args),
        Command::Run(args) => commands::run(args),
        Command::Oracle(args) => commands::oracle(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // usage errors are input errors; --help and --version are not errors
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
