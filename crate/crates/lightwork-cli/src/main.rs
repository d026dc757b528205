//! `lightwork`: work and information accounting for measured thermal light.
//!
//! Exit codes: 0 on success, 2 on a usage error (clap), 3 when a
//! computation rejects its inputs or fails to converge.

mod commands;
mod config;
mod figures;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Parser)]
#[command(name = "lightwork", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reversible work ceiling for N modes at two occupations.
    Reversible(ReversibleArgs),
    /// Photon-counting tap: conditional work, information, record entropy.
    Photocount(PhotocountArgs),
    /// Eight-port homodyne tap, at a given point or at the exact optimum.
    Homodyne(HomodyneArgs),
    /// Two-bit sign record and its 1/(2 pi) work ceiling.
    Sign(SignArgs),
    /// Homodyne record read at finite resolution.
    Coarse(CoarseArgs),
    /// Detector heating, erasure bounds, and the optimal detector reset.
    Erasure(ErasureArgs),
    /// Measurement-driven four-stroke cycle from a structured config file.
    Nsm(NsmArgs),
    /// Monte Carlo check of one closed form; prints a JSON verdict.
    McVerify(McVerifyArgs),
    /// Evaluate one scheme over a parameter grid described in a config file.
    Sweep(SweepArgs),
    /// Emit the dataset behind one of the standard figures.
    Figure(FigureArgs),
}

/// Output and config plumbing shared by every subcommand.
#[derive(Args)]
struct IoArgs {
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output serialization.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// TOML config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReversibleArgs {
    /// Hot-mode occupation [default: 20]
    #[arg(long)]
    nbar: Option<f64>,
    /// Cold-mode occupation [default: 1]
    #[arg(long)]
    nbar_cold: Option<f64>,
    /// Total number of modes, one hot and N-1 cold [default: 2]
    #[arg(long)]
    modes: Option<u32>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct PhotocountArgs {
    /// Input occupation [default: 20]
    #[arg(long)]
    nbar: Option<f64>,
    /// Transmitted intensity fraction [default: 0.9]
    #[arg(long)]
    kappa_sq: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct HomodyneArgs {
    /// Input occupation [default: 20]
    #[arg(long)]
    nbar: Option<f64>,
    /// Transmitted intensity fraction; tapped fraction is 1 - kappa_sq
    #[arg(long)]
    kappa_sq: Option<f64>,
    /// Local-oscillator amplitude per port; xi = 2 beta^2.
    /// With both --beta and --kappa-sq the point is evaluated as given,
    /// otherwise the exact two-parameter optimum is used.
    #[arg(long)]
    beta: Option<f64>,
    /// Detector temperature for the cost ledger [default: 1]
    #[arg(long)]
    theta_d: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct SignArgs {
    /// Input occupation [default: 20]
    #[arg(long)]
    nbar: Option<f64>,
    /// Transmitted intensity fraction
    #[arg(long)]
    kappa_sq: Option<f64>,
    /// Local-oscillator amplitude per port; xi = 2 beta^2.
    /// Both flags given: evaluate that point; otherwise optimize.
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct CoarseArgs {
    /// Input occupation [default: 20]
    #[arg(long)]
    nbar: Option<f64>,
    /// Transmitted intensity fraction
    #[arg(long)]
    kappa_sq: Option<f64>,
    /// Local-oscillator amplitude per port
    #[arg(long)]
    beta: Option<f64>,
    /// Record resolution in count units [default: sigma/10]
    #[arg(long)]
    resolution: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct ErasureArgs {
    /// Input occupation [default: 20]
    #[arg(long)]
    nbar: Option<f64>,
    /// Detector temperature [default: 1]
    #[arg(long)]
    theta_d: Option<f64>,
    /// Per-detector occupation before the reset [default: 2]
    #[arg(long)]
    nbar_d: Option<f64>,
    /// Transmitted fraction used for the heating estimate [default: 0.9]
    #[arg(long)]
    kappa_sq: Option<f64>,
    /// Local-oscillator amplitude used for the heating estimate [default: 1]
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct NsmArgs {
    /// TOML file with an [nsm] section: ladders, temperatures, Kraus set.
    #[arg(long)]
    config: PathBuf,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output serialization.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct McVerifyArgs {
    /// Which closed form to check against its sampled estimate.
    #[arg(value_enum)]
    quantity: commands::Quantity,
    /// Input occupation [default: 20]
    #[arg(long)]
    nbar: Option<f64>,
    /// Transmitted intensity fraction
    #[arg(long)]
    kappa_sq: Option<f64>,
    /// Local-oscillator amplitude; with --kappa-sq selects the operating
    /// point, otherwise the scheme optimum is used
    #[arg(long)]
    beta: Option<f64>,
    /// Record resolution for the coarse-work check [default: sigma/10]
    #[arg(long)]
    resolution: Option<f64>,
    /// Monte Carlo sample count [default: 1000000]
    #[arg(long)]
    samples: Option<u64>,
    /// RNG seed; the estimate is a pure function of it [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; does not affect the result [default: 4]
    #[arg(long)]
    workers: Option<usize>,
    /// Write the JSON verdict here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config file; its [mc] section supplies samples/seed/workers.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with a [sweep] section.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the output path from the file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the format from the file.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Recorded in the output header [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FigureArgs {
    /// Which figure dataset to emit.
    #[arg(value_enum)]
    id: figures::FigureId,
    /// Detector temperature where the figure needs one [default: 1]
    #[arg(long)]
    theta_d: Option<f64>,
    /// Detector occupation where the figure needs one [default: 2]
    #[arg(long)]
    nbar_d: Option<f64>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output serialization.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Reversible(args) => commands::reversible(args),
        Command::Photocount(args) => commands::photocount(args),
        Command::Homodyne(args) => commands::homodyne(args),
        Command::Sign(args) => commands::sign(args),
        Command::Coarse(args) => commands::coarse(args),
        Command::Erasure(args) => commands::erasure(args),
        Command::Nsm(args) => commands::nsm(args),
        Command::McVerify(args) => commands::mc_verify(args),
        Command::Sweep(args) => sweep::run(args),
        Command::Figure(args) => figures::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}
