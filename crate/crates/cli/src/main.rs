//! `finsler`: tensors, identity checks, classification and geodesics from the command line.
//!
//! Exit codes: 0 success, 1 identity failures, 2 input or usage error,
//! 3 geometric or numerical failure.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "finsler", version, about = "Numerical pseudo-Finsler geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Every tensor at one tangent point.
    Tensors(TensorsArgs),
    /// Run the identity suite on seeded samples.
    Verify(VerifyArgs),
    /// Sample-based classification of the space.
    Classify(ClassifyArgs),
    /// Integrate a geodesic, optionally transporting a vector along it.
    Geodesic(GeodesicArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Definition file.
    #[arg(long = "def")]
    def: PathBuf,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PointArgs {
    /// Position, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Direction, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    y: String,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Coordinate box `lo,hi` for every component of x.
    #[arg(long = "box", allow_hyphen_values = true)]
    bx: Option<String>,
}

#[derive(Args, Debug)]
pub struct TensorsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    point: PointArgs,
    /// Connection kinds to report; all of them when absent.
    #[arg(long = "kind")]
    kinds: Vec<String>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sample: SampleArgs,
    #[arg(long = "kind")]
    kinds: Vec<String>,
    #[arg(long, default_value_t = 1e-7, allow_hyphen_values = true)]
    tol: f64,
    /// Run only these identities.
    #[arg(long = "identity")]
    identities: Vec<String>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sample: SampleArgs,
    /// Largest residual for a criterion to hold.
    #[arg(long, default_value_t = 1e-8, allow_hyphen_values = true)]
    holds: f64,
    /// Smallest residual for a criterion to fail.
    #[arg(long, default_value_t = 1e-7, allow_hyphen_values = true)]
    fails: f64,
}

#[derive(Args, Debug)]
pub struct GeodesicArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    point: PointArgs,
    /// Final parameter value.
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, default_value_t = 101)]
    samples: usize,
    /// Transport this vector along the geodesic.
    #[arg(long, allow_hyphen_values = true)]
    transport: Option<String>,
    /// Use the linear flipped transport instead of the parallel one.
    #[arg(long, requires = "transport")]
    flip: bool,
    #[arg(long, default_value_t = 1e-10, allow_hyphen_values = true)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12, allow_hyphen_values = true)]
    atol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Tensors(a) => commands::tensors(a),
        Command::Verify(a) => commands::verify(a),
        Command::Classify(a) => commands::classify(a),
        Command::Geodesic(a) => commands::geodesic(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("finsler: {e}");
            ExitCode::from(e.code())
        }
    }
}
