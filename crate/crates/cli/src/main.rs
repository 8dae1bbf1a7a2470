//! `discon`: command line front end for the discrete conformal toolkit.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "discon", version, about = "Discrete conformal maps, circle packings and their convergence")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Experiment configuration (JSON); defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Solver tolerance; overrides the configuration.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 20_240_601)]
    seed: u64,
    /// Sweep budget of the packing solver; overrides the configuration.
    #[arg(long, global = true)]
    max_sweeps: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hexagonal carrier of the configured domain at one n.
    Hexfill {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Maximal packing of a mesh (or of the carrier at n), laid out in the unit disk.
    Pack {
        #[arg(long, conflicts_with = "n")]
        mesh: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        /// Solve the Euclidean problem with this radius on every boundary circle instead.
        #[arg(long)]
        boundary_radius: Option<f64>,
    },
    /// Vertex scaling to a prescribed curvature.
    Flatten {
        /// Mesh JSON with positions or edge lengths.
        #[arg(long, required_unless_present = "torus")]
        mesh: Option<PathBuf>,
        /// Generate an `NX,NY` equilateral torus with lengths perturbed by `--perturb`.
        #[arg(long, value_parser = parse_pair, conflicts_with = "mesh")]
        torus: Option<(usize, usize)>,
        #[arg(long, default_value_t = 0.05)]
        perturb: f64,
        #[arg(long, value_enum)]
        target: Target,
        /// Corner vertices `I,J,K` for the triangle target.
        #[arg(long, value_parser = parse_triple, required_if_eq("target", "triangle"))]
        corners: Option<[usize; 3]>,
        #[arg(long, default_value_t = 50)]
        max_steps: usize,
    },
    /// Discrete conformal map of one row: distortion, error and optional point evaluations.
    Map {
        #[arg(long)]
        n: Option<usize>,
        /// Domain points `X,Y` to push through the map.
        #[arg(long = "at", value_parser = parse_point)]
        at: Vec<[f64; 2]>,
    },
    /// Run selected diagnostic checks on one row.
    Diagnose {
        #[arg(long)]
        n: Option<usize>,
        /// Check names; all when omitted.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        /// Grid resolution of the barycentric pullback check.
        #[arg(long, default_value_t = 8)]
        grid: usize,
    },
    /// The full convergence experiment.
    Converge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    FlatTorus,
    Triangle,
}

fn parse_numbers<const N: usize, T: std::str::FromStr>(s: &str) -> Result<[T; N], String> {
    let parts: Vec<T> = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| format!("cannot parse {p:?}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| format!("expected {N} comma-separated values"))
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let [a, b] = parse_numbers::<2, usize>(s)?;
    Ok((a, b))
}

fn parse_triple(s: &str) -> Result<[usize; 3], String> {
    parse_numbers::<3, usize>(s)
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    parse_numbers::<2, f64>(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.global, &cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
