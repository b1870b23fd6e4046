//! `orbitshift`: fields, flows, periods, shift recovery, deformations,
//! phase portraits and the verification suite from the command line.

mod commands;
mod fail;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fail::Fail;

#[derive(Parser, Debug)]
#[command(name = "orbitshift", version, about = "Shift functions and deformations of topological-center vector fields")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Integration tolerance, within [1e-12, 1e-3].
    #[arg(long, global = true, default_value_t = 1e-10, allow_hyphen_values = true)]
    pub tol: f64,
    /// Node grid as LEVELSxANGLES, at least 8x8.
    #[arg(long, global = true, default_value = "16x16", value_parser = parse_grid)]
    pub grid: (usize, usize),
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write outputs into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON instead of text or CSV.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Parse a field file, print ∇F, the center case and coprimality.
    Field { file: PathBuf },
    /// Integrate the flow from a point.
    Flow {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Period scan along a ray, as CSV `level,x,y,theta,residual`.
    Period {
        file: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        angle: f64,
        /// Decreasing levels in (0, 1].
        #[arg(long, value_delimiter = ',', default_value = "1,0.1,0.01,0.001")]
        levels: Vec<f64>,
    },
    /// Shift function operations.
    Shift {
        #[command(subcommand)]
        op: ShiftCmd,
    },
    /// Boundary fix and the homotopy to the input map, with optional SVG frames.
    Deform {
        field: PathBuf,
        map: PathBuf,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        /// Number of t-sweep SVG frames written to --out.
        #[arg(long, default_value_t = 0)]
        frames: usize,
        /// Scalings k of the family Λ_k = k Λ.
        #[arg(long, value_delimiter = ',', default_value = "1", allow_hyphen_values = true)]
        ks: Vec<f64>,
    },
    /// Run the invariant suite.
    Verify {
        /// Random draws per sampled check.
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
    /// SVG phase portrait, optionally with the images of the orbits under a map.
    Plot {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1")]
        levels: Vec<f64>,
        #[arg(long)]
        map: Option<PathBuf>,
        /// Points per orbit.
        #[arg(long, default_value_t = 128)]
        points: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum ShiftCmd {
    /// Recover Λ with m(z) = Φ(z, Λ(z)) on the node grid.
    Recover {
        field: PathBuf,
        map: PathBuf,
        /// Λ at the outermost node on the ray at angle 0; by default the
        /// representative in [-θ/2, θ/2), or α there for a single flow shift.
        #[arg(long, allow_hyphen_values = true)]
        anchor_t: Option<f64>,
    },
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (l, a) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected LEVELSxANGLES, got `{s}`"))?;
    let l: usize = l.trim().parse().map_err(|_| format!("bad level count `{l}`"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad angle count `{a}`"))?;
    if l < 8 || a < 8 {
        return Err(format!("grid {l}x{a} is below 8x8"));
    }
    Ok((l, a))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail { kind, msg }) => {
            eprintln!("error: {msg}");
            ExitCode::from(kind.code())
        }
    }
}
