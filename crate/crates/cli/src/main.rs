use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cl3_dirac::clifford::suite::Mutation;
use cl3_dirac::io::Format;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "cl3dirac", version, about = "Cl(3) nonlinear Dirac toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exit with code 4 when a diagnostic exceeds its threshold.
    #[arg(long, global = true)]
    strict: bool,
    /// Snapshot stride; overrides the config.
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// Snapshot format; overrides the config.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<Format>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "bin" => Ok(Format::Bin),
        "csv" => Ok(Format::Csv),
        _ => Err(format!("expected csv or bin, got {s:?}")),
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Randomized algebra invariant suite.
    #[command(hide = true)]
    AlgebraTest {
        #[arg(long, default_value_t = 10_000)]
        cases: usize,
        #[arg(long, hide = true, default_value = "none")]
        mutate: Mutation,
        #[command(flatten)]
        common: Common,
    },
    /// Checks a plane wave given by `--m`, by `--n` and `--j`, or by the config.
    Planewave {
        /// Prefactor as 8 reals (re, im of each coefficient).
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<f64>>,
        #[arg(long)]
        n: Option<f64>,
        /// Current as 4 reals.
        #[arg(long, value_delimiter = ',')]
        j: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0)]
        phi0: f64,
        /// With `--out`, also write exact snapshots at `t = k·dt`, `k ≤ steps`.
        #[arg(long, default_value_t = 0)]
        steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Evolves the configured initial data and writes snapshots.
    Evolve {
        #[command(flatten)]
        common: Common,
    },
    /// Hydrodynamic residual tables and flowlines from a snapshot directory.
    Hydro {
        /// Snapshot directory; defaults to the config's output directory.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Refinement study of the residuals on the configured initial data.
    Convergence {
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        t_center: f64,
        /// Time step as a multiple of the grid spacing.
        #[arg(long, default_value_t = 0.25)]
        cfl: f64,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::AlgebraTest { cases, mutate, common } => commands::algebra_test(&common, cases, mutate),
        Cmd::Planewave { m, n, j, phi0, steps, dt, common } => {
            commands::planewave(&common, commands::PlanewaveArgs { m, n, j, phi0, steps, dt })
        }
        Cmd::Evolve { common } => commands::evolve(&common),
        Cmd::Hydro { snapshots, common } => commands::hydro(&common, snapshots),
        Cmd::Convergence { levels, t_center, cfl, common } => commands::convergence(&common, &levels, t_center, cfl),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
