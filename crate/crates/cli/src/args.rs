use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaplab_core::model::{DEFAULT_GRID_M, DEFAULT_TOL};
use gaplab_core::{Method, SolveOptions};

use crate::output::Format;
use crate::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "gaplab", version, about = "Fundamental gap of the constant-curvature model operator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First two eigenvalues, gap and normalized gap of one model.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Normalized gap along a sweep of D or n, with a monotonicity verdict.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// `D` or `n`.
        #[arg(long = "sweep-axis")]
        axis: String,
        /// Comma-separated values, or `start:stop:count` for an even grid.
        #[arg(long = "sweep-values")]
        values: String,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Dirichlet spectrum of a geodesic ball and its comparison with the model.
    Ball {
        #[arg(long)]
        n: u32,
        #[arg(long = "K", allow_hyphen_values = true)]
        k: f64,
        #[arg(long)]
        radius: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Expansion checks for the two-endpoint geodesic variation.
    Geometry {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "K", allow_hyphen_values = true)]
        k: f64,
        /// Length `d0` of the base geodesic.
        #[arg(long = "D")]
        d: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Runs the property suite over its canned parameter matrix.
    Verify {
        /// Comma-separated group names; all groups when absent.
        #[arg(long)]
        filter: Option<String>,
        /// Lower every model second eigenvalue by a relative 1e-3 to exercise the harness.
        #[arg(long = "inject-fault")]
        inject_fault: bool,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recomputes the published normalized-gap tables and diffs them.
    ReproduceTables {
        #[arg(long, value_enum, default_value_t = Scheme::Converged)]
        scheme: Scheme,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Writes SVG plots with CSV twins into a directory.
    Plot {
        #[arg(long)]
        out: PathBuf,
        /// Model for the eigenfunction and profile plots.
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long = "K", allow_hyphen_values = true, default_value_t = 1.0)]
        k: f64,
        #[arg(long = "D", default_value_t = 1.0)]
        d: f64,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long = "K", allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long = "D")]
    pub d: Option<f64>,
}

impl ModelArgs {
    pub fn require_n(&self) -> Result<u32> {
        self.n.ok_or_else(|| CliError::Usage("--n is required".into()))
    }
    pub fn require_k(&self) -> Result<f64> {
        self.k.ok_or_else(|| CliError::Usage("--K is required".into()))
    }
    pub fn require_d(&self) -> Result<f64> {
        self.d.ok_or_else(|| CliError::Usage("--D is required".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Tridiag,
    Shooting,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Tridiag => Method::Tridiag,
            MethodArg::Shooting => Method::Shooting,
            MethodArg::Both => Method::Both,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Interior nodes of the coarse grid; the refined grid has 2m+1.
    #[arg(long, default_value_t = DEFAULT_GRID_M)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

impl SolverArgs {
    pub fn options(&self) -> Result<SolveOptions> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(SolveOptions { grid_m: self.grid, method: self.method.into(), tol: self.tol, ..SolveOptions::default() })
    }
}

impl Default for SolverArgs {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID_M, method: MethodArg::Both, tol: DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    /// Default solver with extrapolation.
    Converged,
    /// Second-order differences on 1000 intervals without extrapolation.
    Published,
}

/// Parses `a,b,c` or `start:stop:count`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| CliError::Usage(format!("invalid --sweep-values {spec:?}: {what}"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count"));
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad("start is not a number"))?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad("stop is not a number"))?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad("count is not an integer"))?;
        if n < 2 {
            return Err(bad("count must be at least 2"));
        }
        return Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect());
    }
    spec.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad(&format!("{t:?} is not a number"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(parse_values("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_values("1:2").is_err());
        assert!(parse_values("a,b").is_err());
    }

    #[test]
    fn negative_curvature_parses() {
        let cli = Cli::try_parse_from(["gaplab", "solve", "--n", "3", "--K", "-1", "--D", "1"]).unwrap();
        match cli.command {
            Command::Solve { model, .. } => assert_eq!(model.k, Some(-1.0)),
            _ => panic!("wrong command"),
        }
    }
}
