use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use opseries::InverseLaplacianMode;
use opseries_cli::commands::{
    cmd_flow, cmd_solve, parse_query, parse_sample, read_problem, CliError, FlowOptions, SolveOptions,
};

#[derive(Parser)]
#[command(name = "opseries", version, about = "Operator-series solvers for evolution, heat and flow problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Standard,
    Literal,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an evolution, heat or ball problem file.
    Solve {
        file: PathBuf,
        /// Number of series coefficients beyond w0.
        #[arg(long, default_value_t = 12)]
        order: usize,
        /// Check the PDE residual by finite differences.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
        /// Sample grid, e.g. `x:-1:1:11,t:0:0.2:5`.
        #[arg(long)]
        sample: Option<String>,
        /// Write samples to this file instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve a flow problem file.
    Flow {
        file: PathBuf,
        /// Kernel convention for the quadrature inverse Laplacian.
        #[arg(long, value_enum, default_value_t = Mode::Standard)]
        mode: Mode,
        /// Evaluate the velocity by quadrature on the sample grid.
        #[arg(long)]
        quadrature: bool,
        #[arg(long)]
        sample: Option<String>,
        /// Base path for per-component velocity files.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Point `x,y,z,t` at which to report velocity and pressure.
        #[arg(long, allow_hyphen_values = true)]
        query: Option<String>,
    },
}

fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve { file, order, verify, tolerance, sample, csv } => {
            let opts = SolveOptions {
                order,
                verify,
                tolerance,
                sample: sample.as_deref().map(parse_sample).transpose()?,
                csv,
            };
            cmd_solve(&read_problem(&file)?, &opts, out, err)
        }
        Command::Flow { file, mode, quadrature, sample, csv, query } => {
            let opts = FlowOptions {
                mode: match mode {
                    Mode::Standard => InverseLaplacianMode::Standard,
                    Mode::Literal => InverseLaplacianMode::Literal,
                },
                quadrature,
                sample: sample.as_deref().map(parse_sample).transpose()?,
                csv,
                query: query.as_deref().map(parse_query).transpose()?,
            };
            cmd_flow(&read_problem(&file)?, &opts, out, err)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = match run(cli, &mut out, &mut err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
