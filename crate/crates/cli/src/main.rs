mod builtin;
mod commands;
mod generate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use opint_core::ErrorKind;

/// Spectral-integral solvers for Sylvester and Riccati equations with a normal coefficient.
#[derive(Debug, Parser)]
#[command(name = "opint", version)]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Report format; csv is available for `integrate` only.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SylvesterMethod {
    Spectral,
    Contour,
    Kronecker,
    Double,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectral measure of the normal matrix C.
    Spectral { file: PathBuf },
    /// Operator, E- and Hilbert–Schmidt norms of Y with respect to C.
    Enorm { file: PathBuf },
    /// Solve XA − CX = D.
    Sylvester {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "spectral")]
        method: SylvesterMethod,
        /// Initial nodes per circle for the contour method.
        #[arg(long, default_value_t = opint_core::sylvester::DEFAULT_NODES)]
        nodes: usize,
    },
    /// Solve XA − CX + XBX = D by certified fixed-point iteration.
    Riccati {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Iterate even when the contraction certificate fails.
        #[arg(long)]
        override_certificate: bool,
    },
    /// Dyadic refinement study of a right Stieltjes integral over the file's rect.
    Integrate {
        file: PathBuf,
        /// Built-in integrand: `resolvent:A,D`, `poly:c0,c1,...` or `affine:p,q`.
        #[arg(long)]
        function: String,
        /// Finest level; level l is a 2^l x 2^l grid.
        #[arg(long, default_value_t = 40)]
        grid_levels: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Write a seeded random problem file.
    Generate {
        #[arg(value_enum)]
        kind: generate::Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        dim: usize,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] opint_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::InvalidInput => 2,
                ErrorKind::Precondition => 3,
                ErrorKind::NonConvergence => 4,
            },
            CliError::Usage(_) | CliError::Write { .. } => 2,
        }
    }
}

/// Text to emit and the exit code to finish with. A nonzero code here means
/// the report is still meaningful (an uncertified problem, a study that did
/// not converge).
pub struct Emit {
    pub text: String,
    pub code: u8,
    pub note: Option<String>,
}

impl Emit {
    pub fn ok(text: String) -> Self {
        Self { text, code: 0, note: None }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("OPINT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("OPINT_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> Result<Emit, CliError> {
    configure_threads()?;
    let format = cli.format;
    let json_only = |name: &str| match format {
        Some(Format::Csv) => Err(CliError::Usage(format!("{name} reports are JSON only"))),
        _ => Ok(()),
    };
    match cli.command {
        Command::Spectral { file } => {
            json_only("spectral")?;
            commands::spectral(&file)
        }
        Command::Enorm { file } => {
            json_only("enorm")?;
            commands::enorm(&file)
        }
        Command::Sylvester { file, method, nodes } => {
            json_only("sylvester")?;
            commands::sylvester(&file, method, nodes)
        }
        Command::Riccati {
            file,
            tol,
            max_iter,
            override_certificate,
        } => {
            json_only("riccati")?;
            commands::riccati(&file, tol, max_iter, override_certificate)
        }
        Command::Integrate {
            file,
            function,
            grid_levels,
            tol,
        } => commands::integrate(&file, &function, grid_levels, tol, format.unwrap_or(Format::Csv)),
        Command::Generate { kind, seed, dim } => {
            json_only("generate")?;
            generate::generate(kind, seed, dim)
        }
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    match run(cli).and_then(|emit| write_output(output.as_ref(), &emit.text).map(|()| emit)) {
        Ok(emit) => {
            if let Some(note) = emit.note {
                eprintln!("opint: {note}");
            }
            ExitCode::from(emit.code)
        }
        Err(e) => {
            eprintln!("opint: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
