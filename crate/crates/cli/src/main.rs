mod commands;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "gds", version, about = "Capacity bounds and certificates for GDS quantum channels")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct RunConfig {
    /// Base seed; restart r uses seed + r.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Optimizer and search restarts.
    #[arg(long, global = true, default_value_t = 32)]
    pub restarts: usize,
    /// Convergence tolerance of the optimizers.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Exit with status 3 when a requested certificate is infeasible.
    #[arg(long, global = true)]
    pub require_certificate: bool,
    /// Zero-pad GDS subchannels to a common Kraus count.
    #[arg(long, global = true)]
    pub pad: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a channel or GDS spec.
    Validate { path: PathBuf },
    /// One-shot bounds, certificates and predicates of a GDS spec.
    Bounds { path: PathBuf },
    /// Bound-versus-n table of the completely depolarizing family.
    Fig1 {
        /// Expression in `n` giving p, e.g. "n^4" or "16".
        #[arg(long)]
        p_rule: String,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        /// Write fig1_left.csv and fig1_right.csv into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Superadditivity check against an erasure channel.
    Superadd {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: f64,
    },
    /// Certified bounds of the completely depolarizing family.
    Cdc {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        /// Defaults to n.
        #[arg(long)]
        alpha: Option<usize>,
        /// Print the GDS spec of the channel instead of its bounds.
        #[arg(long)]
        emit_spec: bool,
    },
    /// Single-letter capacity check of a GDS spec.
    SingleLetter {
        path: PathBuf,
        /// JSON list of candidate pure states, one `[[re, im], ...]` per block.
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
    /// Lower estimate of the diamond norm of the transposed channel.
    Oracle { path: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    Core(gds_core::Error),
    Io(String),
    Parse(String),
    /// A report was produced but a required certificate is infeasible.
    Infeasible,
    /// A report was produced in a reduced mode because of a size guard.
    Guarded,
}

impl From<gds_core::Error> for CliError {
    fn from(e: gds_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(s) | CliError::Parse(s) => f.write_str(s),
            CliError::Infeasible => f.write_str("a required certificate is infeasible"),
            CliError::Guarded => f.write_str("size guard exceeded; report is closed-form only"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(gds_core::Error::GuardExceeded(_)) | CliError::Guarded => 4,
            CliError::Infeasible => 3,
            CliError::Io(_) => 1,
            CliError::Core(_) | CliError::Parse(_) => 2,
        }
    }

    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Core(gds_core::Error::UnequalKrausCounts { .. }) => {
                Some("rerun with --pad to zero-pad every subchannel to the largest Kraus count")
            }
            CliError::Core(gds_core::Error::NotTracePreserving { .. }) => {
                Some("the Kraus operators must satisfy sum_k E_k^dag E_k = I")
            }
            _ => None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = &cli.run;
    let result = match cli.command {
        Command::Validate { path } => commands::validate(&path, run),
        Command::Bounds { path } => commands::bounds(&path, run),
        Command::Fig1 {
            p_rule,
            n_max,
            n_min,
            out_dir,
        } => commands::fig1(&p_rule, n_min, n_max, out_dir.as_deref(), run),
        Command::Superadd { p, n, lambda } => commands::superadd(p, n, lambda, run),
        Command::Cdc { p, n, alpha, emit_spec } => commands::cdc(p, n, alpha, emit_spec, run),
        Command::SingleLetter { path, candidates } => commands::single_letter(&path, candidates.as_deref(), run),
        Command::Oracle { path } => commands::oracle(&path, run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(h) = e.hint() {
                eprintln!("hint: {h}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
