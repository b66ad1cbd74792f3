use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod report;

use config::Config;

#[derive(Parser, Debug)]
#[command(name = "cuntz-lab", version, about = "Cuntz algebra representations from filter banks")]
struct Cli {
    /// TOML file with defaults for the flags below
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Tolerance for every floating-point identity
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    emit: Option<Emit>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Unitarity and low-pass checks for a filter bank
    CheckQmf {
        #[arg(required_unless_present = "bank")]
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        bank: Option<PathBuf>,
    },
    /// Polyphase matrix of a filter bank
    Polyphase {
        #[arg(long)]
        bank: PathBuf,
    },
    /// Filter bank of a polyphase matrix
    Synthesize {
        matrix: PathBuf,
    },
    /// Apply S_I (or S_I^* with --star) to a vector
    Apply {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long, default_value = "")]
        word: String,
        #[arg(long)]
        star: bool,
        #[arg(long = "vec")]
        vector: PathBuf,
    },
    /// Subspace certificates: co-invariance, wandering part, saturation, purity
    Analyze {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        /// Laurent radius or step level of the saturation window
        #[arg(long)]
        window: Option<i64>,
    },
    /// Co-invariant hull of e_0, or of window probes with --seeds
    Attractor {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        /// Seed with e_{-R..R} instead of e_0
        #[arg(long)]
        seeds: Option<i64>,
    },
    /// Kernel of sqrt(N) S_0^* - I on a window
    Eigenspace {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        window: Option<i64>,
    },
    /// L, W, SW, ... layers of a co-invariant subspace
    Decompose {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Neumann-series eigenvector of S_0^* and its kernel inner product
    Wold {
        #[arg(long)]
        rep: PathBuf,
        /// "re,im" or "re"
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Vector in ker S_0^* (default S_1 e_0 normalized)
        #[arg(long)]
        w: Option<PathBuf>,
        /// Second kernel vector for the inner product check
        #[arg(long)]
        w2: Option<PathBuf>,
        #[arg(long, default_value_t = 60)]
        n: usize,
    },
    /// Exact checks in the Fock-state representation
    Fock {
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value_t = FockCheck::Purity)]
        check: FockCheck,
    },
    /// Scaling function by the cascade algorithm
    Cascade {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value_t = 0)]
        grid_level: i32,
        /// Pure refinement instead of projecting back to the grid
        #[arg(long)]
        refine: bool,
        #[arg(long)]
        wavelets: bool,
    },
    /// Partial Bessel sum of the wavelet system against F
    FrameCheck {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long = "F")]
        f: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value = "-8:8")]
        jrange: String,
        #[arg(long, allow_hyphen_values = true)]
        krange: Option<String>,
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Recompute the reference values; write fixture files with --out
    Fixtures {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FockCheck {
    /// Compressed norms, invariance witness and the wandering check
    Purity,
    Wandering,
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("CUNTZ_LAB_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("CUNTZ_LAB_THREADS: not a count: {v:?}")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(p) => match Config::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        },
        None => Config::default(),
    };
    let threads = match threads_from_env() {
        Ok(t) => t.or(cfg.threads),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(t) = threads.filter(|&t| t > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().ok();
    }
    let emit = match (cli.emit, cfg.emit.as_deref()) {
        (Some(e), _) => e,
        (None, None | Some("json")) => Emit::Json,
        (None, Some("csv")) => Emit::Csv,
        (None, Some(other)) => {
            eprintln!("error: config field `emit`: expected json or csv, got {other:?}");
            return ExitCode::from(2);
        }
    };
    let tol = cli.tol.or(cfg.tol).unwrap_or(cuntz_lab::filterbank::DEFAULT_TOL);
    match commands::run(cli.command, &cfg, tol, emit) {
        Ok(out) => {
            print!("{}", out.text);
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
