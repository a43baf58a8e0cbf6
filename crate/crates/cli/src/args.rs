use std::path::PathBuf;

use bellopt::efficiency::EtaMethod;
use bellopt::{RankClass, StateSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bellopt", version, about = "Quantum maxima, error tolerance and detection thresholds of I_CH3")]
pub struct Cli {
    /// File of `key = value` defaults (starts, tol, seed, max_iters, penalty_weight, fd_step, rank_tol).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Use 10000 starts per run unless --starts is given.
    #[arg(long, global = true)]
    pub paper_fidelity: bool,

    /// Run multistart searches on one thread.
    #[arg(long, global = true)]
    pub serial: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximize I_CH3 at one `c` and state.
    Maximize {
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value = "general", value_parser = parse_class)]
        class: RankClass,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximize over a grid of `c` at a fixed state.
    SweepC {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "general", value_parser = parse_class)]
        class: RankClass,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximize over a grid of Schmidt ratios at a fixed `c`.
    SweepRatio {
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "general", value_parser = parse_class)]
        class: RankClass,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Minimize the threshold detection efficiency.
    Efficiency {
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value = "general", value_parser = parse_class)]
        class: RankClass,
        #[arg(long, value_enum, default_value_t = MethodArg::Ratio)]
        method: MethodArg,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Largest symmetric error on I_CH and I_3 that keeps the POVM advantage.
    ErrorTolerance {
        #[arg(long, allow_negative_numbers = true)]
        c_from: f64,
        #[arg(long, allow_negative_numbers = true)]
        c_to: f64,
        #[arg(long, default_value_t = 0.5)]
        c_step: f64,
        #[arg(long, default_value_t = bellopt::tolerance::DELTA_RESOLUTION)]
        delta_resolution: f64,
        /// Report differences at this error instead of at the maximum.
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Local hidden-variable bound of I_CH3.
    LhvBound {
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
    },
    /// Cross-check the optimizer against brute-force oracles.
    Verify {
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        c: f64,
        #[command(flatten)]
        run: RunArgs,
        /// Run record (JSON).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Emit the data behind one figure as CSV.
    Figure {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=16))]
        id: u8,
        /// Override the default abscissa grid.
        #[arg(long, requires_all = ["to", "step"])]
        from: Option<f64>,
        #[arg(long, requires_all = ["from", "step"])]
        to: Option<f64>,
        #[arg(long, requires_all = ["from", "to"])]
        step: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
        /// CSV destination; stdout when absent.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Run record (JSON).
        #[arg(long, value_name = "FILE")]
        record: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// Schmidt ratio α/β of α|01⟩ + β|10⟩.
    #[arg(long, conflicts_with = "phi_plus", allow_negative_numbers = true)]
    pub ratio: Option<f64>,
    /// Use |φ⁺⟩ (the default).
    #[arg(long)]
    pub phi_plus: bool,
}

impl StateArgs {
    pub fn spec(&self) -> StateSpec {
        match self.ratio {
            Some(ratio) => StateSpec::Schmidt { ratio },
            None => StateSpec::PhiPlus,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, env = "BELLOPT_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long)]
    pub step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Run record (JSON).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// One CSV row per result.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ratio,
    Root,
}

impl From<MethodArg> for EtaMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ratio => EtaMethod::RatioFormula,
            MethodArg::Root => EtaMethod::RootSolve,
        }
    }
}

fn parse_class(s: &str) -> Result<RankClass, String> {
    s.parse().map_err(|e: bellopt::Error| e.to_string())
}
