//! Command implementations behind the `hetrax-dse` binary, exposed as a
//! library so integration tests drive them directly.

pub mod commands;
pub mod manifest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "hetrax-dse",
    version,
    about = "Design-space exploration for a 3D heterogeneous transformer accelerator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the kernel graph for a model and report FLOP/byte budgets,
    /// the FF GEMM fraction, and ReRAM rewrite estimates.
    Workload(WorkloadArgs),
    /// Run the multi-objective placement search and emit the Pareto set.
    Optimize(OptimizeArgs),
    /// Evaluate one placement file end to end.
    Evaluate(EvaluateArgs),
    /// Power-density and DRAM-feasibility arithmetic for PIM baselines.
    Baseline(BaselineArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Built-in model name (bert-tiny/base/large, bart-base/large) or a
    /// path to a model config JSON.
    #[arg(long, default_value = "bert-large")]
    pub model: String,
    /// Input sequence length.
    #[arg(long, default_value_t = 512)]
    pub seq: u64,
    #[arg(long, value_enum)]
    pub attention: Option<AttentionArg>,
    #[arg(long, value_enum)]
    pub topology: Option<TopologyArg>,
    #[arg(long, value_enum)]
    pub blocks: Option<BlocksArg>,
    /// Value precision in bits (8, 16, 32).
    #[arg(long)]
    pub precision: Option<u32>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum AttentionArg {
    Mha,
    Mqa,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum TopologyArg {
    Sequential,
    #[value(name = "parallel-attention")]
    ParallelAttention,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum BlocksArg {
    #[value(name = "encoder-only")]
    EncoderOnly,
    #[value(name = "decoder-only")]
    DecoderOnly,
    #[value(name = "encoder-decoder")]
    EncoderDecoder,
}

#[derive(Args, Debug)]
pub struct WorkloadArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "hetrax-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Platform config JSON; the built-in default platform when absent.
    #[arg(long)]
    pub platform: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ptn")]
    pub objectives: ObjectivesArg,
    #[arg(long, default_value_t = 50)]
    pub epochs: u32,
    #[arg(long, default_value_t = 10)]
    pub perturbations: u32,
    /// Falls back to HETRAX_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "off")]
    pub guidance: GuidanceArg,
    /// Worker threads for candidate evaluation (wall time only).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Restart each perturbation from its own random start instead of the
    /// shared per-epoch start.
    #[arg(long, default_value_t = false)]
    pub independent_starts: bool,
    #[arg(long, default_value = "hetrax-out")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ObjectivesArg {
    Pt,
    Ptn,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum GuidanceArg {
    Off,
    Learned,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Placement JSON (as written by `optimize`).
    #[arg(long)]
    pub placement: PathBuf,
    #[arg(long)]
    pub platform: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "hetrax-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    /// Compute units per memory bank.
    #[arg(long)]
    pub units: u32,
    /// Power per compute unit, watts.
    #[arg(long)]
    pub unit_power: f64,
    /// Total die area, mm^2.
    #[arg(long)]
    pub die_area: f64,
    /// Banks sharing the die.
    #[arg(long, default_value_t = 16)]
    pub banks: u32,
    /// Steady-state temperature to check against the DRAM limit.
    #[arg(long)]
    pub temp: Option<f64>,
    /// Reference GPU power density for the comparison ratio, W/mm^2.
    #[arg(long, default_value_t = 0.5)]
    pub gpu_density: f64,
    #[arg(long, default_value = "hetrax-out")]
    pub out: PathBuf,
}

/// Seed resolution: flag, then HETRAX_SEED, then 0.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("HETRAX_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}
