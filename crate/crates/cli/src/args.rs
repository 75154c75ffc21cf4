use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fsc", version, about = "Finite-state channels with feedback: validation, measures and capacity estimates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format for the run report.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,

    /// Write the report here instead of stdout (for `gallery`, the channel file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Include wall-clock time in the report (otherwise it goes to stderr only).
    #[arg(long, global = true)]
    pub timing: bool,

    /// Seed for the multi-start optimizer.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args, Clone)]
pub struct OptimizerFlags {
    /// Number of optimizer restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Plateau tolerance on the rate.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap per restart.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Largest history tree, as (|X||Y|)^N, the optimizer will build.
    #[arg(long)]
    pub max_leaves: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a channel file and report its structure.
    Validate {
        path: PathBuf,
        /// Largest n for the indecomposability gap.
        #[arg(long, default_value_t = 6)]
        gap_n: usize,
    },
    /// Estimate the finite-horizon feedback rate.
    Capacity {
        path: PathBuf,
        /// Horizon N.
        #[arg(long)]
        n: usize,
        /// Initial state (defaults to the file's `s0`, then 0).
        #[arg(long, conflicts_with = "all_states")]
        s0: Option<usize>,
        /// Estimate from every initial state and report the bracket.
        #[arg(long)]
        all_states: bool,
        /// Report every horizon from 1 to N.
        #[arg(long)]
        sweep_n: bool,
        /// Write the best policy (of the last estimate) as JSON.
        #[arg(long)]
        policy_out: Option<PathBuf>,
        #[command(flatten)]
        opt: OptimizerFlags,
    },
    /// Directed information of a channel driven by a causal policy.
    DirectedInfo {
        path: PathBuf,
        /// Policy file; without it the uniform iid policy is used.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Horizon for the uniform policy.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        s0: Option<usize>,
    },
    /// Blahut-Arimoto capacity of one state's memoryless channel, or of a Z-channel.
    DmcCapacity {
        #[arg(required_unless_present = "eps")]
        path: Option<PathBuf>,
        /// State whose channel is used.
        #[arg(long, default_value_t = 0)]
        state: usize,
        /// Z-channel crossover; also reports the closed form.
        #[arg(long, conflicts_with = "path")]
        eps: Option<String>,
    },
    /// Build a channel from the gallery and write it as a channel file.
    Gallery {
        #[arg(value_enum)]
        name: GalleryName,
        #[arg(long, default_value = "1/4")]
        eps: String,
        /// Crossover of the base family member.
        #[arg(long, conflicts_with = "k")]
        lambda: Option<String>,
        /// Use crossover 1/k for the base family member.
        #[arg(long)]
        k: Option<u64>,
        /// State count for `extend-states`.
        #[arg(long, visible_alias = "s")]
        states: Option<usize>,
        #[arg(long)]
        x_size: Option<usize>,
        #[arg(long)]
        y_size: Option<usize>,
    },
    /// Distance to the disconnected member shrinks while the state gap does not.
    DiscontinuityDemo {
        #[arg(long, default_value = "1/4")]
        eps: String,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64")]
        k: Vec<u64>,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[command(flatten)]
        opt: OptimizerFlags,
    },
    /// Tabulate the dyadic sequence of a step-bounded program.
    LambdaSeq {
        /// Counter-machine program file.
        #[arg(long, required_unless_present = "mock", conflicts_with = "mock")]
        program: Option<PathBuf>,
        /// Built-in oracle: `halt:<steps>` or `never`.
        #[arg(long)]
        mock: Option<String>,
        /// Program input.
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = 20)]
        m_max: u64,
    },
    /// Indecomposability gaps for n = 1..N.
    Indecomp {
        path: PathBuf,
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Strong connectivity and support-graph distances.
    Connectivity { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GalleryName {
    /// Noiseless state 0, Z-channel state 1, no transitions between them.
    NoiselessZ,
    WLambda,
    WK,
    /// Adds Z-channel states to the family member.
    ExtendStates,
    /// Pads the family member with unused symbols.
    ExtendAlphabets,
}
