//! Finite-horizon feedback capacity of unifilar channels.
//!
//! [`optimize_rate`] maximizes `(1/N) I(X^N -> Y^N | s_0)` over causal input
//! policies `p(x^N || y^{N-1})`; [`finite_n_bracket`] repeats that for every
//! initial state. Memoryless channels go through [`dmc_capacity`]
//! (Blahut-Arimoto), and the Z-channel has a closed form.

mod dmc;
mod objective;
mod optimize;
mod policy;

pub use dmc::{dmc_capacity, z_channel, z_channel_closed_form, DmcCapacity, ZChannelOptimum, BRACKET_TOL};
pub use optimize::{
    evaluate_rate, finite_n_bracket, optimize_rate, tree_rate, CapacityBracket, CapacityEstimate, InitialState,
    OptimizerDiagnostics, OptimizerSettings,
};
pub use policy::{CausalPolicy, PolicyFile};
