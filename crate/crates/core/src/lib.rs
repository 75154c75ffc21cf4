//! Unifilar finite-state channels with feedback.
//!
//! The crate covers four areas:
//!
//! * [`channel`]: finite-state channel laws, unifilar channels, n-fold
//!   dynamics, support-graph connectivity, indecomposability gaps and the
//!   total-variation channel distance.
//! * [`info`]: exact entropies, causal conditioning and directed information
//!   over dense joint laws.
//! * [`capacity`]: finite-horizon feedback-rate maximization over causal input
//!   policies, Blahut-Arimoto for memoryless channels and the Z-channel
//!   closed form.
//! * [`gallery`] and [`oracle`]: explicit channel families used to exhibit the
//!   discontinuity of feedback capacity, and the step-bounded-oracle machinery
//!   behind the effective double sequence and the threshold stopper.

pub mod capacity;
pub mod channel;
pub mod error;
pub mod format;
pub mod gallery;
pub mod info;
pub mod oracle;
pub mod prob;

pub use channel::{compose_unifilar, tv_distance, Alphabet, FiniteStateChannel, UnifilarChannel};
pub use error::{Error, Result};
pub use prob::Probability;
