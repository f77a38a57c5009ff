//! Multi-span amplified optical link analysis.
//!
//! Models a fiber link of `K` equal segments, each followed by a quantum-limited
//! amplifier, and evaluates the achievable spectral efficiency with classical
//! single-symbol receivers (heterodyne, homodyne) and with an optimal
//! joint-detection receiver (Holevo rate). On top of that it solves the
//! gain-selection problems that trade amplifier energy against rate, the
//! continuous-amplification on-off problem, and the high-baud-rate scaling of
//! link capacity.
//!
//! All modules except [`units`] work in photon-number units (`ħω = 1`) and
//! report rates in bits (base-2 logarithms).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuous;
pub mod error;
pub mod link;
pub mod optimize;
pub mod quantum_limit;
pub mod se;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
pub use link::{ChannelCoefficients, GainProfile, LinkConfig};
pub use optimize::{EnergyModel, OptimizationResult, SolveStatus};
pub use se::ReceiverKind;
pub use sweep::{Problem, SweepCell, SweepSpec};
