//! Joint precoding and phase-shift optimization for beyond-diagonal
//! reconfigurable intelligent surfaces serving multiuser communication and
//! single-target sensing at once.
//!
//! The pieces, bottom-up:
//!
//! - [`channel`]: seeded channel synthesis (correlated Rayleigh users,
//!   Rician BS → RIS link, LOS target steering).
//! - [`system`]: beam-gain matrix, sensing gain, the weighted matching
//!   objective, SINR and sum rate, beam patterns.
//! - [`precoder`]: the precoder subproblem with a bisection-found multiplier.
//! - [`phase`]: the Θ-subproblem, its splitting iteration and the
//!   symmetric-unitary, group and diagonal projections.
//! - [`aux_phase`]: closed-form auxiliary phases.
//! - [`ao`]: the outer alternating loop and its [`ao::SolveReport`].
//! - [`experiments`]: config loading and the CSV experiment runners.

pub mod ao;
pub mod aux_phase;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod phase;
pub mod precoder;
pub mod system;

pub use ao::{ao_solve, initialize, SolveReport};
pub use channel::{ChannelSet, Geometry};
pub use config::{ArchKind, SystemConfig};
pub use error::{Error, Result};
pub use system::{Architecture, AuxPhases, GainTargets, PhaseShift, Precoder};
