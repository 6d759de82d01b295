//! Beam-domain channel modeling, per-beam synchronization (PBS) and beam
//! division multiple access (BDMA) scheduling for wideband massive MIMO.
//!
//! The crate is organized bottom-up:
//!
//! - [`channel`]: array geometry, ray-based channel generation, the DFT beam
//!   transform, the beam-domain approximation and the power matrix.
//! - [`pbs`]: per-beam and joint time/frequency synchronization, effective
//!   delay/Doppler spreads and effective per-subcarrier beam channels.
//! - [`sched`]: Monte Carlo ergodic sum rates, greedy and exhaustive beam
//!   scheduling.
//! - [`link`]: a time-domain OFDM link simulator comparing the two
//!   synchronization modes.
//! - [`harness`]: configuration, clustered scenario generation and the
//!   experiment drivers used by the CLI.

pub mod channel;
pub mod harness;
pub mod link;
pub mod pbs;
pub mod sched;

mod error;
mod linalg;

pub use error::{Error, Result};
pub use linalg::{cis, log2_det_hermitian, CMatrix};

pub use channel::{
    ArrayConfig, BeamChannel, BeamTransform, DftBeamformer, Orientation, PowerMatrix, Ray, RaySet,
    UtProfile,
};
pub use pbs::{BoundMode, OffsetBounds, OfdmConfig, SpreadReport, SyncMode, SyncPlan};
pub use sched::{BeamAssignment, BeamLimits, Direction, LinkBudget, RateEstimate, UtBeams};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
