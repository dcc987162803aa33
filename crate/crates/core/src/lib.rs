//! Downlink system-level simulation of a hexagonal cellular network serving
//! ground and aerial users.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: the 19-site / 57-cell layout, user drops and the local
//!   angle frame of every cell.
//! * [`antenna`]: element pattern, planar-array steering vectors, fixed
//!   electrical downtilt and maximum-ratio transmission (MRT) weights.
//! * [`channel`]: height-dependent LoS probability, pathloss and shadowing,
//!   plus Rician small-scale channel vectors.
//! * [`link`]: RSRP, max-RSRP association, SNR/SINR, Shannon rates and the
//!   two-user ground-aerial NOMA comparator.
//! * [`experiments`]: Monte Carlo drivers for the dedicated command-and-control
//!   channel and the shared payload channel, with empirical statistics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod link;

pub use antenna::{ArrayGeometry, BeamWeights};
pub use channel::{ChannelParams, ChannelVector, LargeScaleState};
pub use error::{Error, Result};
pub use experiments::{
    ecdf, percentile, run_cnc, run_shared, CncResult, ExperimentConfig, Scenario, SharedResult,
};
pub use geometry::{CellDescriptor, DirectionAngles, NetworkLayout, Position, UeKind, UeState};
pub use link::{ArrayMode, LinkMetrics, PowerConfig};

/// Linear power ratio from decibels.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Decibels from a linear power ratio.
#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
