//! Automatic signal clamping: carrier search and bitrate estimation, plus the
//! module that chains them on a spare radio.

mod bitrate;
mod guessing;
mod scan;

use serde::{Deserialize, Serialize};

pub use bitrate::{estimate_bitrate, BitrateEstimatorConfig, RunLengthSummary, RunSelection, RunSymbols};
pub use guessing::GuessingModule;
pub use scan::{
    probe, region_scan, strongest, trichotomic_refine, Refinement, Refiner, RegionHit, RegionSpacing, ScanConfig,
};

use crate::env::Micros;
use crate::hal::HalError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClampError {
    #[error("no activity in range")]
    NoActivity,
    #[error("signal vanished during refinement")]
    SignalLost,
    #[error("not enough preamble runs for an estimate")]
    TooFewRuns,
    #[error("bad scan configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Hal(#[from] HalError),
}

/// Outcome of one clamp: carrier and bitrate plus how long each stage took.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClampResult {
    pub freq_hat: f64,
    pub bitrate_hat: f64,
    /// From the start of the detecting pass to the end of refinement, µs.
    pub t_freq: Micros,
    /// Capture plus estimation, µs.
    pub t_br: Micros,
    pub tunings: usize,
    /// Clock value when the receiver was reconfigured, µs.
    pub at: Micros,
}
