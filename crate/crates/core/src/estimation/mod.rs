//! Channel estimation from noisy antenna-domain snapshots.
//!
//! Both estimators share the coarse-to-fine correlation search in [`search`]:
//! multisource peels `K` virtual transmitters off the snapshot one at a time,
//! multisink searches a single user location against a channel database.

mod multisink;
mod multisource;
mod noise;
mod response;
pub mod search;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use multisink::{estimate_multisink, multisink_objective, MultisinkEstimator, MultisinkResult};
pub use multisource::{
    estimate_multisource, multisource_objective, MultisourceEstimator, MultisourceResult,
    SourceEstimate,
};
pub use noise::{add_noise, evm_db, evm_db_slices, NoisyChannel};
pub use search::{grid_peak_search, SearchParams, SearchRegion};

use crate::propagation::SteeringMode;

/// How a located peak's complex amplitude is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeMode {
    /// Correlation divided by the antenna count.
    Paper,
    /// Correlation divided by the squared norm of the response (least squares).
    #[default]
    Ls,
}

impl FromStr for AmplitudeMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper" => Ok(AmplitudeMode::Paper),
            "ls" => Ok(AmplitudeMode::Ls),
            other => Err(format!("unknown amplitude mode `{other}`")),
        }
    }
}

/// Score used by the peak search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    /// `|<h, a(l)>|`, the bare correlation magnitude.
    Raw,
    /// `|<h, a(l)>| / ||a(l)||`, the matched-filter score. Path loss inside the
    /// response otherwise pulls the raw maximum onto the antennas themselves.
    #[default]
    Normalized,
}

impl FromStr for CorrelationMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "raw" => Ok(CorrelationMode::Raw),
            "normalized" => Ok(CorrelationMode::Normalized),
            other => Err(format!("unknown correlation mode `{other}`")),
        }
    }
}

/// Knobs shared by both estimators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimatorOptions {
    pub steering: SteeringMode,
    pub amplitude: AmplitudeMode,
    pub correlation: CorrelationMode,
    /// Re-fit all multisource amplitudes jointly after the greedy pass.
    pub joint_refit: bool,
    /// Treat the array as mounted on the walls of its convex hull: an antenna
    /// does not see candidate emitters beyond the hull edge it sits on.
    pub mounted_array: bool,
    /// Passes of cyclic re-estimation after each new multisource peak; 0 is
    /// plain successive cancellation.
    pub relax_rounds: usize,
}
