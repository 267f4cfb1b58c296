//! Scenario configuration: a TOML file whose field names carry their units.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{AmplitudeMode, CorrelationMode, EstimatorOptions, SearchParams};
use crate::propagation::{AntennaArray, SteeringMode};
use crate::Complex64;

/// Reflection orders above this make the image count explode (4 * 3^(n-1)
/// per antenna) without changing anything the runner measures.
pub const MAX_REFLECTION_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// The noisy snapshot itself.
    Antenna,
    Multisink,
    Multisource,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Antenna => "antenna",
            Estimator::Multisink => "multisink",
            Estimator::Multisource => "multisource",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Equally spaced around the room boundary, counterclockwise from `(0, 0)`.
    #[default]
    Perimeter,
    /// Along the bottom wall from `(0, 0)`.
    Linear,
}

/// A whole experiment: one scenario per entry of `antenna_spacings_lambda`,
/// everything else shared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub room_width_m: f64,
    pub room_depth_m: f64,
    pub wavelength_m: f64,
    pub antenna_spacings_lambda: Vec<f64>,
    pub antenna_placement: Placement,
    pub max_order: usize,
    pub wall_reflection_coefficient: f64,
    pub k_sources: usize,
    pub input_evm_sweep_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub estimators: Vec<Estimator>,
    pub amplitude_mode: AmplitudeMode,
    pub steering_mode: SteeringMode,
    pub correlation_mode: CorrelationMode,
    /// Joint least-squares refit of the multisource amplitudes.
    pub joint_refit: bool,
    pub ue_margin_lambda: f64,
    /// `[re, im]`.
    pub tx_amplitude: [f64; 2],
    pub coarse_step_lambda: f64,
    pub final_step_lambda: f64,
    pub zoom_window_radius_cells: usize,
    pub step_shrink_factor: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            room_width_m: 6.4,
            room_depth_m: 6.4,
            wavelength_m: 0.2,
            antenna_spacings_lambda: vec![0.5, 2.0, 8.0],
            antenna_placement: Placement::Perimeter,
            max_order: 1,
            wall_reflection_coefficient: 1.0,
            k_sources: 5,
            input_evm_sweep_db: (0..9).map(|i| -30.0 + 5.0 * i as f64).collect(),
            trials: 100,
            master_seed: 1,
            estimators: vec![
                Estimator::Antenna,
                Estimator::Multisource,
                Estimator::Multisink,
            ],
            amplitude_mode: AmplitudeMode::default(),
            steering_mode: SteeringMode::default(),
            correlation_mode: CorrelationMode::default(),
            joint_refit: false,
            ue_margin_lambda: 0.5,
            tx_amplitude: [1.0, 0.0],
            coarse_step_lambda: 0.25,
            final_step_lambda: 1.0 / 64.0,
            zoom_window_radius_cells: 2,
            step_shrink_factor: 2.0,
        }
    }
}

/// The default configuration as an annotated file, written by `scenario init`.
pub const DEFAULT_CONFIG_TOML: &str = r#"# Room [0, W] x [0, D], walls in metres.
room_width_m = 6.4
room_depth_m = 6.4
wavelength_m = 0.2

# One scenario per spacing. Perimeter placement in the default room gives
# M = 256, 64 and 16 antennas.
antenna_spacings_lambda = [0.5, 2.0, 8.0]
antenna_placement = "perimeter"   # perimeter | linear

max_order = 1
wall_reflection_coefficient = 1.0

# Sources extracted by the multisource estimator.
k_sources = 5

# Input EVM points; -inf means a noiseless snapshot.
input_evm_sweep_db = [-30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0]
trials = 100
master_seed = 1

estimators = ["antenna", "multisource", "multisink"]
amplitude_mode = "ls"             # ls | paper
steering_mode = "paper"           # paper | free_space | phase_only
correlation_mode = "normalized"   # normalized | raw
joint_refit = false

# Users are drawn uniformly at least this far from every wall.
ue_margin_lambda = 0.5
tx_amplitude = [1.0, 0.0]

# Coarse-to-fine search.
coarse_step_lambda = 0.25
final_step_lambda = 0.015625
zoom_window_radius_cells = 2
step_shrink_factor = 2.0
"#;

impl ScenarioConfig {
    /// Parses and validates a config file. Errors name the offending field.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config {
                field: if path == "." { "<root>".into() } else { path },
                message: inner.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Panics on a `master_seed` above `i64::MAX`, which TOML cannot hold;
    /// validated configs never have one.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("validated config fields fit TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    field,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        positive("room_width_m", self.room_width_m)?;
        positive("room_depth_m", self.room_depth_m)?;
        positive("wavelength_m", self.wavelength_m)?;
        if self.antenna_spacings_lambda.is_empty() {
            return Err(Error::config(
                "antenna_spacings_lambda",
                "at least one spacing is required",
            ));
        }
        for (i, &s) in self.antenna_spacings_lambda.iter().enumerate() {
            let field = format!("antenna_spacings_lambda[{i}]");
            positive(&field, s)?;
            if self.antenna_count(s) == 0 {
                return Err(Error::config(
                    &field,
                    format!("spacing {s} lambda leaves no antennas"),
                ));
            }
        }
        if self.max_order > MAX_REFLECTION_ORDER {
            return Err(Error::config(
                "max_order",
                format!(
                    "{} exceeds the supported maximum {MAX_REFLECTION_ORDER}",
                    self.max_order
                ),
            ));
        }
        let r = self.wall_reflection_coefficient;
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::config(
                "wall_reflection_coefficient",
                format!("{r} outside (0, 1]"),
            ));
        }
        if self.input_evm_sweep_db.is_empty() {
            return Err(Error::config(
                "input_evm_sweep_db",
                "at least one point is required",
            ));
        }
        for (i, &e) in self.input_evm_sweep_db.iter().enumerate() {
            if e.is_nan() || e == f64::INFINITY {
                return Err(Error::config(
                    &format!("input_evm_sweep_db[{i}]"),
                    format!("{e} is not a usable EVM; use a finite value or -inf"),
                ));
            }
        }
        let mut sweep = self.input_evm_sweep_db.clone();
        sweep.sort_by(f64::total_cmp);
        if sweep.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config(
                "input_evm_sweep_db",
                "points must be distinct",
            ));
        }
        if self.master_seed > i64::MAX as u64 {
            return Err(Error::config(
                "master_seed",
                format!("must not exceed {}", i64::MAX),
            ));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "at least one trial is required"));
        }
        if self.estimators.is_empty() {
            return Err(Error::config(
                "estimators",
                "at least one estimator is required",
            ));
        }
        let mut names = self.estimators.clone();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("estimators", "estimators must be distinct"));
        }
        let margin = self.ue_margin_m();
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::config("ue_margin_lambda", "must be non-negative"));
        }
        if 2.0 * margin >= self.room_width_m.min(self.room_depth_m) {
            return Err(Error::config(
                "ue_margin_lambda",
                "margin leaves no room for the user",
            ));
        }
        let [re, im] = self.tx_amplitude;
        if !(re.is_finite() && im.is_finite()) || (re == 0.0 && im == 0.0) {
            return Err(Error::config("tx_amplitude", "must be finite and non-zero"));
        }
        positive("coarse_step_lambda", self.coarse_step_lambda)?;
        positive("final_step_lambda", self.final_step_lambda)?;
        if self.final_step_lambda > self.coarse_step_lambda {
            return Err(Error::config(
                "final_step_lambda",
                "must not exceed coarse_step_lambda",
            ));
        }
        if self.zoom_window_radius_cells == 0 {
            return Err(Error::config(
                "zoom_window_radius_cells",
                "must be at least 1",
            ));
        }
        if !(self.step_shrink_factor > 1.0 && self.step_shrink_factor.is_finite()) {
            return Err(Error::config("step_shrink_factor", "must exceed 1"));
        }
        Ok(())
    }

    /// Number of antennas at spacing `s` (in wavelengths).
    pub fn antenna_count(&self, spacing_lambda: f64) -> usize {
        let spacing = spacing_lambda * self.wavelength_m;
        match self.antenna_placement {
            Placement::Perimeter => {
                (2.0 * (self.room_width_m + self.room_depth_m) / spacing).round() as usize
            }
            Placement::Linear => (self.room_width_m / spacing).floor() as usize + 1,
        }
    }

    pub fn array(&self, spacing_lambda: f64) -> Result<AntennaArray> {
        let count = self.antenna_count(spacing_lambda);
        match self.antenna_placement {
            Placement::Perimeter => {
                AntennaArray::perimeter(self.room_width_m, self.room_depth_m, count)
            }
            Placement::Linear => AntennaArray::linear(spacing_lambda * self.wavelength_m, count),
        }
    }

    pub fn ue_margin_m(&self) -> f64 {
        self.ue_margin_lambda * self.wavelength_m
    }

    pub fn tx_amplitude(&self) -> Complex64 {
        Complex64::new(self.tx_amplitude[0], self.tx_amplitude[1])
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            coarse_step: self.coarse_step_lambda * self.wavelength_m,
            final_step: self.final_step_lambda * self.wavelength_m,
            zoom_window_radius: self.zoom_window_radius_cells,
            step_shrink: self.step_shrink_factor,
        }
    }

    pub fn estimator_options(&self) -> EstimatorOptions {
        EstimatorOptions {
            steering: self.steering_mode,
            amplitude: self.amplitude_mode,
            correlation: self.correlation_mode,
            joint_refit: self.joint_refit,
            ..EstimatorOptions::default()
        }
    }
}
