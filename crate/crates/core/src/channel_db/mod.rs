//! The channel database: per-antenna virtual sinks precomputed from the
//! environment, so that a channel is fully determined by the user's location
//! and complex amplitude.

mod infer;
pub(crate) mod io;
mod pipeline;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Environment, Location, Wall};
use crate::propagation::{enumerate_virtual_sinks, AntennaArray, VirtualSink};

pub use infer::{
    build_db_from_walls, clip_line_to_bounds, infer_wall, infer_walls, snap_to_mounted_antennas,
    GainCompensation, WallEstimate, CLIP_MARGIN_WAVELENGTHS, MOUNTED_WALL_TOLERANCE_WAVELENGTHS,
};
pub use io::{deserialize_db, serialize_db};
pub use pipeline::{DatabaseInference, InferenceOptions, InferredDatabase};

/// Current database file format version.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDatabase {
    wavelength: f64,
    array_locations: Vec<Location>,
    sinks: Vec<Vec<VirtualSink>>,
    walls: Vec<Wall>,
}

fn schema(path: String, message: impl Into<String>) -> Error {
    Error::Schema {
        path,
        message: message.into(),
    }
}

impl ChannelDatabase {
    /// Validates and assembles a database. Violations are reported as schema
    /// errors naming the offending field.
    pub fn new(
        wavelength: f64,
        array_locations: Vec<Location>,
        sinks: Vec<Vec<VirtualSink>>,
        walls: Vec<Wall>,
    ) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(schema("wavelength".into(), "must be positive and finite"));
        }
        if array_locations.is_empty() {
            return Err(schema(
                "arrayLocations".into(),
                "at least one antenna is required",
            ));
        }
        for (m, l) in array_locations.iter().enumerate() {
            if !l.is_finite() {
                return Err(schema(
                    format!("arrayLocations[{m}]"),
                    "coordinates must be finite",
                ));
            }
        }
        if sinks.len() != array_locations.len() {
            return Err(schema(
                "sinks".into(),
                format!(
                    "{} sink lists for {} antennas",
                    sinks.len(),
                    array_locations.len()
                ),
            ));
        }
        for (i, w) in walls.iter().enumerate() {
            Wall::new(w.a, w.b, w.reflection_coefficient)
                .map_err(|e| schema(format!("walls[{i}]"), e.to_string()))?;
        }
        for (m, per_antenna) in sinks.iter().enumerate() {
            let mut direct = 0;
            for (k, s) in per_antenna.iter().enumerate() {
                let at = |field: &str| format!("sinks[{m}][{k}].{field}");
                if s.antenna_index != m {
                    return Err(schema(at("antennaIndex"), format!("expected {m}")));
                }
                if !s.location.is_finite() {
                    return Err(schema(at("location"), "coordinates must be finite"));
                }
                if !s.gain.is_finite() {
                    return Err(schema(at("gainReal"), "gain must be finite"));
                }
                if let Some(&bad) = s.path.ids().iter().find(|&&id| id >= walls.len()) {
                    return Err(schema(
                        at("wallPath"),
                        format!("wall {bad} not in walls (len {})", walls.len()),
                    ));
                }
                if s.order() == 0 {
                    direct += 1;
                    if s.location != array_locations[m] || s.gain != Complex64::new(1.0, 0.0) {
                        return Err(schema(
                            format!("sinks[{m}][{k}]"),
                            "direct sink must sit on its antenna with gain 1",
                        ));
                    }
                }
            }
            if direct != 1 {
                return Err(schema(
                    format!("sinks[{m}]"),
                    format!("expected exactly one order-0 sink, found {direct}"),
                ));
            }
        }
        Ok(ChannelDatabase {
            wavelength,
            array_locations,
            sinks,
            walls,
        })
    }

    pub fn format_version(&self) -> u32 {
        FORMAT_VERSION
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn array_locations(&self) -> &[Location] {
        &self.array_locations
    }

    pub fn antenna_count(&self) -> usize {
        self.array_locations.len()
    }

    pub fn sinks(&self) -> &[Vec<VirtualSink>] {
        &self.sinks
    }

    /// Walls the sink paths refer to (provenance only).
    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn sink_counts(&self) -> Vec<usize> {
        self.sinks.iter().map(Vec::len).collect()
    }

    /// Environment made of the stored walls, for visibility evaluation.
    pub fn environment(&self) -> Result<Environment> {
        Environment::from_walls(self.walls.clone())
    }

    pub fn array(&self) -> Result<AntennaArray> {
        AntennaArray::new(self.array_locations.clone())
    }
}

/// Database holding every image of every antenna up to `max_order`.
pub fn build_db_from_environment(
    array: &AntennaArray,
    env: &Environment,
    max_order: usize,
    wavelength: f64,
) -> Result<ChannelDatabase> {
    ChannelDatabase::new(
        wavelength,
        array.locations().to_vec(),
        enumerate_virtual_sinks(array, env, max_order),
        env.walls.clone(),
    )
}
