//! JSON snapshot file: one antenna-domain channel observation, optionally
//! with the true channel it was derived from.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel_db::io::{parse_json, schema_error};
use crate::error::{Error, Result};
use crate::estimation::NoisyChannel;
use crate::geometry::Location;
use crate::propagation::ChannelVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub wavelength: f64,
    pub array_locations: Vec<Location>,
    pub coefficients: Vec<Complex64>,
    /// Noise-free channel, when known; enables EVM reporting.
    pub truth: Option<Vec<Complex64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct SnapshotFile {
    wavelength: f64,
    array_locations: Vec<Location>,
    coefficients: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth: Option<Vec<[f64; 2]>>,
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn complexes(field: &str, v: &[[f64; 2]]) -> Result<Vec<Complex64>> {
    v.iter()
        .enumerate()
        .map(|(i, &[re, im])| {
            let c = Complex64::new(re, im);
            if c.is_finite() {
                Ok(c)
            } else {
                Err(Error::Schema {
                    path: format!("{field}[{i}]"),
                    message: "must be finite".into(),
                })
            }
        })
        .collect()
}

impl Snapshot {
    pub fn observation(&self) -> NoisyChannel {
        NoisyChannel::observed(self.coefficients.clone(), self.wavelength)
    }

    pub fn truth_channel(&self) -> Option<ChannelVector> {
        self.truth
            .as_ref()
            .map(|t| ChannelVector::new(t.clone(), self.wavelength))
    }
}

pub fn serialize_snapshot(s: &Snapshot) -> Vec<u8> {
    let file = SnapshotFile {
        wavelength: s.wavelength,
        array_locations: s.array_locations.clone(),
        coefficients: pairs(&s.coefficients),
        truth: s.truth.as_deref().map(pairs),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("snapshot values are finite");
    out.push(b'\n');
    out
}

pub fn deserialize_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    let value = parse_json(bytes)?;
    let file: SnapshotFile = serde_path_to_error::deserialize(value).map_err(schema_error)?;
    let schema = |path: &str, message: String| Error::Schema {
        path: path.into(),
        message,
    };
    if !(file.wavelength > 0.0 && file.wavelength.is_finite()) {
        return Err(schema("wavelength", "must be positive and finite".into()));
    }
    if file.array_locations.is_empty() {
        return Err(schema(
            "arrayLocations",
            "at least one antenna is required".into(),
        ));
    }
    if let Some(i) = file.array_locations.iter().position(|l| !l.is_finite()) {
        return Err(schema(
            &format!("arrayLocations[{i}]"),
            "coordinates must be finite".into(),
        ));
    }
    let m = file.array_locations.len();
    if file.coefficients.len() != m {
        return Err(schema(
            "coefficients",
            format!("{} coefficients for {m} antennas", file.coefficients.len()),
        ));
    }
    let coefficients = complexes("coefficients", &file.coefficients)?;
    let truth = match file.truth {
        Some(t) if t.len() != m => {
            return Err(schema(
                "truth",
                format!("{} coefficients for {m} antennas", t.len()),
            ));
        }
        Some(t) => Some(complexes("truth", &t)?),
        None => None,
    };
    Ok(Snapshot {
        wavelength: file.wavelength,
        array_locations: file.array_locations,
        coefficients,
        truth,
    })
}
