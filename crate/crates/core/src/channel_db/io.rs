//! JSON database file. Numbers are written in the shortest form that parses
//! back to the same double, so a round trip is bit-exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ChannelDatabase, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::geometry::{Location, Wall, WallPath};
use crate::propagation::VirtualSink;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct DbFile {
    format_version: u32,
    wavelength: f64,
    array_locations: Vec<Location>,
    walls: Vec<WallRecord>,
    sinks: Vec<Vec<SinkRecord>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct WallRecord {
    a: Location,
    b: Location,
    reflection_coefficient: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct SinkRecord {
    order: usize,
    wall_path: Vec<usize>,
    location: Location,
    gain_real: f64,
    gain_imag: f64,
}

pub fn serialize_db(db: &ChannelDatabase) -> Vec<u8> {
    let file = DbFile {
        format_version: FORMAT_VERSION,
        wavelength: db.wavelength(),
        array_locations: db.array_locations().to_vec(),
        walls: db
            .walls()
            .iter()
            .map(|w| WallRecord {
                a: w.a,
                b: w.b,
                reflection_coefficient: w.reflection_coefficient,
            })
            .collect(),
        sinks: db
            .sinks()
            .iter()
            .map(|per| {
                per.iter()
                    .map(|s| SinkRecord {
                        order: s.order(),
                        wall_path: s.path.ids().to_vec(),
                        location: s.location,
                        gain_real: s.gain.re,
                        gain_imag: s.gain.im,
                    })
                    .collect()
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("database values are finite");
    out.push(b'\n');
    out
}

pub(crate) fn schema_error<E: std::fmt::Display>(err: serde_path_to_error::Error<E>) -> Error {
    let path = err.path().to_string();
    Error::Schema {
        path: if path == "." { "<root>".into() } else { path },
        message: err.into_inner().to_string(),
    }
}

/// Parses a JSON value, mapping syntax errors to a schema error at the root.
pub(crate) fn parse_json(bytes: &[u8]) -> Result<serde_json::Value> {
    serde_json::from_slice(bytes).map_err(|e| Error::Schema {
        path: "<root>".into(),
        message: e.to_string(),
    })
}

pub fn deserialize_db(bytes: &[u8]) -> Result<ChannelDatabase> {
    let value = parse_json(bytes)?;
    match value.get("formatVersion") {
        Some(v) => match v.as_i64() {
            Some(n) if n == FORMAT_VERSION as i64 => {}
            Some(n) => {
                return Err(Error::Version {
                    found: n,
                    expected: FORMAT_VERSION,
                })
            }
            None => {
                return Err(Error::Schema {
                    path: "formatVersion".into(),
                    message: "must be an integer".into(),
                })
            }
        },
        None => {
            return Err(Error::Schema {
                path: "formatVersion".into(),
                message: "missing field".into(),
            })
        }
    }
    let file: DbFile = serde_path_to_error::deserialize(value).map_err(schema_error)?;

    let walls = file
        .walls
        .iter()
        .enumerate()
        .map(|(i, w)| {
            Wall::new(w.a, w.b, w.reflection_coefficient).map_err(|e| Error::Schema {
                path: format!("walls[{i}]"),
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sinks = Vec::with_capacity(file.sinks.len());
    for (m, per) in file.sinks.into_iter().enumerate() {
        let mut list = Vec::with_capacity(per.len());
        for (k, s) in per.into_iter().enumerate() {
            let at = |field: &str| format!("sinks[{m}][{k}].{field}");
            if s.order != s.wall_path.len() {
                return Err(Error::Schema {
                    path: at("order"),
                    message: format!(
                        "order {} but wallPath has {} walls",
                        s.order,
                        s.wall_path.len()
                    ),
                });
            }
            let path = WallPath::new(s.wall_path).map_err(|e| Error::Schema {
                path: at("wallPath"),
                message: e.to_string(),
            })?;
            list.push(VirtualSink {
                antenna_index: m,
                location: s.location,
                gain: Complex64::new(s.gain_real, s.gain_imag),
                path,
            });
        }
        sinks.push(list);
    }
    ChannelDatabase::new(file.wavelength, file.array_locations, sinks, walls)
}
