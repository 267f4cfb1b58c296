//! Near-field steering, image enumeration and ground-truth channel synthesis.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, mirror_point, visibility, Environment, Location, WallPath};

/// Minimum source/receiver separation in wavelengths.
pub const STEERING_GUARD_WAVELENGTHS: f64 = 0.01;

/// Minimum pairwise antenna separation.
pub const MIN_ANTENNA_SEPARATION: f64 = 1e-6;

/// Amplitude law of the line-of-sight response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringMode {
    /// `exp(j 2 pi d / lambda) / (4 pi d / lambda)^2`.
    #[default]
    Paper,
    /// `exp(j 2 pi d / lambda) / (4 pi d / lambda)`, the free-space amplitude law.
    FreeSpace,
    /// `exp(j 2 pi d / lambda)` without path loss.
    PhaseOnly,
}

impl FromStr for SteeringMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(SteeringMode::Paper),
            "free_space" => Ok(SteeringMode::FreeSpace),
            "phase_only" => Ok(SteeringMode::PhaseOnly),
            other => Err(format!("unknown steering mode `{other}`")),
        }
    }
}

impl SteeringMode {
    /// Path-loss exponent applied to `4 pi d / lambda`.
    pub fn loss_exponent(self) -> i32 {
        match self {
            SteeringMode::Paper => 2,
            SteeringMode::FreeSpace => 1,
            SteeringMode::PhaseOnly => 0,
        }
    }
}

/// Line-of-sight response generator for one wavelength and amplitude law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steering {
    pub wavelength: f64,
    pub mode: SteeringMode,
}

impl Steering {
    pub fn new(wavelength: f64, mode: SteeringMode) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "wavelength {wavelength} must be positive"
            )));
        }
        Ok(Steering { wavelength, mode })
    }

    pub fn paper(wavelength: f64) -> Result<Self> {
        Steering::new(wavelength, SteeringMode::Paper)
    }

    pub fn guard(&self) -> f64 {
        self.wavelength * STEERING_GUARD_WAVELENGTHS
    }

    /// Response between `src` and `dst`. Fails inside the `lambda/100` guard.
    pub fn eval(&self, src: &Location, dst: &Location) -> Result<Complex64> {
        Ok(self.at_distance(distance_guarded(src, dst, self)?))
    }

    /// Response at a separation already known to respect the guard.
    #[inline]
    pub(crate) fn at_distance(&self, d: f64) -> Complex64 {
        let (s, c) = (2.0 * PI * d / self.wavelength).sin_cos();
        let scale = match self.mode {
            SteeringMode::Paper => {
                let a = 4.0 * PI * d / self.wavelength;
                1.0 / (a * a)
            }
            SteeringMode::FreeSpace => self.wavelength / (4.0 * PI * d),
            SteeringMode::PhaseOnly => 1.0,
        };
        Complex64::new(c * scale, s * scale)
    }
}

/// Distance between two points, failing inside the steering guard.
pub(crate) fn distance_guarded(a: &Location, b: &Location, steering: &Steering) -> Result<f64> {
    let d = distance(a, b);
    if d < steering.guard() {
        return Err(Error::TooClose {
            distance: d,
            guard: steering.guard(),
        });
    }
    Ok(d)
}

/// Shorthand for the default steering response.
pub fn steering(src: &Location, dst: &Location, wavelength: f64) -> Result<Complex64> {
    Steering::paper(wavelength)?.eval(src, dst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaArray {
    locations: Vec<Location>,
}

impl AntennaArray {
    pub fn new(locations: Vec<Location>) -> Result<Self> {
        if locations.is_empty() {
            return Err(Error::InvalidGeometry("antenna array is empty".into()));
        }
        if let Some(bad) = locations.iter().find(|l| !l.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "antenna at {bad} is not finite"
            )));
        }
        for (i, a) in locations.iter().enumerate() {
            for b in &locations[i + 1..] {
                if distance(a, b) < MIN_ANTENNA_SEPARATION {
                    return Err(Error::InvalidGeometry(format!(
                        "antennas at {a} and {b} coincide"
                    )));
                }
            }
        }
        Ok(AntennaArray { locations })
    }

    /// `count` antennas equally spaced along the rectangle boundary, starting
    /// at the corner `(0, 0)` and running counterclockwise.
    pub fn perimeter(width: f64, depth: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidGeometry(
                "antenna count must be positive".into(),
            ));
        }
        let perimeter = 2.0 * (width + depth);
        let pitch = perimeter / count as f64;
        // arc length where each edge starts; positions within a hair of a
        // corner are put exactly on it so edge coordinates stay exact
        let corners = [0.0, width, width + depth, 2.0 * width + depth, perimeter];
        let eps = 1e-9 * perimeter;
        let locations = (0..count)
            .map(|i| {
                let s = i as f64 * pitch;
                let edge = (0..4).rev().find(|&k| s >= corners[k] - eps).unwrap_or(0);
                let t = (s - corners[edge]).max(0.0);
                let t = if t <= eps { 0.0 } else { t };
                match edge {
                    0 => Location::planar(t, 0.0),
                    1 => Location::planar(width, t),
                    2 => Location::planar(width - t, depth),
                    _ => Location::planar(0.0, depth - t),
                }
            })
            .collect();
        AntennaArray::new(locations)
    }

    /// `count` antennas along the bottom wall starting at `(0, 0)`.
    pub fn linear(spacing: f64, count: usize) -> Result<Self> {
        AntennaArray::new(
            (0..count)
                .map(|i| Location::planar(i as f64 * spacing, 0.0))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }
}

/// An image of the transmitter. `amplitude` excludes the transmitter's own
/// complex amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualSource {
    pub location: Location,
    pub amplitude: Complex64,
    pub path: WallPath,
}

impl VirtualSource {
    pub fn order(&self) -> usize {
        self.path.order()
    }
}

/// An image of receive antenna `antenna_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualSink {
    pub antenna_index: usize,
    pub location: Location,
    pub gain: Complex64,
    pub path: WallPath,
}

impl VirtualSink {
    pub fn order(&self) -> usize {
        self.path.order()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmitter {
    pub location: Location,
    pub amplitude: Complex64,
}

impl Transmitter {
    pub fn new(location: Location, amplitude: Complex64) -> Result<Self> {
        if amplitude.norm() == 0.0 || !amplitude.is_finite() {
            return Err(Error::InvalidAmplitude(
                "transmitter amplitude must be finite and non-zero".into(),
            ));
        }
        Ok(Transmitter {
            location,
            amplitude,
        })
    }

    pub fn unit(location: Location) -> Self {
        Transmitter {
            location,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub coefficients: Vec<Complex64>,
    pub wavelength: f64,
}

impl ChannelVector {
    pub fn new(coefficients: Vec<Complex64>, wavelength: f64) -> Self {
        ChannelVector {
            coefficients,
            wavelength,
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coefficients)
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Images of `origin` up to `max_order` reflections, ascending order then
/// lexicographic wall path. Each entry is (location, reflection product, path).
fn enumerate_images(
    origin: &Location,
    env: &Environment,
    max_order: usize,
) -> Vec<(Location, f64, WallPath)> {
    let lines: Vec<_> = env.walls.iter().map(|w| w.line()).collect();
    let mut all = vec![(*origin, 1.0, WallPath::direct())];
    let mut frontier_start = 0;
    for _ in 0..max_order {
        let frontier_end = all.len();
        for i in frontier_start..frontier_end {
            let (loc, gain, path) = all[i].clone();
            for (id, wall) in env.walls.iter().enumerate() {
                if path.last() == Some(id) {
                    continue;
                }
                all.push((
                    mirror_point(&loc, &lines[id]),
                    gain * wall.reflection_coefficient,
                    path.extended(id),
                ));
            }
        }
        frontier_start = frontier_end;
    }
    all
}

/// The transmitter and all of its images up to `max_order` reflections.
pub fn enumerate_virtual_sources(
    tx: &Location,
    env: &Environment,
    max_order: usize,
) -> Vec<VirtualSource> {
    enumerate_images(tx, env, max_order)
        .into_iter()
        .map(|(location, gain, path)| VirtualSource {
            location,
            amplitude: Complex64::new(gain, 0.0),
            path,
        })
        .collect()
}

/// Per-antenna images of the receive array up to `max_order` reflections.
pub fn enumerate_virtual_sinks(
    array: &AntennaArray,
    env: &Environment,
    max_order: usize,
) -> Vec<Vec<VirtualSink>> {
    array
        .locations()
        .iter()
        .enumerate()
        .map(|(m, l)| {
            enumerate_images(l, env, max_order)
                .into_iter()
                .map(|(location, gain, path)| VirtualSink {
                    antenna_index: m,
                    location,
                    gain: Complex64::new(gain, 0.0),
                    path,
                })
                .collect()
        })
        .collect()
}

/// Source-form channel: every visible image contributes its steering response.
pub fn channel_from_sources(
    tx: &Transmitter,
    sources: &[VirtualSource],
    array: &AntennaArray,
    env: &Environment,
    steering: &Steering,
) -> Result<ChannelVector> {
    let mut coefficients = Vec::with_capacity(array.len());
    for antenna in array.locations() {
        let mut acc = Complex64::new(0.0, 0.0);
        for src in sources {
            if visibility(&src.location, &src.path, env, antenna)? {
                acc += src.amplitude * steering.eval(&src.location, antenna)?;
            }
        }
        coefficients.push(tx.amplitude * acc);
    }
    Ok(ChannelVector::new(coefficients, steering.wavelength))
}

/// Composite response of one antenna's sinks to a transmitter at `tx`.
pub fn sink_response(
    tx: &Location,
    sinks: &[VirtualSink],
    env: &Environment,
    steering: &Steering,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for sink in sinks {
        if visibility(&sink.location, &sink.path, env, tx)? {
            acc += sink.gain * steering.eval(tx, &sink.location)?;
        }
    }
    Ok(acc)
}

/// Sink-form channel built from per-antenna virtual sinks.
pub fn channel_from_sinks(
    tx: &Transmitter,
    sinks: &[Vec<VirtualSink>],
    env: &Environment,
    steering: &Steering,
) -> Result<ChannelVector> {
    let coefficients = sinks
        .iter()
        .map(|per_antenna| {
            Ok(tx.amplitude * sink_response(&tx.location, per_antenna, env, steering)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelVector::new(coefficients, steering.wavelength))
}
