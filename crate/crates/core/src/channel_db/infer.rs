//! Wall inference from pairs of estimated sources, and databases built from
//! the inferred walls.

use crate::error::{Error, Result};
use crate::estimation::{SearchRegion, SourceEstimate};
use crate::geometry::{distance, perpendicular_bisector, Environment, Location, Wall, WallLine};
use crate::propagation::{enumerate_virtual_sinks, AntennaArray};

use super::ChannelDatabase;

/// Inferred coefficients above this are rejected as implausible.
pub const MAX_INFERRED_COEFFICIENT: f64 = 1.5;

/// Minimum main/mirror separation.
pub const MIN_SOURCE_SEPARATION: f64 = 1e-6;

/// Inferred lines are clipped to the room bounds grown by this many
/// wavelengths, so a line estimated slightly outside the room still yields a
/// segment.
pub const CLIP_MARGIN_WAVELENGTHS: f64 = 0.25;

/// Antennas closer than this (in wavelengths) to an inferred wall line are
/// taken to be mounted on it, and the line is snapped through them.
pub const MOUNTED_WALL_TOLERANCE_WAVELENGTHS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallEstimate {
    pub line: WallLine,
    pub reflection_coefficient: f64,
    /// In `[0, 1]`; reporting only.
    pub confidence: f64,
}

impl WallEstimate {
    /// Sets the confidence to `1 / (1 + evm)` with `evm` the linear EVM of the
    /// estimate the wall came from.
    pub fn with_generating_evm(mut self, evm_db: f64) -> Self {
        let evm = 10f64.powf(evm_db / 20.0);
        self.confidence = if evm.is_finite() {
            1.0 / (1.0 + evm)
        } else {
            0.0
        };
        self
    }
}

/// How the amplitude ratio of a main/mirror pair becomes a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GainCompensation {
    /// The ratio is the coefficient; path loss already lives in the steering.
    #[default]
    None,
    /// Multiply by `(d_mirror / d_main)^exponent`, distances measured to
    /// `reference` (e.g. the array centroid). For steering conventions that
    /// leave path loss in the amplitudes.
    Distance { reference: Location, exponent: i32 },
}

/// Wall between a main source and one of its first-order images.
pub fn infer_wall(
    main: &SourceEstimate,
    mirror: &SourceEstimate,
    compensation: GainCompensation,
) -> Result<WallEstimate> {
    if distance(&main.location, &mirror.location) < MIN_SOURCE_SEPARATION {
        return Err(Error::DegeneratePair(format!(
            "main {} and mirror {} coincide",
            main.location, mirror.location
        )));
    }
    if main.amplitude.norm() == 0.0 || mirror.amplitude.norm() == 0.0 {
        return Err(Error::InvalidAmplitude(
            "main and mirror amplitudes must be non-zero".into(),
        ));
    }
    let line = perpendicular_bisector(&main.location, &mirror.location)?;
    let mut coefficient = (mirror.amplitude / main.amplitude).norm();
    if let GainCompensation::Distance {
        reference,
        exponent,
    } = compensation
    {
        let ratio = distance(&mirror.location, &reference) / distance(&main.location, &reference);
        coefficient *= ratio.powi(exponent);
    }
    if !(coefficient > 0.0 && coefficient <= MAX_INFERRED_COEFFICIENT) {
        return Err(Error::InvalidAmplitude(format!(
            "inferred reflection coefficient {coefficient} outside (0, {MAX_INFERRED_COEFFICIENT}]"
        )));
    }
    Ok(WallEstimate {
        line,
        reflection_coefficient: coefficient,
        confidence: 1.0,
    })
}

/// Pairs every estimated source with the main source and infers one wall per
/// pair. The main source is the strongest one inside `room`, falling back to
/// the strongest overall. Pairs that fail inference are dropped.
pub fn infer_walls(
    sources: &[SourceEstimate],
    room: &SearchRegion,
    compensation: GainCompensation,
) -> Vec<WallEstimate> {
    let strongest = |it: &mut dyn Iterator<Item = (usize, &SourceEstimate)>| {
        it.reduce(|a, b| {
            if b.1.amplitude.norm() > a.1.amplitude.norm() {
                b
            } else {
                a
            }
        })
        .map(|(i, _)| i)
    };
    let main = strongest(
        &mut sources
            .iter()
            .enumerate()
            .filter(|(_, s)| room.contains(&s.location)),
    )
    .or_else(|| strongest(&mut sources.iter().enumerate()));
    let Some(main) = main else {
        return Vec::new();
    };
    sources
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != main)
        .filter_map(|(_, s)| infer_wall(&sources[main], s, compensation).ok())
        .collect()
}

/// Segment of `line` inside `bounds`, or `None` when the line misses it.
pub fn clip_line_to_bounds(line: &WallLine, bounds: &SearchRegion) -> Option<(Location, Location)> {
    let p = line.point();
    let t = line.tangent();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (origin, dir, min, max) in [
        (p.x, t.x, bounds.x_min, bounds.x_max),
        (p.y, t.y, bounds.y_min, bounds.y_max),
    ] {
        if dir == 0.0 {
            if origin < min || origin > max {
                return None;
            }
        } else {
            let a = (min - origin) / dir;
            let b = (max - origin) / dir;
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
    }
    if hi - lo <= 0.0 {
        return None;
    }
    Some((p + t * lo, p + t * hi))
}

/// Moves `line` onto the antennas lying within `tolerance` of it: through the
/// two farthest-apart ones when there are several, through the single one
/// otherwise. Collinear mounted antennas then lie exactly on the result.
pub fn snap_to_mounted_antennas(line: &WallLine, array: &AntennaArray, tolerance: f64) -> WallLine {
    let mounted: Vec<&Location> = array
        .locations()
        .iter()
        .filter(|l| line.signed_distance(l).abs() <= tolerance)
        .collect();
    match mounted.as_slice() {
        [] => *line,
        [only] => WallLine::new(**only, line.unit_normal()).unwrap_or(*line),
        _ => {
            let mut best = (mounted[0], mounted[1], -1.0);
            for (i, a) in mounted.iter().enumerate() {
                for b in &mounted[i + 1..] {
                    let d = distance(a, b);
                    if d > best.2 {
                        best = (a, b, d);
                    }
                }
            }
            let (a, b, _) = best;
            let dir = *b - *a;
            WallLine::new(*a, Location::planar(-dir.y, dir.x)).unwrap_or(*line)
        }
    }
}

fn grown_room(room: &SearchRegion, wavelength: f64) -> Result<SearchRegion> {
    let margin = CLIP_MARGIN_WAVELENGTHS * wavelength;
    SearchRegion::new(
        room.x_min - margin,
        room.x_max + margin,
        room.y_min - margin,
        room.y_max + margin,
    )
}

fn wall_segment(
    w: &WallEstimate,
    array: &AntennaArray,
    grown: &SearchRegion,
    wavelength: f64,
) -> Option<(Location, Location)> {
    let line = snap_to_mounted_antennas(
        &w.line,
        array,
        MOUNTED_WALL_TOLERANCE_WAVELENGTHS * wavelength,
    );
    clip_line_to_bounds(&line, grown)
}

/// Database from inferred walls. Lines are snapped onto mounted antennas,
/// then clipped to the room bounds grown by [`CLIP_MARGIN_WAVELENGTHS`];
/// lines missing the room are skipped. Coefficients above 1 are capped at 1.
pub fn build_db_from_walls(
    array: &AntennaArray,
    walls: &[WallEstimate],
    room: &SearchRegion,
    max_order: usize,
    wavelength: f64,
) -> Result<ChannelDatabase> {
    let grown = grown_room(room, wavelength)?;
    let segments = walls
        .iter()
        .filter_map(|w| {
            wall_segment(w, array, &grown, wavelength)
                .map(|(a, b)| Wall::new(a, b, w.reflection_coefficient.min(1.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let env = Environment::new(segments, room.x_max, room.y_max)?;
    let sinks = enumerate_virtual_sinks(array, &env, max_order);
    ChannelDatabase::new(wavelength, array.locations().to_vec(), sinks, env.walls)
}
