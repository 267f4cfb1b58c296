//! Array responses to a candidate location and the correlation score built on
//! them. The coarse grid's responses can be tabulated once and reused across
//! snapshots that share the array, region and search parameters.

use num_complex::Complex64;
use rayon::prelude::*;

use super::search::{best_of, coarse_grid, refine, SearchParams, SearchRegion};
use super::CorrelationMode;
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, Environment, Location, WallLine};
use crate::propagation::{distance_guarded, norm, sink_response, Steering, VirtualSink};

pub(crate) trait ArrayResponse: Sync {
    fn antennas(&self) -> usize;

    /// Response of every antenna to a point emitter at `l`.
    fn fill(&self, l: &Location, out: &mut [Complex64]) -> Result<()>;

    fn response(&self, l: &Location) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.antennas()];
        self.fill(l, &mut out)?;
        Ok(out)
    }
}

/// Line-of-sight response `Str(l, l_m)`.
///
/// With `mounts`, antenna `m` does not see emitters strictly outside any of
/// the hull edges in `mounts[m]`: antennas mounted on a wall do not receive
/// that wall's own reflections.
pub(crate) struct PointResponse<'a> {
    pub antennas: &'a [Location],
    pub steering: Steering,
    pub mounts: Option<Vec<Vec<WallLine>>>,
}

impl<'a> PointResponse<'a> {
    pub fn new(antennas: &'a [Location], steering: Steering, mounted: bool) -> Self {
        PointResponse {
            antennas,
            steering,
            mounts: mounted.then(|| hull_mounts(antennas)),
        }
    }
}

/// For every antenna, the edges of the array's convex hull it lies on, as
/// lines with outward normals. Empty when the hull has no interior.
pub(crate) fn hull_mounts(antennas: &[Location]) -> Vec<Vec<WallLine>> {
    let hull = convex_hull(antennas);
    let mut mounts = vec![Vec::new(); antennas.len()];
    if hull.len() < 3 {
        return mounts;
    }
    for (i, a) in hull.iter().enumerate() {
        let b = hull[(i + 1) % hull.len()];
        let d = b - *a;
        let len2 = d.x * d.x + d.y * d.y;
        // counterclockwise hull: outward normal is the edge turned clockwise
        let Ok(line) = WallLine::new(*a, Location::planar(d.y, -d.x)) else {
            continue;
        };
        let tol = 1e-9 * len2.sqrt();
        for (m, p) in antennas.iter().enumerate() {
            let s = ((p.x - a.x) * d.x + (p.y - a.y) * d.y) / len2;
            if line.signed_distance(p).abs() <= tol && (-1e-9..=1.0 + 1e-9).contains(&s) {
                mounts[m].push(line);
            }
        }
    }
    mounts
}

impl ArrayResponse for PointResponse<'_> {
    fn antennas(&self) -> usize {
        self.antennas.len()
    }

    fn fill(&self, l: &Location, out: &mut [Complex64]) -> Result<()> {
        for (m, (o, a)) in out.iter_mut().zip(self.antennas).enumerate() {
            let d = distance_guarded(l, a, &self.steering)?;
            let hidden = self
                .mounts
                .as_ref()
                .is_some_and(|mounts| mounts[m].iter().any(|e| e.signed_distance(l) > 0.0));
            *o = if hidden {
                Complex64::new(0.0, 0.0)
            } else {
                self.steering.at_distance(d)
            };
        }
        Ok(())
    }
}

/// Composite response of each antenna's visible sinks.
pub(crate) struct SinkSetResponse<'a> {
    pub sinks: &'a [Vec<VirtualSink>],
    pub env: &'a Environment,
    pub steering: Steering,
}

impl ArrayResponse for SinkSetResponse<'_> {
    fn antennas(&self) -> usize {
        self.sinks.len()
    }

    fn fill(&self, l: &Location, out: &mut [Complex64]) -> Result<()> {
        for (o, per_antenna) in out.iter_mut().zip(self.sinks) {
            *o = sink_response(l, per_antenna, self.env, &self.steering)?;
        }
        Ok(())
    }
}

/// `sum_m r_m * conj(a_m)`.
#[inline]
pub(crate) fn correlate(r: &[Complex64], a: &[Complex64]) -> Complex64 {
    r.iter()
        .zip(a)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x * y.conj())
}

#[inline]
pub(crate) fn score(c: Complex64, response_norm: f64, mode: CorrelationMode) -> f64 {
    match mode {
        CorrelationMode::Raw => c.norm(),
        CorrelationMode::Normalized if response_norm > 0.0 => c.norm() / response_norm,
        CorrelationMode::Normalized => f64::NEG_INFINITY,
    }
}

/// Score at one location; inadmissible locations score `-inf`.
pub(crate) fn score_at<R: ArrayResponse>(
    model: &R,
    residual: &[Complex64],
    l: &Location,
    mode: CorrelationMode,
) -> f64 {
    match model.response(l) {
        Ok(a) => score(correlate(residual, &a), norm(&a), mode),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Responses at every coarse node, row-major by node.
pub(crate) struct CoarseTable {
    nodes: Vec<Location>,
    responses: Vec<Complex64>,
    norms: Vec<f64>,
    antennas: usize,
}

impl CoarseTable {
    pub fn build<R: ArrayResponse>(
        model: &R,
        region: &SearchRegion,
        params: &SearchParams,
    ) -> Result<Self> {
        region.validate()?;
        params.validate()?;
        let nodes = coarse_grid(region, params.coarse_step);
        let m = model.antennas();
        let mut responses = vec![Complex64::new(0.0, 0.0); nodes.len() * m];
        let norms: Vec<f64> = responses
            .par_chunks_mut(m)
            .zip(nodes.par_iter())
            .map(|(row, l)| match model.fill(l, row) {
                Ok(()) => norm(row),
                Err(_) => f64::NAN,
            })
            .collect();
        Ok(CoarseTable {
            nodes,
            responses,
            norms,
            antennas: m,
        })
    }

    fn scores(&self, residual: &[Complex64], mode: CorrelationMode) -> Vec<f64> {
        self.responses
            .par_chunks(self.antennas)
            .zip(self.norms.par_iter())
            .map(|(row, &n)| {
                if n.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    score(correlate(residual, row), n, mode)
                }
            })
            .collect()
    }
}

/// Peak search of the correlation score against `residual`, optionally using
/// a tabulated coarse grid. Both paths score identically.
pub(crate) fn peak_search<R: ArrayResponse>(
    model: &R,
    residual: &[Complex64],
    region: &SearchRegion,
    params: &SearchParams,
    mode: CorrelationMode,
    table: Option<&CoarseTable>,
) -> Result<(Location, f64)> {
    let objective = |l: &Location| score_at(model, residual, l, mode);
    match table {
        Some(t) => {
            let scores = t.scores(residual, mode);
            let start = best_of(&t.nodes, &scores).ok_or(Error::NoCandidate)?;
            Ok(refine(&objective, region, params, start))
        }
        None => super::search::search_with_value(&objective, region, params),
    }
}
