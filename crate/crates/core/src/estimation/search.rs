//! Coarse-to-fine grid search for the maximum of a planar objective.
//!
//! The coarse grid is anchored at the region's minimum corner. Each zoom round
//! re-grids `±zoom_window_radius` old cells around the incumbent with the step
//! divided by `step_shrink`, clipped to the region, until the step reaches the
//! final resolution. Ties go to the smallest `x`, then the smallest `y`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Location;

const STEP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl SearchRegion {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let r = SearchRegion {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::EmptyRegion(format!(
                "[{}, {}] x [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        Ok(())
    }

    /// The multisource region `[-W, 2W] x [-D, 2D]`, which holds the room and
    /// every first-order image.
    pub fn with_first_order_images(width: f64, depth: f64) -> Self {
        SearchRegion {
            x_min: -width,
            x_max: 2.0 * width,
            y_min: -depth,
            y_max: 2.0 * depth,
        }
    }

    /// The room itself, `[0, W] x [0, D]`.
    pub fn room(width: f64, depth: f64) -> Self {
        SearchRegion {
            x_min: 0.0,
            x_max: width,
            y_min: 0.0,
            y_max: depth,
        }
    }

    pub fn contains(&self, l: &Location) -> bool {
        (self.x_min..=self.x_max).contains(&l.x) && (self.y_min..=self.y_max).contains(&l.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub coarse_step: f64,
    pub final_step: f64,
    pub zoom_window_radius: usize,
    pub step_shrink: f64,
}

impl SearchParams {
    /// `lambda/4` coarse grid zoomed by halving down to `lambda/64`.
    pub fn for_wavelength(wavelength: f64) -> Self {
        SearchParams {
            coarse_step: wavelength / 4.0,
            final_step: wavelength / 64.0,
            zoom_window_radius: 2,
            step_shrink: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.final_step > 0.0 && self.final_step <= self.coarse_step)
            || !self.coarse_step.is_finite()
        {
            return Err(Error::config(
                "search",
                format!(
                    "need 0 < final step ({}) <= coarse step ({})",
                    self.final_step, self.coarse_step
                ),
            ));
        }
        if self.zoom_window_radius < 1 {
            return Err(Error::config("search", "zoom window radius must be >= 1"));
        }
        if !(self.step_shrink > 1.0 && self.step_shrink.is_finite()) {
            return Err(Error::config("search", "step shrink factor must exceed 1"));
        }
        Ok(())
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + STEP_EPS).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
    if *v.last().unwrap() < hi - STEP_EPS * step {
        v.push(hi);
    }
    v
}

/// Coarse grid nodes in evaluation order (x-major, ascending).
pub fn coarse_grid(region: &SearchRegion, step: f64) -> Vec<Location> {
    let xs = axis(region.x_min, region.x_max, step);
    let ys = axis(region.y_min, region.y_max, step);
    xs.iter()
        .flat_map(|&x| ys.iter().map(move |&y| Location::planar(x, y)))
        .collect()
}

fn zoom_axis(center: f64, half_width: f64, step: f64, lo: f64, hi: f64) -> Vec<f64> {
    let j_max = (half_width / step + STEP_EPS).floor() as i64;
    (-j_max..=j_max)
        .map(|j| center + j as f64 * step)
        .filter(|v| (lo..=hi).contains(v))
        .collect()
}

fn beats(candidate: (f64, &Location), incumbent: (f64, &Location)) -> bool {
    candidate.0 > incumbent.0
        || (candidate.0 == incumbent.0
            && (candidate.1.x, candidate.1.y) < (incumbent.1.x, incumbent.1.y))
}

/// Best finite-scoring node with the deterministic tie rule.
pub(crate) fn best_of(nodes: &[Location], scores: &[f64]) -> Option<(Location, f64)> {
    let mut best: Option<(Location, f64)> = None;
    for (l, &s) in nodes.iter().zip(scores) {
        if !s.is_finite() {
            continue;
        }
        match &best {
            Some((bl, bs)) if !beats((s, l), (*bs, bl)) => {}
            _ => best = Some((*l, s)),
        }
    }
    best
}

/// Zoom rounds starting from a coarse incumbent.
pub(crate) fn refine<F>(
    objective: &F,
    region: &SearchRegion,
    params: &SearchParams,
    start: (Location, f64),
) -> (Location, f64)
where
    F: Fn(&Location) -> f64 + Sync,
{
    let (mut incumbent, mut value) = start;
    let mut step = params.coarse_step;
    while step > params.final_step * (1.0 + STEP_EPS) {
        let next = step / params.step_shrink;
        let half = params.zoom_window_radius as f64 * step;
        let xs = zoom_axis(incumbent.x, half, next, region.x_min, region.x_max);
        let ys = zoom_axis(incumbent.y, half, next, region.y_min, region.y_max);
        let nodes: Vec<Location> = xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| Location::planar(x, y)))
            .collect();
        let scores: Vec<f64> = nodes.iter().map(objective).collect();
        if let Some(best) = best_of(&nodes, &scores) {
            (incumbent, value) = best;
        }
        step = next;
    }
    (incumbent, value)
}

/// Location of the objective's maximum over the region. Non-finite objective
/// values mark inadmissible candidates and are skipped.
pub fn grid_peak_search<F>(
    objective: F,
    region: &SearchRegion,
    params: &SearchParams,
) -> Result<Location>
where
    F: Fn(&Location) -> f64 + Sync,
{
    search_with_value(&objective, region, params).map(|(l, _)| l)
}

pub(crate) fn search_with_value<F>(
    objective: &F,
    region: &SearchRegion,
    params: &SearchParams,
) -> Result<(Location, f64)>
where
    F: Fn(&Location) -> f64 + Sync,
{
    region.validate()?;
    params.validate()?;
    let nodes = coarse_grid(region, params.coarse_step);
    let scores: Vec<f64> = nodes.par_iter().map(objective).collect();
    let start = best_of(&nodes, &scores).ok_or(Error::NoCandidate)?;
    Ok(refine(objective, region, params, start))
}
