use num_complex::Complex64;

use super::noise::NoisyChannel;
use super::response::{correlate, peak_search, ArrayResponse, CoarseTable, PointResponse};
use super::search::{SearchParams, SearchRegion};
use super::{AmplitudeMode, EstimatorOptions};
use crate::error::{Error, Result};
use crate::geometry::Location;
use crate::propagation::{norm, AntennaArray, ChannelVector, Steering, SteeringMode};

/// One located virtual transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceEstimate {
    pub location: Location,
    pub amplitude: Complex64,
    /// Search score at the returned location.
    pub peak_metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultisourceResult {
    pub sources: Vec<SourceEstimate>,
    pub reconstructed: ChannelVector,
    pub warnings: Vec<String>,
}

impl MultisourceResult {
    /// The source with the largest amplitude magnitude.
    pub fn strongest(&self) -> Option<&SourceEstimate> {
        self.sources.iter().reduce(|a, b| {
            if b.amplitude.norm() > a.amplitude.norm() {
                b
            } else {
                a
            }
        })
    }
}

/// Raw correlation magnitude `|sum_m h_m conj(Str(l, l_m))|`.
pub fn multisource_objective(
    l: &Location,
    h: &NoisyChannel,
    array: &AntennaArray,
    mode: SteeringMode,
) -> Result<f64> {
    check_len(h, array.len())?;
    let model = PointResponse::new(array.locations(), Steering::new(h.wavelength, mode)?, false);
    Ok(correlate(&h.coefficients, &model.response(l)?).norm())
}

pub(crate) fn check_len(h: &NoisyChannel, m: usize) -> Result<()> {
    if h.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            found: h.len(),
        });
    }
    Ok(())
}

pub(crate) fn amplitude(c: Complex64, response: &[Complex64], mode: AmplitudeMode) -> Complex64 {
    match mode {
        AmplitudeMode::Paper => c / response.len() as f64,
        AmplitudeMode::Ls => {
            let e = norm(response);
            c / (e * e)
        }
    }
}

/// Successive-cancellation multisource estimator bound to one array, search
/// region and parameter set.
pub struct MultisourceEstimator<'a> {
    model: PointResponse<'a>,
    region: SearchRegion,
    params: SearchParams,
    options: EstimatorOptions,
    table: Option<CoarseTable>,
}

impl<'a> MultisourceEstimator<'a> {
    pub fn new(
        array: &'a AntennaArray,
        wavelength: f64,
        region: SearchRegion,
        params: SearchParams,
        options: EstimatorOptions,
    ) -> Result<Self> {
        region.validate()?;
        params.validate()?;
        Ok(MultisourceEstimator {
            model: PointResponse::new(
                array.locations(),
                Steering::new(wavelength, options.steering)?,
                options.mounted_array,
            ),
            region,
            params,
            options,
            table: None,
        })
    }

    /// Tabulates the coarse-grid responses so repeated estimates skip the
    /// steering evaluations of the coarse pass. Uses `nodes x M` complex values.
    pub fn with_coarse_table(mut self) -> Result<Self> {
        self.table = Some(CoarseTable::build(&self.model, &self.region, &self.params)?);
        Ok(self)
    }

    /// Strongest peak of `residual` and its amplitude.
    fn locate(&self, residual: &[Complex64]) -> Result<(SourceEstimate, Vec<Complex64>)> {
        let (location, peak_metric) = peak_search(
            &self.model,
            residual,
            &self.region,
            &self.params,
            self.options.correlation,
            self.table.as_ref(),
        )?;
        let a = self.model.response(&location)?;
        let amplitude = amplitude(correlate(residual, &a), &a, self.options.amplitude);
        Ok((
            SourceEstimate {
                location,
                amplitude,
                peak_metric,
            },
            a,
        ))
    }

    /// Cyclic re-estimation: each source is searched again on the snapshot
    /// with every other source subtracted, for up to `relax_rounds` passes or
    /// until no location moves.
    fn relax(
        &self,
        h: &[Complex64],
        sources: &mut [SourceEstimate],
        responses: &mut [Vec<Complex64>],
    ) -> Result<()> {
        for _ in 0..self.options.relax_rounds {
            let mut moved = false;
            for i in 0..sources.len() {
                let mut others = h.to_vec();
                for (j, (s, a)) in sources.iter().zip(responses.iter()).enumerate() {
                    if j != i {
                        subtract(&mut others, s.amplitude, a);
                    }
                }
                let (source, a) = self.locate(&others)?;
                moved |= source.location != sources[i].location;
                sources[i] = source;
                responses[i] = a;
            }
            if !moved {
                break;
            }
        }
        Ok(())
    }

    pub fn estimate(&self, h: &NoisyChannel, k: usize) -> Result<MultisourceResult> {
        let m = self.model.antennas();
        check_len(h, m)?;
        if h.wavelength != self.model.steering.wavelength {
            return Err(Error::config(
                "wavelength",
                format!(
                    "snapshot wavelength {} differs from estimator wavelength {}",
                    h.wavelength, self.model.steering.wavelength
                ),
            ));
        }
        let mut warnings = Vec::new();
        if k > m {
            warnings.push(format!("K = {k} exceeds the antenna count M = {m}"));
        }

        let mut residual = h.coefficients.clone();
        let mut sources = Vec::with_capacity(k);
        let mut responses = Vec::with_capacity(k);
        for _ in 0..k {
            let (source, a) = self.locate(&residual)?;
            subtract(&mut residual, source.amplitude, &a);
            sources.push(source);
            responses.push(a);
            if sources.len() > 1 {
                self.relax(&h.coefficients, &mut sources, &mut responses)?;
                residual = h.coefficients.clone();
                for (s, a) in sources.iter().zip(&responses) {
                    subtract(&mut residual, s.amplitude, a);
                }
            }
        }

        if self.options.joint_refit && !sources.is_empty() {
            if let Some(g) = joint_least_squares(&responses, &h.coefficients) {
                for (s, g) in sources.iter_mut().zip(g) {
                    s.amplitude = g;
                }
            } else {
                warnings.push("joint refit skipped: singular response matrix".into());
            }
        }

        let mut coefficients = vec![Complex64::new(0.0, 0.0); m];
        for (s, a) in sources.iter().zip(&responses) {
            for (c, x) in coefficients.iter_mut().zip(a) {
                *c += s.amplitude * x;
            }
        }
        Ok(MultisourceResult {
            sources,
            reconstructed: ChannelVector::new(coefficients, h.wavelength),
            warnings,
        })
    }
}

fn subtract(residual: &mut [Complex64], g: Complex64, a: &[Complex64]) {
    for (r, x) in residual.iter_mut().zip(a) {
        *r -= g * x;
    }
}

/// One-shot multisource estimate (no coarse table).
pub fn estimate_multisource(
    h: &NoisyChannel,
    array: &AntennaArray,
    k: usize,
    region: &SearchRegion,
    params: &SearchParams,
    options: &EstimatorOptions,
) -> Result<MultisourceResult> {
    MultisourceEstimator::new(array, h.wavelength, *region, *params, *options)?.estimate(h, k)
}

/// Solves `(A^H A) g = A^H h` by Gaussian elimination with partial pivoting.
fn joint_least_squares(columns: &[Vec<Complex64>], h: &[Complex64]) -> Option<Vec<Complex64>> {
    let k = columns.len();
    let mut a = vec![vec![Complex64::new(0.0, 0.0); k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = correlate(&columns[j], &columns[i]);
        }
        a[i][k] = correlate(h, &columns[i]);
    }
    let scale = (0..k).map(|i| a[i][i].norm()).fold(0.0, f64::max);
    for col in 0..k {
        let pivot = (col..k).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))?;
        if a[pivot][col].norm() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (x, v) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * v;
            }
        }
    }
    let mut g = vec![Complex64::new(0.0, 0.0); k];
    for i in (0..k).rev() {
        let mut acc = a[i][k];
        for j in i + 1..k {
            acc -= a[i][j] * g[j];
        }
        g[i] = acc / a[i][i];
    }
    Some(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance, Environment};
    use crate::propagation::{channel_from_sources, enumerate_virtual_sources, Transmitter};

    fn noiseless(h: ChannelVector) -> NoisyChannel {
        NoisyChannel::observed(h.coefficients, h.wavelength)
    }

    fn ls() -> EstimatorOptions {
        EstimatorOptions::default()
    }

    #[test]
    fn k_zero_gives_empty_estimate() {
        let array = AntennaArray::perimeter(6.4, 6.4, 16).unwrap();
        let h = NoisyChannel::observed(vec![Complex64::new(1.0, 0.0); 16], 0.2);
        let r = estimate_multisource(
            &h,
            &array,
            0,
            &SearchRegion::room(6.4, 6.4),
            &SearchParams::for_wavelength(0.2),
            &ls(),
        )
        .unwrap();
        assert!(r.sources.is_empty());
        assert!(r.reconstructed.coefficients.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn objective_examples() {
        let array = AntennaArray::perimeter(6.4, 6.4, 64).unwrap();
        let st = Steering::paper(0.2).unwrap();
        let p = Location::planar(2.2, 3.7);
        let h: Vec<_> = array
            .locations()
            .iter()
            .map(|l| st.eval(&p, l).unwrap())
            .collect();
        let peak: f64 = h.iter().map(|c| c.norm_sqr()).sum();
        let nc = NoisyChannel::observed(h, 0.2);
        let v = multisource_objective(&p, &nc, &array, SteeringMode::Paper).unwrap();
        assert!((v - peak).abs() <= 1e-12 * peak);

        let zero = NoisyChannel::observed(vec![Complex64::new(0.0, 0.0); 64], 0.2);
        assert_eq!(
            multisource_objective(&p, &zero, &array, SteeringMode::Paper).unwrap(),
            0.0
        );

        let on_antenna = array.locations()[3];
        assert!(matches!(
            multisource_objective(&on_antenna, &nc, &array, SteeringMode::Paper),
            Err(Error::TooClose { .. })
        ));
    }

    #[test]
    fn single_free_space_source() {
        let array = AntennaArray::perimeter(6.4, 6.4, 64).unwrap();
        let env = Environment::new(Vec::new(), 6.4, 6.4).unwrap();
        let st = Steering::paper(0.2).unwrap();
        let tx =
            Transmitter::new(Location::planar(2.3171, 4.0113), Complex64::new(0.6, 0.8)).unwrap();
        let srcs = enumerate_virtual_sources(&tx.location, &env, 0);
        let h = channel_from_sources(&tx, &srcs, &array, &env, &st).unwrap();
        let params = SearchParams::for_wavelength(0.2);
        let r = estimate_multisource(
            &noiseless(h),
            &array,
            1,
            &SearchRegion::room(6.4, 6.4),
            &params,
            &ls(),
        )
        .unwrap();
        let s = &r.sources[0];
        assert!(distance(&s.location, &tx.location) <= params.final_step * 2f64.sqrt());
        assert!((s.amplitude - tx.amplitude).norm() / tx.amplitude.norm() <= 0.05);
    }

    #[test]
    fn residual_is_orthogonal_after_each_step() {
        let array = AntennaArray::perimeter(6.4, 6.4, 64).unwrap();
        let env = Environment::rectangular_room(6.4, 6.4, 1.0).unwrap();
        let st = Steering::paper(0.2).unwrap();
        let tx = Transmitter::unit(Location::planar(1.7, 2.9));
        let srcs = enumerate_virtual_sources(&tx.location, &env, 1);
        let h = channel_from_sources(&tx, &srcs, &array, &env, &st).unwrap();
        let params = SearchParams::for_wavelength(0.2);
        let region = SearchRegion::with_first_order_images(6.4, 6.4);
        let est = MultisourceEstimator::new(&array, 0.2, region, params, ls()).unwrap();
        let r = est.estimate(&noiseless(h.clone()), 3).unwrap();
        // replay the greedy steps and check orthogonality of each residual
        let mut residual = h.coefficients.clone();
        for s in &r.sources {
            let a = est.model.response(&s.location).unwrap();
            for (x, y) in residual.iter_mut().zip(&a) {
                *x -= s.amplitude * y;
            }
            let c = correlate(&residual, &a).norm();
            assert!(c <= 1e-9 * norm(&residual) * norm(&a), "{c}");
        }
    }

    #[test]
    fn table_and_direct_paths_agree() {
        let array = AntennaArray::perimeter(6.4, 6.4, 16).unwrap();
        let env = Environment::rectangular_room(6.4, 6.4, 1.0).unwrap();
        let st = Steering::paper(0.2).unwrap();
        let tx = Transmitter::unit(Location::planar(4.1, 1.9));
        let h = channel_from_sources(
            &tx,
            &enumerate_virtual_sources(&tx.location, &env, 1),
            &array,
            &env,
            &st,
        )
        .unwrap();
        let params = SearchParams::for_wavelength(0.2);
        let region = SearchRegion::with_first_order_images(6.4, 6.4);
        let plain = MultisourceEstimator::new(&array, 0.2, region, params, ls()).unwrap();
        let cached = MultisourceEstimator::new(&array, 0.2, region, params, ls())
            .unwrap()
            .with_coarse_table()
            .unwrap();
        let n = noiseless(h);
        assert_eq!(
            plain.estimate(&n, 5).unwrap(),
            cached.estimate(&n, 5).unwrap()
        );
    }

    #[test]
    fn joint_refit_recovers_amplitudes_at_known_locations() {
        let array = AntennaArray::perimeter(6.4, 6.4, 64).unwrap();
        let st = Steering::paper(0.2).unwrap();
        let locs = [
            Location::planar(1.0, 1.0),
            Location::planar(-1.0, 1.0),
            Location::planar(1.0, -1.0),
        ];
        let gains = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.2),
            Complex64::new(-0.3, 0.7),
        ];
        let cols: Vec<Vec<Complex64>> = locs
            .iter()
            .map(|p| {
                array
                    .locations()
                    .iter()
                    .map(|l| st.eval(p, l).unwrap())
                    .collect()
            })
            .collect();
        let h: Vec<Complex64> = (0..64)
            .map(|m| (0..3).map(|k| gains[k] * cols[k][m]).sum())
            .collect();
        let g = joint_least_squares(&cols, &h).unwrap();
        for (a, b) in g.iter().zip(&gains) {
            assert!((a - b).norm() < 1e-9);
        }
        assert!(joint_least_squares(&[cols[0].clone(), cols[0].clone()], &h).is_none());
    }
}
