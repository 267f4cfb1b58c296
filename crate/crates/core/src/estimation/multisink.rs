use num_complex::Complex64;

use super::multisource::{amplitude, check_len};
use super::noise::NoisyChannel;
use super::response::{correlate, peak_search, ArrayResponse, CoarseTable, SinkSetResponse};
use super::search::{SearchParams, SearchRegion};
use super::EstimatorOptions;
use crate::channel_db::ChannelDatabase;
use crate::error::{Error, Result};
use crate::geometry::{Environment, Location};
use crate::propagation::{ChannelVector, Steering, SteeringMode};

/// User location and amplitude: the only free parameters of the multisink model.
#[derive(Debug, Clone, PartialEq)]
pub struct MultisinkResult {
    pub user_location: Location,
    pub user_amplitude: Complex64,
    pub peak_metric: f64,
    pub reconstructed: ChannelVector,
}

/// Raw correlation of the snapshot with the database's composite response at
/// `tx`.
pub fn multisink_objective(
    tx: &Location,
    h: &NoisyChannel,
    db: &ChannelDatabase,
    mode: SteeringMode,
) -> Result<f64> {
    check_len(h, db.antenna_count())?;
    let env = db.environment()?;
    let model = SinkSetResponse {
        sinks: db.sinks(),
        env: &env,
        steering: Steering::new(db.wavelength(), mode)?,
    };
    Ok(correlate(&h.coefficients, &model.response(tx)?).norm())
}

/// Database-assisted estimator bound to one database and search region.
pub struct MultisinkEstimator<'a> {
    db: &'a ChannelDatabase,
    env: Environment,
    region: SearchRegion,
    params: SearchParams,
    options: EstimatorOptions,
    table: Option<CoarseTable>,
}

impl<'a> MultisinkEstimator<'a> {
    pub fn new(
        db: &'a ChannelDatabase,
        region: SearchRegion,
        params: SearchParams,
        options: EstimatorOptions,
    ) -> Result<Self> {
        if db.antenna_count() == 0 || db.sinks().iter().all(|s| s.is_empty()) {
            return Err(Error::EmptyDatabase);
        }
        region.validate()?;
        params.validate()?;
        Steering::new(db.wavelength(), options.steering)?;
        Ok(MultisinkEstimator {
            env: db.environment()?,
            db,
            region,
            params,
            options,
            table: None,
        })
    }

    fn model(&self) -> SinkSetResponse<'_> {
        SinkSetResponse {
            sinks: self.db.sinks(),
            env: &self.env,
            steering: Steering {
                wavelength: self.db.wavelength(),
                mode: self.options.steering,
            },
        }
    }

    pub fn with_coarse_table(mut self) -> Result<Self> {
        let table = CoarseTable::build(&self.model(), &self.region, &self.params)?;
        self.table = Some(table);
        Ok(self)
    }

    pub fn estimate(&self, h: &NoisyChannel) -> Result<MultisinkResult> {
        check_len(h, self.db.antenna_count())?;
        if h.wavelength != self.db.wavelength() {
            return Err(Error::config(
                "wavelength",
                format!(
                    "snapshot wavelength {} differs from database wavelength {}",
                    h.wavelength,
                    self.db.wavelength()
                ),
            ));
        }
        let model = self.model();
        let (user_location, peak_metric) = peak_search(
            &model,
            &h.coefficients,
            &self.region,
            &self.params,
            self.options.correlation,
            self.table.as_ref(),
        )?;
        let a = model.response(&user_location)?;
        let g = amplitude(correlate(&h.coefficients, &a), &a, self.options.amplitude);
        Ok(MultisinkResult {
            user_location,
            user_amplitude: g,
            peak_metric,
            reconstructed: ChannelVector::new(a.iter().map(|x| g * x).collect(), h.wavelength),
        })
    }
}

/// One-shot multisink estimate (no coarse table).
pub fn estimate_multisink(
    h: &NoisyChannel,
    db: &ChannelDatabase,
    region: &SearchRegion,
    params: &SearchParams,
    options: &EstimatorOptions,
) -> Result<MultisinkResult> {
    MultisinkEstimator::new(db, *region, *params, *options)?.estimate(h)
}
