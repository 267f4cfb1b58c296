//! Monte Carlo runner: draws users, synthesizes their channels, adds noise at
//! every sweep point and scores each enabled estimator against the truth.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Estimator, ScenarioConfig};
use crate::channel_db::{build_db_from_environment, ChannelDatabase};
use crate::error::{Error, Result};
use crate::estimation::search::coarse_grid;
use crate::estimation::{
    add_noise, evm_db, MultisinkEstimator, MultisourceEstimator, NoisyChannel, SearchRegion,
};
use crate::geometry::{distance, Environment, Location};
use crate::propagation::{
    channel_from_sources, enumerate_virtual_sources, AntennaArray, ChannelVector, Steering,
    Transmitter,
};

/// Per-trial output EVM is clamped here before averaging so perfect
/// estimates (`-inf`) keep the means finite.
pub const EVM_CLAMP_DB: f64 = -100.0;

/// Coarse tables larger than this are not built; the search then evaluates
/// the coarse grid on the fly.
const COARSE_TABLE_BUDGET_BYTES: usize = 1 << 30;

/// One antenna spacing of a config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub spacing_lambda: f64,
    pub array: AntennaArray,
}

impl Scenario {
    pub fn antenna_count(&self) -> usize {
        self.array.len()
    }
}

pub fn scenarios(cfg: &ScenarioConfig) -> Result<Vec<Scenario>> {
    cfg.antenna_spacings_lambda
        .iter()
        .map(|&s| {
            let array = cfg.array(s)?;
            Ok(Scenario {
                id: format!("M{}_{}lambda", array.len(), s),
                spacing_lambda: s,
                array,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOutcome {
    pub estimator: Estimator,
    /// `-inf` for a perfect estimate.
    pub output_evm_db: f64,
    /// Distance from the user to the estimated location; `None` for the
    /// antenna-domain estimate.
    pub location_error_m: Option<f64>,
}

/// One user drop at one input EVM.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub scenario: String,
    pub trial_index: usize,
    pub ue_location: Location,
    pub input_evm_db: f64,
    /// In the config's estimator order.
    pub outcomes: Vec<EstimatorOutcome>,
    pub wall_clock_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub antenna_count: usize,
    pub spacing_lambda: f64,
    pub input_evm_db: f64,
    pub estimator: Estimator,
    pub mean_output_evm_db: f64,
    pub median_output_evm_db: f64,
    pub std_db: f64,
    /// `None` when the estimator yields no location.
    pub mean_loc_err_m: Option<f64>,
    pub trials: usize,
}

/// Aggregated rows ordered by scenario (config order), input EVM ascending,
/// then estimator name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

impl ResultsTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn find(
        &self,
        scenario: &str,
        input_evm_db: f64,
        estimator: Estimator,
    ) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.scenario == scenario && r.input_evm_db == input_evm_db && r.estimator == estimator
        })
    }

    /// Scenario ids in row order, without repeats.
    pub fn scenario_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for r in &self.rows {
            if ids.last() != Some(&r.scenario.as_str()) {
                ids.push(&r.scenario);
            }
        }
        ids
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: ResultsTable,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
}

/// Estimators and precomputed state shared by all trials of a scenario.
struct Prepared<'a> {
    scenario: &'a Scenario,
    cfg: &'a ScenarioConfig,
    env: Environment,
    steering: Steering,
    multisource: Option<MultisourceEstimator<'a>>,
    multisink: Option<MultisinkEstimator<'a>>,
}

fn table_fits(region: &SearchRegion, step: f64, antennas: usize) -> bool {
    coarse_grid(region, step).len() * antennas * 16 <= COARSE_TABLE_BUDGET_BYTES
}

impl<'a> Prepared<'a> {
    fn new(
        cfg: &'a ScenarioConfig,
        scenario: &'a Scenario,
        db: Option<&'a ChannelDatabase>,
    ) -> Result<Self> {
        let env = Environment::rectangular_room(
            cfg.room_width_m,
            cfg.room_depth_m,
            cfg.wall_reflection_coefficient,
        )?;
        let steering = Steering::new(cfg.wavelength_m, cfg.steering_mode)?;
        let params = cfg.search_params();
        let options = cfg.estimator_options();
        let m = scenario.antenna_count();
        let multisource = if cfg.estimators.contains(&Estimator::Multisource) {
            let region = SearchRegion::with_first_order_images(cfg.room_width_m, cfg.room_depth_m);
            let est = MultisourceEstimator::new(
                &scenario.array,
                cfg.wavelength_m,
                region,
                params,
                options,
            )?;
            Some(if table_fits(&region, params.coarse_step, m) {
                est.with_coarse_table()?
            } else {
                est
            })
        } else {
            None
        };
        let multisink = match db {
            Some(db) => {
                let region = SearchRegion::room(cfg.room_width_m, cfg.room_depth_m);
                let est = MultisinkEstimator::new(db, region, params, options)?;
                Some(if table_fits(&region, params.coarse_step, m) {
                    est.with_coarse_table()?
                } else {
                    est
                })
            }
            None => None,
        };
        Ok(Prepared {
            scenario,
            cfg,
            env,
            steering,
            multisource,
            multisink,
        })
    }

    fn outcome(
        &self,
        estimator: Estimator,
        noisy: &NoisyChannel,
        truth: &ChannelVector,
        ue: &Location,
    ) -> Result<EstimatorOutcome> {
        let (estimate, location) = match estimator {
            Estimator::Antenna => (
                ChannelVector::new(noisy.coefficients.clone(), noisy.wavelength),
                None,
            ),
            Estimator::Multisource => {
                let est = self.multisource.as_ref().expect("prepared when enabled");
                let r = est.estimate(noisy, self.cfg.k_sources)?;
                let strongest = r.strongest().map(|s| s.location);
                (r.reconstructed, strongest)
            }
            Estimator::Multisink => {
                let est = self.multisink.as_ref().expect("prepared when enabled");
                let r = est.estimate(noisy)?;
                (r.reconstructed, Some(r.user_location))
            }
        };
        Ok(EstimatorOutcome {
            estimator,
            output_evm_db: evm_db(&estimate, truth)?,
            location_error_m: location.map(|l| distance(&l, ue)),
        })
    }

    fn trial(&self, trial_index: usize) -> Result<Vec<TrialRecord>> {
        let cfg = self.cfg;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed.wrapping_add(trial_index as u64));
        let margin = cfg.ue_margin_m();
        let ue = Location::planar(
            rng.gen_range(margin..=cfg.room_width_m - margin),
            rng.gen_range(margin..=cfg.room_depth_m - margin),
        );
        let tx = Transmitter::new(ue, cfg.tx_amplitude())?;
        let sources = enumerate_virtual_sources(&ue, &self.env, cfg.max_order);
        let truth = channel_from_sources(
            &tx,
            &sources,
            &self.scenario.array,
            &self.env,
            &self.steering,
        )?;
        let mut records = Vec::with_capacity(cfg.input_evm_sweep_db.len());
        for &input in &cfg.input_evm_sweep_db {
            // drawn for every point so the noise does not depend on which
            // estimators are enabled
            let noise_seed: u64 = rng.gen();
            let start = Instant::now();
            let noisy = add_noise(&truth, input, noise_seed)?;
            let outcomes = cfg
                .estimators
                .iter()
                .map(|&e| self.outcome(e, &noisy, &truth, &ue))
                .collect::<Result<Vec<_>>>()?;
            records.push(TrialRecord {
                scenario: self.scenario.id.clone(),
                trial_index,
                ue_location: ue,
                input_evm_db: input,
                outcomes,
                wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
        Ok(records)
    }
}

/// Runs every trial of one scenario. Results do not depend on the number of
/// worker threads.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    scenario: &Scenario,
    options: &RunOptions,
) -> Result<RunOutput> {
    cfg.validate()?;
    let db = if cfg.estimators.contains(&Estimator::Multisink) {
        let env = Environment::rectangular_room(
            cfg.room_width_m,
            cfg.room_depth_m,
            cfg.wall_reflection_coefficient,
        )?;
        Some(build_db_from_environment(
            &scenario.array,
            &env,
            cfg.max_order,
            cfg.wavelength_m,
        )?)
    } else {
        None
    };
    let run = || -> Result<RunOutput> {
        let prepared = Prepared::new(cfg, scenario, db.as_ref())?;
        let per_trial = (0..cfg.trials)
            .into_par_iter()
            .map(|t| prepared.trial(t))
            .collect::<Result<Vec<_>>>()?;
        let trials: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
        Ok(RunOutput {
            table: aggregate(cfg, scenario, &trials),
            trials,
        })
    };
    match options.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// All scenarios of `cfg`, tables concatenated in config order.
pub fn run(cfg: &ScenarioConfig, options: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let mut out = RunOutput {
        table: ResultsTable::default(),
        trials: Vec::new(),
    };
    for scenario in scenarios(cfg)? {
        let r = run_scenario(cfg, &scenario, options)?;
        out.table.rows.extend(r.table.rows);
        out.trials.extend(r.trials);
    }
    Ok(out)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        let (a, b) = (sorted[n / 2 - 1], sorted[n / 2]);
        if a == b {
            a
        } else {
            (a + b) / 2.0
        }
    }
}

fn aggregate(cfg: &ScenarioConfig, scenario: &Scenario, trials: &[TrialRecord]) -> ResultsTable {
    let mut sweep = cfg.input_evm_sweep_db.clone();
    sweep.sort_by(f64::total_cmp);
    let mut estimators = cfg.estimators.clone();
    estimators.sort_by_key(|e| e.name());
    let mut rows = Vec::new();
    for &input in &sweep {
        for &estimator in &estimators {
            let outcomes: Vec<&EstimatorOutcome> = trials
                .iter()
                .filter(|t| t.input_evm_db == input)
                .flat_map(|t| t.outcomes.iter().filter(|o| o.estimator == estimator))
                .collect();
            let n = outcomes.len();
            let clamped: Vec<f64> = outcomes
                .iter()
                .map(|o| o.output_evm_db.max(EVM_CLAMP_DB))
                .collect();
            let mean = clamped.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (clamped.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            let mut raw: Vec<f64> = outcomes.iter().map(|o| o.output_evm_db).collect();
            raw.sort_by(f64::total_cmp);
            let errors: Vec<f64> = outcomes.iter().filter_map(|o| o.location_error_m).collect();
            rows.push(ResultRow {
                scenario: scenario.id.clone(),
                antenna_count: scenario.antenna_count(),
                spacing_lambda: scenario.spacing_lambda,
                input_evm_db: input,
                estimator,
                mean_output_evm_db: mean,
                median_output_evm_db: median(&raw),
                std_db: std,
                mean_loc_err_m: (!errors.is_empty())
                    .then(|| errors.iter().sum::<f64>() / errors.len() as f64),
                trials: n,
            });
        }
    }
    ResultsTable { rows }
}
