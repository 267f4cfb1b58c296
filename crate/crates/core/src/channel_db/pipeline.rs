//! Database from a single snapshot: locate the user and its images with the
//! multisource estimator, turn main/image pairs into walls, and image the
//! array across them.

use crate::error::Result;
use crate::estimation::{
    EstimatorOptions, MultisourceEstimator, MultisourceResult, NoisyChannel, SearchParams,
    SearchRegion,
};
use crate::propagation::AntennaArray;

use super::infer::{build_db_from_walls, infer_walls, GainCompensation, WallEstimate};
use super::ChannelDatabase;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceOptions {
    /// Sources extracted from the snapshot.
    pub k: usize,
    /// Reflection order of the resulting database.
    pub max_order: usize,
    pub params: SearchParams,
    pub estimator: EstimatorOptions,
    pub compensation: GainCompensation,
}

impl InferenceOptions {
    /// Five sources, first-order database, `lambda/256` final step, hull-masked
    /// atoms and three relaxation passes.
    pub fn for_wavelength(wavelength: f64) -> Self {
        InferenceOptions {
            k: 5,
            max_order: 1,
            params: SearchParams {
                final_step: wavelength / 256.0,
                ..SearchParams::for_wavelength(wavelength)
            },
            estimator: EstimatorOptions {
                mounted_array: true,
                relax_rounds: 3,
                ..EstimatorOptions::default()
            },
            compensation: GainCompensation::None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InferredDatabase {
    pub db: ChannelDatabase,
    pub walls: Vec<WallEstimate>,
    pub sources: MultisourceResult,
}

/// Snapshot-to-database pipeline bound to one array and room.
pub struct DatabaseInference<'a> {
    estimator: MultisourceEstimator<'a>,
    array: &'a AntennaArray,
    room: SearchRegion,
    wavelength: f64,
    options: InferenceOptions,
}

impl<'a> DatabaseInference<'a> {
    /// `room` bounds the user; sources are searched over the room plus its
    /// first-order image cells.
    pub fn new(
        array: &'a AntennaArray,
        wavelength: f64,
        room: SearchRegion,
        options: InferenceOptions,
    ) -> Result<Self> {
        room.validate()?;
        let (w, d) = (room.x_max - room.x_min, room.y_max - room.y_min);
        let region = SearchRegion::new(
            room.x_min - w,
            room.x_max + w,
            room.y_min - d,
            room.y_max + d,
        )?;
        Ok(DatabaseInference {
            estimator: MultisourceEstimator::new(
                array,
                wavelength,
                region,
                options.params,
                options.estimator,
            )?,
            array,
            room,
            wavelength,
            options,
        })
    }

    pub fn with_coarse_table(mut self) -> Result<Self> {
        self.estimator = self.estimator.with_coarse_table()?;
        Ok(self)
    }

    pub fn infer(&self, h: &NoisyChannel) -> Result<InferredDatabase> {
        let sources = self.estimator.estimate(h, self.options.k)?;
        let walls = infer_walls(&sources.sources, &self.room, self.options.compensation);
        let db = build_db_from_walls(
            self.array,
            &walls,
            &self.room,
            self.options.max_order,
            self.wavelength,
        )?;
        Ok(InferredDatabase { db, walls, sources })
    }
}
