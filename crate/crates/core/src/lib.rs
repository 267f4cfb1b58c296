//! Near-field distributed massive-MIMO channel toolkit.
//!
//! * [`geometry`]: points, walls, mirror images and visibility sectors.
//! * [`propagation`]: steering responses, image sources/sinks and channel synthesis.
//! * [`estimation`]: noisy snapshots, EVM, coarse-to-fine peak search and the
//!   multisource / multisink estimators.
//! * [`channel_db`]: the per-antenna virtual-sink database, wall inference and
//!   the database file format.
//! * [`bench`]: scenario configuration, the Monte Carlo runner and CSV/SVG output.

pub mod bench;
pub mod channel_db;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod propagation;
pub mod snapshot;

pub use error::{Error, Result};
pub use num_complex::Complex64;
