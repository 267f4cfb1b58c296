use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::propagation::{norm, ChannelVector};

/// Antenna-domain channel estimate: ground truth plus controlled noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyChannel {
    pub coefficients: Vec<Complex64>,
    pub wavelength: f64,
    /// Input EVM the noise was scaled to; NaN for external observations.
    pub target_input_evm_db: f64,
}

impl NoisyChannel {
    /// Wraps coefficients observed elsewhere (no known input EVM).
    pub fn observed(coefficients: Vec<Complex64>, wavelength: f64) -> Self {
        NoisyChannel {
            coefficients,
            wavelength,
            target_input_evm_db: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Adds circular complex white Gaussian noise rescaled so that
/// `||n|| / ||h||` is exactly `10^(target/20)`. A target of `-inf` adds nothing.
pub fn add_noise(h: &ChannelVector, target_input_evm_db: f64, seed: u64) -> Result<NoisyChannel> {
    let h_norm = h.norm();
    if h_norm == 0.0 {
        return Err(Error::ZeroChannel);
    }
    if target_input_evm_db.is_nan() || target_input_evm_db == f64::INFINITY {
        return Err(Error::config(
            "input_evm_db",
            format!("{target_input_evm_db} is not a usable EVM target"),
        ));
    }
    if target_input_evm_db == f64::NEG_INFINITY {
        return Ok(NoisyChannel {
            coefficients: h.coefficients.clone(),
            wavelength: h.wavelength,
            target_input_evm_db,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<Complex64> = (0..h.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let scale = 10f64.powf(target_input_evm_db / 20.0) * h_norm / norm(&noise);
    let coefficients = h
        .coefficients
        .iter()
        .zip(&noise)
        .map(|(c, n)| c + n * scale)
        .collect();
    Ok(NoisyChannel {
        coefficients,
        wavelength: h.wavelength,
        target_input_evm_db,
    })
}

/// `20 log10(||estimate - truth|| / ||truth||)`, `-inf` for a perfect estimate.
pub fn evm_db_slices(estimate: &[Complex64], truth: &[Complex64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            found: estimate.len(),
        });
    }
    let t = norm(truth);
    if t == 0.0 {
        return Err(Error::ZeroChannel);
    }
    let e = estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if e == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(20.0 * (e / t).log10())
}

pub fn evm_db(estimate: &ChannelVector, truth: &ChannelVector) -> Result<f64> {
    evm_db_slices(&estimate.coefficients, &truth.coefficients)
}
