//! Range sensor model: limits, sampling and range noise.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub min_range: f64,
    pub max_range: f64,
    pub samples_per_rev: usize,
    /// Revolutions per second.
    pub rev_frequency: f64,
    pub relative_sigma: f64,
    pub absolute_sigma_floor: f64,
}

struct Preset {
    name: &'static str,
    sample_rate: f64,
    min_range: f64,
    max_range: f64,
    freq: (f64, f64),
    default_freq: f64,
}

const PRESETS: [Preset; 2] = [
    Preset {
        name: "sweep_like",
        sample_rate: 1000.0,
        min_range: 0.1,
        max_range: 10.0,
        freq: (1.0, 10.0),
        default_freq: 1.0,
    },
    Preset {
        name: "rplidar_like",
        sample_rate: 4000.0,
        min_range: 0.15,
        max_range: 6.0,
        freq: (1.0, 11.0),
        default_freq: 10.0,
    },
];

pub const DEFAULT_RELATIVE_SIGMA: f64 = 0.02;
pub const DEFAULT_SIGMA_FLOOR: f64 = 0.03;

impl SensorModel {
    /// Named preset at a rotation frequency (`None` for the preset's
    /// default). Samples per revolution follow from the fixed sample rate.
    pub fn preset(name: &str, frequency: Option<f64>) -> Result<SensorModel> {
        let p = PRESETS
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::param(format!("unknown sensor preset {name:?} (sweep_like, rplidar_like)")))?;
        let f = frequency.unwrap_or(p.default_freq);
        if !(f >= p.freq.0 && f <= p.freq.1) {
            return Err(Error::param(format!(
                "{name} rotates at {}-{} Hz, got {f}",
                p.freq.0, p.freq.1
            )));
        }
        let m = SensorModel {
            min_range: p.min_range,
            max_range: p.max_range,
            samples_per_rev: (p.sample_rate / f).round() as usize,
            rev_frequency: f,
            relative_sigma: DEFAULT_RELATIVE_SIGMA,
            absolute_sigma_floor: DEFAULT_SIGMA_FLOOR,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn noiseless(mut self) -> SensorModel {
        self.relative_sigma = 0.0;
        self.absolute_sigma_floor = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_range > 0.0 && self.min_range < self.max_range && self.max_range.is_finite()) {
            return Err(Error::param("sensor needs 0 < min_range < max_range"));
        }
        if self.samples_per_rev == 0 || !(self.rev_frequency > 0.0 && self.rev_frequency.is_finite()) {
            return Err(Error::param("sensor needs samples_per_rev > 0 and a positive frequency"));
        }
        if !(self.relative_sigma >= 0.0 && self.absolute_sigma_floor >= 0.0)
            || !(self.relative_sigma.is_finite() && self.absolute_sigma_floor.is_finite())
        {
            return Err(Error::param("sensor noise parameters must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn sample_rate(&self) -> f64 {
        self.samples_per_rev as f64 * self.rev_frequency
    }

    pub fn sigma(&self, true_range: f64) -> f64 {
        self.absolute_sigma_floor.max(self.relative_sigma * true_range)
    }
}

/// Measured range, or `None` for a dropout. One normal deviate is drawn
/// per call that is inside the range limits.
pub fn apply_noise(model: &SensorModel, true_range: f64, rng: &mut ChaCha8Rng) -> Option<f64> {
    if !(true_range >= model.min_range && true_range <= model.max_range) {
        return None;
    }
    let z: f64 = rng.sample(StandardNormal);
    let measured = true_range + model.sigma(true_range) * z;
    (measured > 0.0).then_some(measured)
}
