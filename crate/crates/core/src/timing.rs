//! Duty to switch on/off times and dithered PWM periods.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nominal PWM period and the uniform dither applied around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimebaseConfig {
    /// Nominal PWM period, seconds.
    pub t_p_nominal: f64,
    /// Largest absolute deviation of a dithered period from nominal, seconds.
    pub dither_amplitude: f64,
    pub seed: u64,
}

impl Default for TimebaseConfig {
    fn default() -> Self {
        Self { t_p_nominal: 50e-6, dither_amplitude: 0.0, seed: 0 }
    }
}

impl TimebaseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_p_nominal > 0.0) || !self.t_p_nominal.is_finite() {
            return Err(Error::domain(format!("PWM period must be positive, got {}", self.t_p_nominal)));
        }
        if !(self.dither_amplitude >= 0.0 && self.dither_amplitude < self.t_p_nominal) {
            return Err(Error::domain(format!(
                "dither amplitude must lie in [0, t_p), got {}",
                self.dither_amplitude
            )));
        }
        Ok(())
    }

    pub fn is_dithered(&self) -> bool {
        self.dither_amplitude > 0.0
    }
}

/// Upper-switch on and off times for every phase leg within one period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchTiming {
    pub t_on: Vec<f64>,
    pub t_off: Vec<f64>,
    pub t_p: f64,
    /// Set when at least one duty was clamped into `[0, 1]`.
    pub saturated: bool,
}

/// `t_on = t_p * clamp(d, 0, 1)`, `t_off = t_p - t_on`.
pub fn duty_to_times(duties: &[f64], t_p: f64) -> Result<SwitchTiming> {
    if !(t_p > 0.0) || !t_p.is_finite() {
        return Err(Error::domain(format!("PWM period must be positive, got {t_p}")));
    }
    if let Some(bad) = duties.iter().find(|d| d.is_nan()) {
        return Err(Error::domain(format!("duty is not a number: {bad}")));
    }
    let saturated = duties.iter().any(|d| !(0.0..=1.0).contains(d));
    // Either t_p - on or t_p - off is exact (Sterbenz), so re-deriving on from
    // off makes on + off == t_p hold exactly in floating point.
    let (t_on, t_off) = duties
        .iter()
        .map(|d| {
            let off = t_p - t_p * d.clamp(0.0, 1.0);
            (t_p - off, off)
        })
        .unzip();
    Ok(SwitchTiming { t_on, t_off, t_p, saturated })
}

/// Seeded source of PWM periods drawn uniformly from
/// `[t_p - amplitude, t_p + amplitude]`.
///
/// Holds generator state, so a single instance is not meant to be shared
/// between threads; clone or reseed instead.
#[derive(Debug, Clone)]
pub struct PeriodDither {
    nominal: f64,
    amplitude: f64,
    rng: ChaCha8Rng,
}

impl PeriodDither {
    pub fn new(cfg: &TimebaseConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            nominal: cfg.t_p_nominal,
            amplitude: cfg.dither_amplitude,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        })
    }

    pub fn next_period(&mut self) -> f64 {
        if self.amplitude == 0.0 {
            return self.nominal;
        }
        self.rng.gen_range(self.nominal - self.amplitude..=self.nominal + self.amplitude)
    }
}

impl Iterator for PeriodDither {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_period())
    }
}

/// `count` periods from a fresh generator seeded with `cfg.seed`.
pub fn dithered_periods(cfg: &TimebaseConfig, count: usize) -> Result<Vec<f64>> {
    Ok(PeriodDither::new(cfg)?.take(count).collect())
}
