//! Idealized voltage-source inverter driven by center-aligned carrier comparison.
//!
//! One electrical revolution is `f_ratio` PWM periods. The position is latched
//! at the start of each period, the duty vector is evaluated once, and each
//! phase leg is high (at `v_dc`) wherever the symmetric triangular carrier lies
//! below its duty. The carrier is zero at mid-period, so every pulse is
//! centered in its period and has width `d * t_p`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::command::{DriveConfig, PolarCommand};
use crate::commutation::{duty_waveform, Technique};
use crate::error::{Error, Result};
use crate::frames::{ElectricalAngle, Frame, Polarity};
use crate::spectral::{analyze, harmonic, Spectrum};
use crate::timing::{dithered_periods, TimebaseConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarrierConfig {
    /// PWM periods per electrical revolution.
    pub f_ratio: usize,
    /// Time-grid points per nominal PWM period.
    pub samples_per_period: usize,
    /// DC-link voltage used for synthesis, volts.
    pub v_dc: f64,
    pub timebase: TimebaseConfig,
}

impl Default for CarrierConfig {
    fn default() -> Self {
        Self {
            f_ratio: 21,
            samples_per_period: 1000,
            v_dc: 12.0,
            timebase: TimebaseConfig::default(),
        }
    }
}

impl CarrierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.f_ratio < 3 {
            return Err(Error::domain(format!("f_ratio must be >= 3, got {}", self.f_ratio)));
        }
        if self.samples_per_period < 16 || !self.samples_per_period.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "samples_per_period must be even and >= 16, got {}",
                self.samples_per_period
            )));
        }
        if !(self.v_dc > 0.0) || !self.v_dc.is_finite() {
            return Err(Error::domain(format!("v_dc must be positive, got {}", self.v_dc)));
        }
        self.timebase.validate()
    }

    /// Electrical frequency implied by the carrier ratio and nominal period.
    pub fn fundamental_hz(&self) -> f64 {
        1.0 / (self.f_ratio as f64 * self.timebase.t_p_nominal)
    }

    pub fn switching_hz(&self) -> f64 {
        1.0 / self.timebase.t_p_nominal
    }

    pub fn sample_interval(&self) -> f64 {
        self.timebase.t_p_nominal / self.samples_per_period as f64
    }
}

/// One PWM period of a synthesized waveform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PwmPeriod {
    /// Index of the first sample.
    pub start: usize,
    pub len: usize,
    /// Latched grid position in the waveform's frame.
    pub theta: f64,
    pub duties: Vec<f64>,
    pub saturated: bool,
}

/// Sampled phase-to-ground voltages; every sample is exactly `0` or `v_dc`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchedWaveform {
    pub t: Vec<f64>,
    /// `v_pg[phase][sample]`.
    pub v_pg: Vec<Vec<f64>>,
    pub fundamental_freq: f64,
    pub switching_freq: f64,
    pub v_dc: f64,
    pub sample_interval: f64,
    pub periods: Vec<PwmPeriod>,
}

impl SwitchedWaveform {
    pub fn n_phases(&self) -> usize {
        self.v_pg.len()
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.sample_interval
    }

    pub fn is_saturated(&self) -> bool {
        self.periods.iter().any(|p| p.saturated)
    }

    pub fn spectrum(&self, trace: &[f64]) -> Result<Spectrum> {
        analyze(trace, self.sample_rate())
    }
}

/// Synthesizes one electrical revolution from phase-frame positions.
pub fn synthesize(
    technique: Technique,
    polar: &PolarCommand,
    cfg: &DriveConfig,
    carrier: &CarrierConfig,
) -> Result<SwitchedWaveform> {
    synthesize_in_frame(technique, polar, cfg, carrier, Frame::Phase, Polarity::Positive)
}

/// Like [`synthesize`], with the latched grid positions expressed in `frame`.
pub fn synthesize_in_frame(
    technique: Technique,
    polar: &PolarCommand,
    cfg: &DriveConfig,
    carrier: &CarrierConfig,
    frame: Frame,
    polarity: Polarity,
) -> Result<SwitchedWaveform> {
    carrier.validate()?;
    cfg.check()?;
    let n = carrier.samples_per_period;
    let dt = carrier.sample_interval();
    let lengths: Vec<usize> = if carrier.timebase.is_dithered() {
        dithered_periods(&carrier.timebase, carrier.f_ratio)?
            .into_iter()
            .map(|p| ((p / dt).round() as usize).max(2))
            .collect()
    } else {
        vec![n; carrier.f_ratio]
    };
    let total: usize = lengths.iter().sum();
    let samples_per_rev = (carrier.f_ratio * n) as f64;

    let mut v_pg = vec![Vec::with_capacity(total); cfg.n_phases];
    let mut periods = Vec::with_capacity(lengths.len());
    let mut start = 0;
    for len in lengths {
        let grid = TAU * start as f64 / samples_per_rev;
        let theta = ElectricalAngle::new(grid, frame, polarity)?.into_phase(cfg.n_phases)?;
        let duty = technique.duty(&theta, polar, cfg)?;
        for j in 0..len {
            let c = ((2 * j + 1) as f64 / len as f64 - 1.0).abs();
            for (trace, &d) in v_pg.iter_mut().zip(duty.as_slice()) {
                trace.push(if c < d { carrier.v_dc } else { 0.0 });
            }
        }
        periods.push(PwmPeriod {
            start,
            len,
            theta: grid,
            saturated: !duty.in_bounds(),
            duties: duty.into_vec(),
        });
        start += len;
    }

    Ok(SwitchedWaveform {
        t: (0..total).map(|i| i as f64 * dt).collect(),
        v_pg,
        fundamental_freq: carrier.fundamental_hz(),
        switching_freq: carrier.switching_hz(),
        v_dc: carrier.v_dc,
        sample_interval: dt,
        periods,
    })
}

/// Differences between adjacent phases: `ab, bc, ..., (n)a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineToLine {
    pub pairs: Vec<(usize, usize)>,
    pub traces: Vec<Vec<f64>>,
}

impl LineToLine {
    pub fn labels(&self) -> Vec<String> {
        self.pairs
            .iter()
            .map(|&(a, b)| format!("v_{}{}", phase_label(a), phase_label(b)))
            .collect()
    }
}

/// `a`, `b`, `c`, ... for the first 26 phases, then `p27`, `p28`, ...
pub fn phase_label(r: usize) -> String {
    if r < 26 {
        char::from(b'a' + r as u8).to_string()
    } else {
        format!("p{}", r + 1)
    }
}

pub fn line_to_line(wf: &SwitchedWaveform) -> LineToLine {
    let n = wf.n_phases();
    let pairs: Vec<(usize, usize)> = (0..n).map(|r| (r, (r + 1) % n)).collect();
    let traces = pairs
        .iter()
        .map(|&(a, b)| wf.v_pg[a].iter().zip(&wf.v_pg[b]).map(|(x, y)| x - y).collect())
        .collect();
    LineToLine { pairs, traces }
}

/// `averages[period][phase]`: mean phase-to-ground voltage over each PWM period.
pub fn period_averages(wf: &SwitchedWaveform) -> Vec<Vec<f64>> {
    wf.periods
        .iter()
        .map(|p| {
            wf.v_pg
                .iter()
                .map(|trace| trace[p.start..p.start + p.len].iter().sum::<f64>() / p.len as f64)
                .collect()
        })
        .collect()
}

/// Level transitions per phase over the synthesized revolution, counted cyclically.
pub fn switching_count(wf: &SwitchedWaveform) -> Vec<usize> {
    wf.v_pg
        .iter()
        .map(|trace| {
            let Some(&last) = trace.last() else { return 0 };
            let mut prev = last;
            trace
                .iter()
                .filter(|&&v| {
                    let changed = v != prev;
                    prev = v;
                    changed
                })
                .count()
        })
        .collect()
}

fn require_positive_index(m: f64) -> Result<PolarCommand> {
    if !(m > 0.0) {
        return Err(Error::domain(format!("utilization is undefined at m = {m}")));
    }
    PolarCommand::new(m, 0.0)
}

/// Fundamental amplitude of the first line-to-line voltage over `v_dc`, from a
/// synthesized switched waveform.
pub fn utilization_report(technique: Technique, m: f64, cfg: &DriveConfig, carrier: &CarrierConfig) -> Result<f64> {
    let polar = require_positive_index(m)?;
    let wf = synthesize(technique, &polar, cfg, carrier)?;
    let ll = line_to_line(&wf);
    let spec = wf.spectrum(&ll.traces[0])?;
    Ok(harmonic(&spec, wf.fundamental_freq, 1)? / wf.v_dc)
}

/// Fundamental amplitude of the first line-to-line duty difference, from the
/// analytic duty waveform on `samples` grid points.
pub fn duty_utilization(technique: Technique, m: f64, cfg: &DriveConfig, samples: usize) -> Result<f64> {
    let polar = require_positive_index(m)?;
    let w = duty_waveform(technique, &polar, cfg, samples)?;
    let (a, b) = (w.phase_trace(0), w.phase_trace(1));
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    harmonic(&analyze(&diff, samples as f64)?, 1.0, 1)
}
