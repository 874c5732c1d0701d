//! Per-phase duty-cycle synthesis.
//!
//! Every technique is a pure function of the phase-frame electrical position,
//! the polar voltage command and the drive configuration. With
//! `x_r = theta + delta - (r - 1) * beta` for phase `r = 1..n`:
//!
//! | technique     | duty                                                         |
//! |---------------|--------------------------------------------------------------|
//! | SPWM          | `(1 + m sin x_r) / 2`                                        |
//! | THPWM         | `(1 + m (2/sqrt3) (sin x_r + sin(3 x_r) / 6)) / 2`           |
//! | DPWM          | `(2/sqrt3) (spwm_r - min_k spwm_k)`                          |
//! | DPWM + offset | `dpwm_r + d_o f(m)`                                          |
//! | CPWM          | `dpwm_r + (1 - max_k dpwm_k) / 2`                            |
//! | APWM          | `(1 - b(m)) cpwm_r + b(m) dpwm_offset_r`                     |
//!
//! `f` and `b` are the same piecewise-linear ramp: one below `m_l`, zero at and
//! above `m_h`, linear in between.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::command::{DriveConfig, PolarCommand};
use crate::error::{Error, Result};
use crate::frames::{ElectricalAngle, Frame, Polarity};

/// `2 / sqrt(3)`
pub const TWO_OVER_SQRT3: f64 = 1.154_700_538_379_251_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Technique {
    Spwm,
    Thpwm,
    Dpwm,
    DpwmOffset,
    Cpwm,
    Apwm,
}

impl Technique {
    pub const ALL: [Technique; 6] = [
        Technique::Spwm,
        Technique::Thpwm,
        Technique::Dpwm,
        Technique::DpwmOffset,
        Technique::Cpwm,
        Technique::Apwm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Spwm => "spwm",
            Technique::Thpwm => "thpwm",
            Technique::Dpwm => "dpwm",
            Technique::DpwmOffset => "dpwm-offset",
            Technique::Cpwm => "cpwm",
            Technique::Apwm => "apwm",
        }
    }

    /// Whether the technique is defined for `n_phases`.
    pub fn supports(self, n_phases: usize) -> bool {
        self != Technique::Thpwm || n_phases == 3
    }

    /// Evaluates this technique at a phase-frame position.
    pub fn duty(self, theta: &ElectricalAngle, polar: &PolarCommand, cfg: &DriveConfig) -> Result<DutyVector> {
        let theta_eff = prepare(theta, polar, cfg)?;
        if !self.supports(cfg.n_phases) {
            return Err(Error::Unsupported(format!(
                "{} requires three phases (n_phases = {})",
                self.name(),
                cfg.n_phases
            )));
        }
        let m = polar.m();
        let duties = match self {
            Technique::Spwm => spwm_raw(theta_eff, m, cfg),
            Technique::Thpwm => thpwm_raw(theta_eff, m, cfg),
            Technique::Dpwm => dpwm_raw(theta_eff, m, cfg),
            Technique::DpwmOffset => dpwm_offset_raw(theta_eff, m, cfg),
            Technique::Cpwm => cpwm_raw(theta_eff, m, cfg),
            Technique::Apwm => apwm_raw(theta_eff, m, cfg),
        };
        let duties = duties.into_iter().map(snap_rounding).collect();
        Ok(DutyVector { duties, technique: self, m, theta_eff })
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lowered = s.trim().to_ascii_lowercase().replace('_', "-");
        Technique::ALL
            .into_iter()
            .find(|t| t.name() == lowered)
            .ok_or_else(|| Error::Parse(format!("unknown technique `{s}`")))
    }
}

/// Per-phase duty cycles produced by one technique at one position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DutyVector {
    duties: Vec<f64>,
    technique: Technique,
    m: f64,
    theta_eff: f64,
}

impl DutyVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.duties
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.duties
    }

    pub fn technique(&self) -> Technique {
        self.technique
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `theta + delta`, unwrapped.
    pub fn theta_eff(&self) -> f64 {
        self.theta_eff
    }

    pub fn len(&self) -> usize {
        self.duties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.duties.is_empty()
    }

    pub fn min(&self) -> f64 {
        min_of(&self.duties)
    }

    pub fn max(&self) -> f64 {
        max_of(&self.duties)
    }

    /// True when every duty lies in `[0, 1]`.
    pub fn in_bounds(&self) -> bool {
        self.duties.iter().all(|d| (0.0..=1.0).contains(d))
    }
}

impl std::ops::Index<usize> for DutyVector {
    type Output = f64;

    fn index(&self, r: usize) -> &f64 {
        &self.duties[r]
    }
}

/// Largest excursion past 0 or 1 treated as rounding rather than overmodulation.
const ROUNDING_SLACK: f64 = 8.0 * f64::EPSILON;

fn snap_rounding(d: f64) -> f64 {
    if (-ROUNDING_SLACK..0.0).contains(&d) {
        0.0
    } else if d > 1.0 && d <= 1.0 + ROUNDING_SLACK {
        1.0
    } else {
        d
    }
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn prepare(theta: &ElectricalAngle, polar: &PolarCommand, cfg: &DriveConfig) -> Result<f64> {
    cfg.check()?;
    theta.require(Frame::Phase)?;
    Ok(theta.value() + polar.delta())
}

fn phase_args(theta_eff: f64, cfg: &DriveConfig) -> impl Iterator<Item = f64> {
    let beta = cfg.beta();
    (0..cfg.n_phases).map(move |r| theta_eff - r as f64 * beta)
}

fn spwm_raw(theta_eff: f64, m: f64, cfg: &DriveConfig) -> Vec<f64> {
    phase_args(theta_eff, cfg).map(|x| 0.5 * (1.0 + m * x.sin())).collect()
}

fn thpwm_raw(theta_eff: f64, m: f64, cfg: &DriveConfig) -> Vec<f64> {
    phase_args(theta_eff, cfg)
        .map(|x| 0.5 * (1.0 + m * TWO_OVER_SQRT3 * (x.sin() + (3.0 * x).sin() / 6.0)))
        .collect()
}

fn dpwm_raw(theta_eff: f64, m: f64, cfg: &DriveConfig) -> Vec<f64> {
    let spwm = spwm_raw(theta_eff, m, cfg);
    let floor = min_of(&spwm);
    spwm.into_iter().map(|d| TWO_OVER_SQRT3 * (d - floor)).collect()
}

fn dpwm_offset_raw(theta_eff: f64, m: f64, cfg: &DriveConfig) -> Vec<f64> {
    let offset = cfg.d_o * ramp(m, cfg.m_l, cfg.m_h);
    let mut d = dpwm_raw(theta_eff, m, cfg);
    d.iter_mut().for_each(|x| *x += offset);
    d
}

// The shift uses the DPWM duty without commutation offset, otherwise min + max
// would no longer equal one.
fn cpwm_raw(theta_eff: f64, m: f64, cfg: &DriveConfig) -> Vec<f64> {
    let mut d = dpwm_raw(theta_eff, m, cfg);
    let shift = 0.5 * (1.0 - max_of(&d));
    d.iter_mut().for_each(|x| *x += shift);
    d
}

fn apwm_raw(theta_eff: f64, m: f64, cfg: &DriveConfig) -> Vec<f64> {
    let b = ramp(m, cfg.m_l, cfg.m_h);
    let continuous = cpwm_raw(theta_eff, m, cfg);
    let discontinuous = dpwm_offset_raw(theta_eff, m, cfg);
    let (low_weight, high_weight) = if cfg.blend_swap {
        (&discontinuous, &continuous)
    } else {
        (&continuous, &discontinuous)
    };
    low_weight
        .iter()
        .zip(high_weight)
        .map(|(c, d)| (1.0 - b) * c + b * d)
        .collect()
}

/// Piecewise-linear ramp shared by the commutation offset and the blend factor.
fn ramp(m: f64, m_l: f64, m_h: f64) -> f64 {
    if m < m_l {
        1.0
    } else if m < m_h {
        (m_h - m) / (m_h - m_l)
    } else {
        0.0
    }
}

pub fn spwm_duty(theta: &ElectricalAngle, polar: &PolarCommand, cfg: &DriveConfig) -> Result<DutyVector> {
    Technique::Spwm.duty(theta, polar, cfg)
}

/// Three-phase only.
pub fn thpwm_duty(theta: &ElectricalAngle, polar: &PolarCommand, cfg: &DriveConfig) -> Result<DutyVector> {
    Technique::Thpwm.duty(theta, polar, cfg)
}

/// Phase grounding: the most negative phase is clamped to zero duty.
pub fn dpwm_duty(theta: &ElectricalAngle, polar: &PolarCommand, cfg: &DriveConfig) -> Result<DutyVector> {
    Technique::Dpwm.duty(theta, polar, cfg)
}

pub fn dpwm_offset_duty(theta: &ElectricalAngle, polar: &PolarCommand, cfg: &DriveConfig) -> Result<DutyVector> {
    Technique::DpwmOffset.duty(theta, polar, cfg)
}

pub fn cpwm_duty(theta: &ElectricalAngle, polar: &PolarCommand, cfg: &DriveConfig) -> Result<DutyVector> {
    Technique::Cpwm.duty(theta, polar, cfg)
}

/// With `blend_swap` set the CPWM and DPWM-with-offset weights are exchanged.
pub fn apwm_duty(theta: &ElectricalAngle, polar: &PolarCommand, cfg: &DriveConfig) -> Result<DutyVector> {
    Technique::Apwm.duty(theta, polar, cfg)
}

/// Weight `f(m)` of the commutation offset.
pub fn commutation_offset(m: f64, cfg: &DriveConfig) -> f64 {
    ramp(m, cfg.m_l, cfg.m_h)
}

/// Weight `b(m)` of the DPWM constituent in the adaptive blend.
pub fn blend_factor(m: f64, cfg: &DriveConfig) -> f64 {
    ramp(m, cfg.m_l, cfg.m_h)
}

/// Duty vectors over one electrical revolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DutyWaveform {
    /// Frame of the grid angles in `points`.
    pub frame: Frame,
    pub polarity: Polarity,
    pub points: Vec<(f64, DutyVector)>,
}

impl DutyWaveform {
    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|(t, _)| *t)
    }

    /// Duty of phase `r` (zero-based) at every grid point.
    pub fn phase_trace(&self, r: usize) -> Vec<f64> {
        self.points.iter().map(|(_, d)| d[r]).collect()
    }

    pub fn n_phases(&self) -> usize {
        self.points.first().map_or(0, |(_, d)| d.len())
    }
}

/// Samples a technique on `samples` uniformly spaced phase-frame positions in `[0, 2 pi)`.
pub fn duty_waveform(
    technique: Technique,
    polar: &PolarCommand,
    cfg: &DriveConfig,
    samples: usize,
) -> Result<DutyWaveform> {
    duty_waveform_in_frame(technique, polar, cfg, samples, Frame::Phase, Polarity::Positive)
}

/// Like [`duty_waveform`], but the grid is laid out in `frame`. Line-frame grid
/// points are converted to the phase frame before evaluation.
pub fn duty_waveform_in_frame(
    technique: Technique,
    polar: &PolarCommand,
    cfg: &DriveConfig,
    samples: usize,
    frame: Frame,
    polarity: Polarity,
) -> Result<DutyWaveform> {
    if samples < 2 {
        return Err(Error::domain(format!("need at least 2 samples, got {samples}")));
    }
    let points = (0..samples)
        .map(|k| {
            let grid = TAU * k as f64 / samples as f64;
            let theta = ElectricalAngle::new(grid, frame, polarity)?.into_phase(cfg.n_phases)?;
            Ok((grid, technique.duty(&theta, polar, cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DutyWaveform { frame, polarity, points })
}
