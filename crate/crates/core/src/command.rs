//! Synchronous-frame voltage commands, their polar form, and drive configuration.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Synchronous-frame voltage command with the estimated DC-link voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoltageCommand {
    /// d-axis voltage command, volts.
    pub v_d: f64,
    /// q-axis voltage command, volts.
    pub v_q: f64,
    /// Estimated DC-link voltage, volts. Must be positive.
    pub v_dc: f64,
}

impl VoltageCommand {
    pub fn new(v_d: f64, v_q: f64, v_dc: f64) -> Self {
        Self { v_d, v_q, v_dc }
    }
}

/// Modulation index and phase advance.
///
/// `m >= 0` and `delta` in `(-pi, pi]`. The index is never clamped, so values
/// above one (overmodulation) are representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolar")]
pub struct PolarCommand {
    m: f64,
    delta: f64,
}

#[derive(Deserialize)]
struct RawPolar {
    m: f64,
    delta: f64,
}

impl TryFrom<RawPolar> for PolarCommand {
    type Error = Error;

    fn try_from(raw: RawPolar) -> Result<Self> {
        PolarCommand::new(raw.m, raw.delta)
    }
}

impl PolarCommand {
    /// Builds a command, folding `delta` into `(-pi, pi]`.
    pub fn new(m: f64, delta: f64) -> Result<Self> {
        if !m.is_finite() || m < 0.0 {
            return Err(Error::domain(format!("modulation index must be finite and >= 0, got {m}")));
        }
        if !delta.is_finite() {
            return Err(Error::domain(format!("phase advance must be finite, got {delta}")));
        }
        Ok(Self { m, delta: fold_half_open(delta) })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_overmodulated(&self) -> bool {
        self.m > 1.0
    }
}

fn fold_half_open(delta: f64) -> f64 {
    if delta > -PI && delta <= PI {
        return delta;
    }
    let folded = (delta + PI).rem_euclid(TAU) - PI;
    if folded <= -PI {
        PI
    } else {
        folded
    }
}

/// Converts a synchronous-frame voltage command to modulation index and phase advance.
///
/// `m = |V*| / V_dc`. The phase advance is the four-quadrant arctangent of
/// `v_d` over `v_q`, i.e. measured from the q-axis, so a pure q-axis command has
/// zero advance and a pure d-axis command has `pi/2`. The zero vector maps to
/// `(0, 0)`.
pub fn to_polar(cmd: &VoltageCommand) -> Result<PolarCommand> {
    if !(cmd.v_dc > 0.0) || !cmd.v_dc.is_finite() {
        return Err(Error::domain(format!("DC-link voltage must be positive, got {}", cmd.v_dc)));
    }
    if !cmd.v_d.is_finite() || !cmd.v_q.is_finite() {
        return Err(Error::domain("voltage command components must be finite"));
    }
    if cmd.v_d == 0.0 && cmd.v_q == 0.0 {
        return Ok(PolarCommand { m: 0.0, delta: 0.0 });
    }
    let m = cmd.v_d.hypot(cmd.v_q) / cmd.v_dc;
    let mut delta = cmd.v_d.atan2(cmd.v_q);
    if delta <= -PI {
        delta = PI;
    }
    Ok(PolarCommand { m, delta })
}

/// Phase count, modulation-index thresholds and commutation-offset settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub n_phases: usize,
    /// Lower modulation-index threshold of the offset and blend ramps.
    pub m_l: f64,
    /// Upper modulation-index threshold of the offset and blend ramps.
    pub m_h: f64,
    /// Commutation offset magnitude, duty units.
    pub d_o: f64,
    /// Exchange the CPWM and DPWM roles in the adaptive blend.
    pub blend_swap: bool,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            n_phases: 3,
            m_l: 0.4,
            m_h: 0.6,
            d_o: 0.05,
            blend_swap: false,
        }
    }
}

impl DriveConfig {
    /// Displacement between adjacent phases, `2 pi / n`.
    pub fn beta(&self) -> f64 {
        TAU / self.n_phases as f64
    }

    /// Every invariant this configuration violates, in a fixed order.
    pub fn violations(&self) -> Vec<ConfigViolation> {
        let mut out = Vec::new();
        if self.n_phases < 3 {
            out.push(ConfigViolation::TooFewPhases(self.n_phases));
        }
        for (name, value) in [("m_l", self.m_l), ("m_h", self.m_h), ("d_o", self.d_o)] {
            if !value.is_finite() {
                out.push(ConfigViolation::NonFinite(name));
            }
        }
        if !out.iter().any(|v| matches!(v, ConfigViolation::NonFinite(_))) {
            if self.m_l >= self.m_h {
                out.push(ConfigViolation::ThresholdOrder { m_l: self.m_l, m_h: self.m_h });
            }
            if self.m_l < 0.0 || self.m_h > 1.0 {
                out.push(ConfigViolation::ThresholdRange { m_l: self.m_l, m_h: self.m_h });
            }
            if self.d_o < 0.0 {
                out.push(ConfigViolation::NegativeOffset(self.d_o));
            }
            if self.m_h + self.d_o > 1.0 {
                out.push(ConfigViolation::DutyHeadroom { m_h: self.m_h, d_o: self.d_o });
            }
        }
        out
    }

    pub(crate) fn check(&self) -> Result<()> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }
}

/// Returns the configuration unchanged when all invariants hold.
pub fn validate_config(cfg: DriveConfig) -> Result<DriveConfig> {
    cfg.check().map(|()| cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ConfigViolation {
    TooFewPhases(usize),
    NonFinite(&'static str),
    ThresholdOrder { m_l: f64, m_h: f64 },
    ThresholdRange { m_l: f64, m_h: f64 },
    NegativeOffset(f64),
    DutyHeadroom { m_h: f64, d_o: f64 },
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewPhases(n) => write!(f, "n_phases < 3 (got {n})"),
            Self::NonFinite(name) => write!(f, "{name} is not finite"),
            Self::ThresholdOrder { m_l, m_h } => write!(f, "m_l ≥ m_h (m_l = {m_l}, m_h = {m_h})"),
            Self::ThresholdRange { m_l, m_h } => {
                write!(f, "thresholds outside [0, 1] (m_l = {m_l}, m_h = {m_h})")
            }
            Self::NegativeOffset(d_o) => write!(f, "d_o < 0 (got {d_o})"),
            Self::DutyHeadroom { m_h, d_o } => write!(f, "m_h + d_o > 1 (m_h = {m_h}, d_o = {d_o})"),
        }
    }
}
