//! Line and phase electrical position frames.
//!
//! Commutation formulas are written in terms of the phase position. Position
//! estimators and calibration usually deliver the line position, which for a
//! three-phase machine leads the phase position by `polarity * pi/6`. Tagging
//! every angle with its frame turns a forgotten conversion into an error
//! instead of a silent 30 degree shift.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset between line and phase position for a three-phase machine.
pub const LINE_PHASE_OFFSET: f64 = PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Line,
    Phase,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Line => "line",
            Frame::Phase => "phase",
        })
    }
}

impl FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "line" => Ok(Frame::Line),
            "phase" => Ok(Frame::Phase),
            other => Err(Error::Parse(format!("unknown frame `{other}` (expected phase or line)"))),
        }
    }
}

/// Electromechanical polarity of the machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Polarity {
    #[default]
    #[serde(rename = "+1")]
    Positive,
    #[serde(rename = "-1")]
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "+1",
            Polarity::Negative => "-1",
        })
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" | "+" | "positive" => Ok(Polarity::Positive),
            "-1" | "-" | "negative" => Ok(Polarity::Negative),
            other => Err(Error::Parse(format!("unknown polarity `{other}` (expected +1 or -1)"))),
        }
    }
}

/// An electrical angle in `[0, 2 pi)` tagged with its frame and machine polarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElectricalAngle {
    value: f64,
    frame: Frame,
    polarity: Polarity,
}

impl ElectricalAngle {
    pub fn new(raw: f64, frame: Frame, polarity: Polarity) -> Result<Self> {
        Ok(Self { value: wrap(raw)?, frame, polarity })
    }

    /// Phase-frame angle with positive polarity.
    pub fn phase(raw: f64) -> Result<Self> {
        Self::new(raw, Frame::Phase, Polarity::Positive)
    }

    pub fn line(raw: f64, polarity: Polarity) -> Result<Self> {
        Self::new(raw, Frame::Line, polarity)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    /// The same physical position expressed in the phase frame.
    pub fn into_phase(self, n_phases: usize) -> Result<Self> {
        match self.frame {
            Frame::Phase => Ok(self),
            Frame::Line => line_to_phase(self, n_phases),
        }
    }

    pub(crate) fn require(&self, frame: Frame) -> Result<()> {
        if self.frame == frame {
            Ok(())
        } else {
            Err(Error::Frame { expected: frame, found: self.frame })
        }
    }
}

/// Wraps a finite angle into `[0, 2 pi)`.
pub fn wrap(raw: f64) -> Result<f64> {
    if !raw.is_finite() {
        return Err(Error::domain(format!("angle must be finite, got {raw}")));
    }
    let w = raw.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    Ok(if w >= TAU { 0.0 } else { w })
}

fn require_three_phase(n_phases: usize) -> Result<()> {
    if n_phases == 3 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "line/phase position conversion is only defined for three-phase machines (n_phases = {n_phases})"
        )))
    }
}

/// `theta_line = wrap(theta_phase + polarity * pi/6)`.
pub fn phase_to_line(angle: ElectricalAngle, n_phases: usize) -> Result<ElectricalAngle> {
    angle.require(Frame::Phase)?;
    require_three_phase(n_phases)?;
    ElectricalAngle::new(angle.value + angle.polarity.sign() * LINE_PHASE_OFFSET, Frame::Line, angle.polarity)
}

/// `theta_phase = wrap(theta_line - polarity * pi/6)`.
pub fn line_to_phase(angle: ElectricalAngle, n_phases: usize) -> Result<ElectricalAngle> {
    angle.require(Frame::Line)?;
    require_three_phase(n_phases)?;
    ElectricalAngle::new(angle.value - angle.polarity.sign() * LINE_PHASE_OFFSET, Frame::Phase, angle.polarity)
}
