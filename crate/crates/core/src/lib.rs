//! Inverter pulse-width-modulation commutation.
//!
//! Analytic duty-cycle synthesis for SPWM, third-harmonic injection, discontinuous
//! (phase grounding, with and without commutation offset), continuous space vector
//! and adaptive PWM, together with an idealized center-aligned carrier-comparison
//! inverter and a DFT-based spectral analyzer used to check waveform properties.
//!
//! All angles are radians. Duty cycles are dimensionless, nominally in `[0, 1]`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod command;
pub mod commutation;
mod error;
pub mod frames;
pub mod io;
pub mod sim;
pub mod spectral;
pub mod timing;

pub use command::{to_polar, validate_config, ConfigViolation, DriveConfig, PolarCommand, VoltageCommand};
pub use commutation::{
    apwm_duty, blend_factor, commutation_offset, cpwm_duty, dpwm_duty, dpwm_offset_duty,
    duty_waveform, spwm_duty, thpwm_duty, DutyVector, DutyWaveform, Technique,
};
pub use error::{Error, Result};
pub use frames::{line_to_phase, phase_to_line, wrap, ElectricalAngle, Frame, Polarity};
pub use sim::{
    line_to_line, period_averages, switching_count, synthesize, utilization_report, CarrierConfig,
    LineToLine, SwitchedWaveform,
};
pub use spectral::{analyze, dominant_switching_component, harmonic, Spectrum, SwitchingBand};
pub use timing::{dithered_periods, duty_to_times, PeriodDither, SwitchTiming, TimebaseConfig};
