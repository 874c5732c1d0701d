use serde::{Deserialize, Serialize};

use crate::command::{to_polar, DriveConfig, PolarCommand, VoltageCommand};
use crate::commutation::Technique;
use crate::error::{Error, Result};
use crate::frames::{Frame, Polarity};
use crate::sim::CarrierConfig;

/// Either a polar command or a synchronous-frame voltage command, never both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandInput {
    Polar { m: f64, delta_rad: f64 },
    Voltage { v_d: f64, v_q: f64, v_dc: f64 },
}

impl CommandInput {
    pub fn to_polar(&self) -> Result<PolarCommand> {
        match *self {
            CommandInput::Polar { m, delta_rad } => PolarCommand::new(m, delta_rad),
            CommandInput::Voltage { v_d, v_q, v_dc } => to_polar(&VoltageCommand::new(v_d, v_q, v_dc)),
        }
    }
}

/// Everything needed to reproduce one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config: DriveConfig,
    pub carrier: CarrierConfig,
    pub technique: Technique,
    pub command: CommandInput,
    pub frame: Frame,
    pub polarity: Polarity,
    /// Grid points per electrical revolution for duty waveforms.
    pub samples: usize,
    pub outputs: Vec<String>,
    pub seed: u64,
}

impl RunManifest {
    pub fn from_json(json: &str) -> Result<Self> {
        let manifest: Self = serde_json::from_str(json).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// Checks the configurations and command; returns the resolved polar command.
    pub fn validate(&self) -> Result<PolarCommand> {
        self.config.check()?;
        self.effective_carrier().validate()?;
        if !self.technique.supports(self.config.n_phases) {
            return Err(Error::Unsupported(format!(
                "{} requires three phases (n_phases = {})",
                self.technique, self.config.n_phases
            )));
        }
        if self.frame == Frame::Line && self.config.n_phases != 3 {
            return Err(Error::Unsupported("line-frame positions require three phases".into()));
        }
        if self.samples < 2 {
            return Err(Error::domain("samples must be >= 2"));
        }
        self.command.to_polar()
    }

    /// Carrier configuration with the manifest seed applied to the dither.
    pub fn effective_carrier(&self) -> CarrierConfig {
        let mut c = self.carrier;
        c.timebase.seed = self.seed;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        RunManifest {
            config: DriveConfig::default(),
            carrier: CarrierConfig::default(),
            technique: Technique::Cpwm,
            command: CommandInput::Voltage { v_d: 3.0, v_q: 4.0, v_dc: 10.0 },
            frame: Frame::Phase,
            polarity: Polarity::Positive,
            samples: 360,
            outputs: vec!["duty.csv".into()],
            seed: 9,
        }
    }

    #[test]
    fn json_round_trip() {
        let m = manifest();
        assert_eq!(RunManifest::from_json(&m.to_json()).unwrap(), m);
        assert!((m.validate().unwrap().m() - 0.5).abs() < 1e-15);
        assert_eq!(m.effective_carrier().timebase.seed, 9);
    }

    #[test]
    fn unsupported_combinations() {
        let mut m = manifest();
        m.config.n_phases = 5;
        m.technique = Technique::Thpwm;
        assert!(matches!(m.validate(), Err(Error::Unsupported(_))));
        m.technique = Technique::Spwm;
        m.frame = Frame::Line;
        assert!(matches!(m.validate(), Err(Error::Unsupported(_))));
    }
}
