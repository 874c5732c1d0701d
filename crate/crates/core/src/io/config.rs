use serde::{Deserialize, Serialize};

use crate::command::DriveConfig;
use crate::error::{Error, Result};
use crate::sim::CarrierConfig;

/// JSON configuration document. Missing keys keep their current values.
///
/// ```json
/// { "n_phases": 3, "m_l": 0.4, "m_h": 0.6, "d_o": 0.05, "blend_swap": false,
///   "carrier": { "f_ratio": 21, "samples_per_period": 1000, "v_dc": 12.0,
///                "t_p_s": 5e-5, "dither_s": 0.0, "seed": 0 } }
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_phases: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_o: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blend_swap: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier: Option<CarrierFile>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_ratio: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_period: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_dc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_p_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dither_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// A fully populated document describing `drive` and `carrier`.
    pub fn from_parts(drive: &DriveConfig, carrier: &CarrierConfig) -> Self {
        Self {
            n_phases: Some(drive.n_phases),
            m_l: Some(drive.m_l),
            m_h: Some(drive.m_h),
            d_o: Some(drive.d_o),
            blend_swap: Some(drive.blend_swap),
            carrier: Some(CarrierFile {
                f_ratio: Some(carrier.f_ratio),
                samples_per_period: Some(carrier.samples_per_period),
                v_dc: Some(carrier.v_dc),
                t_p_s: Some(carrier.timebase.t_p_nominal),
                dither_s: Some(carrier.timebase.dither_amplitude),
                seed: Some(carrier.timebase.seed),
            }),
        }
    }

    /// Overwrites every field present in the document.
    pub fn apply(&self, drive: &mut DriveConfig, carrier: &mut CarrierConfig) {
        set(&mut drive.n_phases, self.n_phases);
        set(&mut drive.m_l, self.m_l);
        set(&mut drive.m_h, self.m_h);
        set(&mut drive.d_o, self.d_o);
        set(&mut drive.blend_swap, self.blend_swap);
        if let Some(c) = &self.carrier {
            set(&mut carrier.f_ratio, c.f_ratio);
            set(&mut carrier.samples_per_period, c.samples_per_period);
            set(&mut carrier.v_dc, c.v_dc);
            set(&mut carrier.timebase.t_p_nominal, c.t_p_s);
            set(&mut carrier.timebase.dither_amplitude, c.dither_s);
            set(&mut carrier.timebase.seed, c.seed);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Parses a config document over the defaults and validates the result.
pub fn load_config(json: &str) -> Result<(DriveConfig, CarrierConfig)> {
    let file = ConfigFile::parse(json)?;
    let mut drive = DriveConfig::default();
    let mut carrier = CarrierConfig::default();
    file.apply(&mut drive, &mut carrier);
    drive.check()?;
    carrier.validate()?;
    Ok((drive, carrier))
}
