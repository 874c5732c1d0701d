//! File formats: JSON drive/carrier configuration, CSV tables and run manifests.

mod config;
mod manifest;
mod table;

pub use config::{load_config, CarrierFile, ConfigFile};
pub use manifest::{CommandInput, RunManifest};
pub use table::{
    duty_table, fmt_f64, parse_duty_csv, parse_spectrum_csv, parse_waveform_csv, spectrum_table, waveform_table,
    Table,
};
