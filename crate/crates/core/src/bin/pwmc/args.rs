use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pwm_commutation::io::{CommandInput, ConfigFile, RunManifest};
use pwm_commutation::{CarrierConfig, DriveConfig, Frame, Polarity, Technique};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "pwmc", version, about = "Inverter PWM commutation: duty cycles, switched waveforms, spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Duty cycles over one electrical revolution.
    Duty(DutyArgs),
    /// Carrier-comparison inverter waveforms with a JSON summary.
    Simulate(CommonArgs),
    /// Sweep the modulation index: ramps, utilization, dominant switching component.
    Report(ReportArgs),
    /// Convert a dq voltage command to modulation index and phase advance.
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

fn parse_technique(s: &str) -> Result<Technique, String> {
    s.parse().map_err(|e: pwm_commutation::Error| e.to_string())
}

fn parse_frame(s: &str) -> Result<Frame, String> {
    s.parse().map_err(|e: pwm_commutation::Error| e.to_string())
}

fn parse_polarity(s: &str) -> Result<Polarity, String> {
    s.parse().map_err(|e: pwm_commutation::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, default_value = "spwm", value_parser = parse_technique)]
    pub technique: Technique,
    /// Modulation index.
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Phase advance, radians.
    #[arg(long = "delta-rad", allow_negative_numbers = true)]
    pub delta_rad: Option<f64>,
    /// d-axis voltage command (use with --vq and --vdc instead of --m).
    #[arg(long, allow_negative_numbers = true)]
    pub vd: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub vq: Option<f64>,
    /// Estimated DC-link voltage for the dq command.
    #[arg(long, allow_negative_numbers = true)]
    pub vdc: Option<f64>,
    #[arg(long)]
    pub phases: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub ml: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mh: Option<f64>,
    /// Commutation offset magnitude.
    #[arg(long = "do", allow_negative_numbers = true)]
    pub d_o: Option<f64>,
    #[arg(long)]
    pub blend_swap: bool,
    /// Frame of the position grid.
    #[arg(long, default_value = "phase", value_parser = parse_frame)]
    pub frame: Frame,
    #[arg(long, default_value = "+1", allow_hyphen_values = true, value_parser = parse_polarity)]
    pub polarity: Polarity,
    /// PWM periods per electrical revolution.
    #[arg(long)]
    pub f_ratio: Option<usize>,
    /// Grid points per revolution (duty) or per PWM period (simulate, report).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Nominal PWM period, seconds.
    #[arg(long = "tp-s")]
    pub tp_s: Option<f64>,
    /// PWM period dither amplitude, seconds.
    #[arg(long = "dither-s")]
    pub dither_s: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for output files; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run manifest written by an earlier run; replaces every option except --out and --format.
    #[arg(long, conflicts_with = "config")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DutyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated modulation indices; defaults to 0, 0.1, ..., 1.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub sweep: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub vd: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub vq: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub vdc: f64,
}

pub const DEFAULT_DUTY_SAMPLES: usize = 360;

pub enum SamplesRole {
    PerRevolution,
    PerPwmPeriod,
}

impl CommonArgs {
    /// Defaults, then the config file, then flags.
    pub fn manifest(&self, role: SamplesRole, outputs: Vec<String>) -> Result<RunManifest, CliError> {
        if let Some(path) = &self.manifest {
            let mut manifest = RunManifest::from_json(&read(path)?)?;
            manifest.outputs = outputs;
            return Ok(manifest);
        }
        let mut config = DriveConfig::default();
        let mut carrier = CarrierConfig::default();
        if let Some(path) = &self.config {
            ConfigFile::parse(&read(path)?)?.apply(&mut config, &mut carrier);
        }
        override_with(&mut config.n_phases, self.phases);
        override_with(&mut config.m_l, self.ml);
        override_with(&mut config.m_h, self.mh);
        override_with(&mut config.d_o, self.d_o);
        config.blend_swap |= self.blend_swap;
        override_with(&mut carrier.f_ratio, self.f_ratio);
        override_with(&mut carrier.timebase.t_p_nominal, self.tp_s);
        override_with(&mut carrier.timebase.dither_amplitude, self.dither_s);
        override_with(&mut carrier.timebase.seed, self.seed);

        let samples = match role {
            SamplesRole::PerRevolution => self.samples.unwrap_or(DEFAULT_DUTY_SAMPLES),
            SamplesRole::PerPwmPeriod => {
                override_with(&mut carrier.samples_per_period, self.samples);
                carrier.samples_per_period
            }
        };

        let manifest = RunManifest {
            config,
            carrier,
            technique: self.technique,
            command: self.command_input()?,
            frame: self.frame,
            polarity: self.polarity,
            samples,
            outputs,
            seed: carrier.timebase.seed,
        };
        Ok(manifest)
    }

    fn command_input(&self) -> Result<CommandInput, CliError> {
        let dq = [self.vd, self.vq, self.vdc];
        let polar_given = self.m.is_some() || self.delta_rad.is_some();
        match dq {
            [None, None, None] => Ok(CommandInput::Polar {
                m: self.m.unwrap_or(0.0),
                delta_rad: self.delta_rad.unwrap_or(0.0),
            }),
            [Some(v_d), Some(v_q), Some(v_dc)] if !polar_given => Ok(CommandInput::Voltage { v_d, v_q, v_dc }),
            [Some(_), Some(_), Some(_)] => Err(CliError::Usage(
                "give either --m/--delta-rad or --vd/--vq/--vdc, not both".into(),
            )),
            _ => Err(CliError::Usage("--vd, --vq and --vdc must be given together".into())),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn override_with<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
