use std::path::{Path, PathBuf};

use pwm_commutation::commutation::duty_waveform_in_frame;
use pwm_commutation::io::{duty_table, spectrum_table, waveform_table, RunManifest, Table};
use pwm_commutation::sim::{duty_utilization, phase_label, synthesize_in_frame};
use pwm_commutation::spectral::SwitchingComponent;
use pwm_commutation::{
    blend_factor, commutation_offset, dominant_switching_component, harmonic, line_to_line, period_averages,
    switching_count, to_polar, CarrierConfig, DriveConfig, DutyWaveform, ElectricalAngle, PolarCommand,
    SwitchedWaveform, SwitchingBand, Technique, VoltageCommand,
};
use serde::Serialize;

use crate::args::{CommonArgs, ConvertArgs, DutyArgs, Format, ReportArgs, SamplesRole};
use crate::svg::{line_plot, Series};
use crate::CliError;

const DUTY_UTILIZATION_SAMPLES: usize = 3600;

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

/// Writes `files` and `manifest.json` into `out`, or prints the first file to stdout.
fn emit(out: Option<&Path>, manifest: &RunManifest, files: Vec<(String, String)>) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("manifest.json"), manifest.to_json() + "\n")?;
            for (name, body) in files {
                let path: PathBuf = dir.join(&name);
                std::fs::write(&path, body)?;
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            if let Some((_, body)) = files.into_iter().next() {
                print!("{body}");
            }
        }
    }
    Ok(())
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn overmodulation_warning(polar: &PolarCommand) -> Option<String> {
    polar
        .is_overmodulated()
        .then(|| format!("overmodulation: m = {} exceeds 1", polar.m()))
}

pub fn duty(args: &DutyArgs) -> Result<(), CliError> {
    let c = &args.common;
    let format = c.format.unwrap_or(Format::Csv);
    let name = format!("duty.{}", format.extension());
    let manifest = c.manifest(SamplesRole::PerRevolution, vec![name.clone()])?;
    let polar = manifest.validate()?;
    let wf = duty_waveform_in_frame(
        manifest.technique,
        &polar,
        &manifest.config,
        manifest.samples,
        manifest.frame,
        manifest.polarity,
    )?;

    let mut warnings: Vec<String> = overmodulation_warning(&polar).into_iter().collect();
    let saturated = wf.points.iter().filter(|(_, d)| !d.in_bounds()).count();
    if saturated > 0 {
        warnings.push(format!("{saturated} grid points have duties outside [0, 1]"));
    }

    let body = match format {
        Format::Csv => {
            print_warnings(&warnings);
            duty_table(&wf).to_csv()
        }
        Format::Svg => {
            print_warnings(&warnings);
            duty_svg(&manifest, &wf)
        }
        Format::Json => to_json(&DutyDocument {
            manifest: &manifest,
            m: polar.m(),
            delta_rad: polar.delta(),
            theta_rad: wf.thetas().collect(),
            duties: wf.points.iter().map(|(_, d)| d.as_slice().to_vec()).collect(),
            warnings,
        }),
    };
    emit(c.out.as_deref(), &manifest, vec![(name, body)])
}

#[derive(Serialize)]
struct DutyDocument<'a> {
    manifest: &'a RunManifest,
    m: f64,
    delta_rad: f64,
    theta_rad: Vec<f64>,
    duties: Vec<Vec<f64>>,
    warnings: Vec<String>,
}

fn duty_svg(manifest: &RunManifest, wf: &DutyWaveform) -> String {
    let x: Vec<f64> = wf.thetas().collect();
    let series: Vec<Series> = (0..wf.n_phases())
        .map(|r| Series { label: format!("d_{}", r + 1), x: x.clone(), y: wf.phase_trace(r) })
        .collect();
    line_plot(
        &format!("{} duty cycles ({} frame)", manifest.technique, manifest.frame),
        "electrical position [rad]",
        "duty",
        &series,
    )
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    manifest: &'a RunManifest,
    m: f64,
    delta_rad: f64,
    fundamental_hz: f64,
    switching_hz: f64,
    samples: usize,
    period_averages: Vec<Vec<f64>>,
    period_average_max_error_v: f64,
    switching_counts: Vec<usize>,
    switch_transitions_total: usize,
    utilization: Option<f64>,
    dominant_switching_component: SwitchingComponent,
    warnings: Vec<String>,
}

fn switching_band(wf: &SwitchedWaveform, carrier: &CarrierConfig) -> SwitchingBand {
    SwitchingBand::sidebands(1, 3, wf.fundamental_freq, carrier.f_ratio)
}

pub fn simulate(args: &CommonArgs) -> Result<(), CliError> {
    let format = args.format.unwrap_or(Format::Json);
    let mut outputs = vec!["summary.json".to_string(), "waveform.csv".to_string(), "spectrum.csv".to_string()];
    if format == Format::Svg {
        outputs.push("waveform.svg".into());
    }
    let manifest = args.manifest(SamplesRole::PerPwmPeriod, outputs)?;
    let polar = manifest.validate()?;
    let carrier = manifest.effective_carrier();
    let wf = synthesize_in_frame(
        manifest.technique,
        &polar,
        &manifest.config,
        &carrier,
        manifest.frame,
        manifest.polarity,
    )?;
    let ll = line_to_line(&wf);
    let spectrum = wf.spectrum(&ll.traces[0])?;
    let averages = period_averages(&wf);
    let max_error = wf
        .periods
        .iter()
        .zip(&averages)
        .flat_map(|(p, avg)| p.duties.iter().zip(avg).map(|(d, v)| (v - d.clamp(0.0, 1.0) * wf.v_dc).abs()))
        .fold(0.0, f64::max);
    let counts = switching_count(&wf);
    let utilization = if polar.m() > 0.0 {
        Some(harmonic(&spectrum, wf.fundamental_freq, 1)? / wf.v_dc)
    } else {
        None
    };
    let dominant = dominant_switching_component(&spectrum, wf.switching_freq, &switching_band(&wf, &carrier))?;

    let mut warnings: Vec<String> = overmodulation_warning(&polar).into_iter().collect();
    let saturated = wf.periods.iter().filter(|p| p.saturated).count();
    if saturated > 0 {
        warnings.push(format!("{saturated} PWM periods clamped duties into [0, 1]"));
    }

    let summary = to_json(&SimulationSummary {
        manifest: &manifest,
        m: polar.m(),
        delta_rad: polar.delta(),
        fundamental_hz: wf.fundamental_freq,
        switching_hz: wf.switching_freq,
        samples: wf.t.len(),
        period_averages: averages,
        period_average_max_error_v: max_error,
        switch_transitions_total: counts.iter().sum(),
        switching_counts: counts,
        utilization,
        dominant_switching_component: dominant,
        warnings,
    });
    let waveform = waveform_table(&wf, &ll).to_csv();
    let spectrum_csv = spectrum_table(&spectrum).to_csv();

    let mut files = vec![
        ("summary.json".to_string(), summary),
        ("waveform.csv".to_string(), waveform),
        ("spectrum.csv".to_string(), spectrum_csv),
    ];
    match format {
        Format::Json => {}
        Format::Csv => files.rotate_left(1),
        Format::Svg => {
            let svg = waveform_svg(&manifest, &wf, &ll.traces[0]);
            files.insert(0, ("waveform.svg".to_string(), svg));
        }
    }
    emit(args.out.as_deref(), &manifest, files)
}

fn waveform_svg(manifest: &RunManifest, wf: &SwitchedWaveform, v_ab: &[f64]) -> String {
    let mut series: Vec<Series> = wf
        .v_pg
        .iter()
        .enumerate()
        .map(|(r, trace)| Series { label: format!("v_{}", phase_label(r)), x: wf.t.clone(), y: trace.clone() })
        .collect();
    series.push(Series { label: "v_ab".into(), x: wf.t.clone(), y: v_ab.to_vec() });
    line_plot(
        &format!("{} switched voltages", manifest.technique),
        "time [s]",
        "voltage [V]",
        &series,
    )
}

#[derive(Serialize)]
struct ReferenceDuties {
    theta_rad: f64,
    apwm: Vec<f64>,
    dpwm_offset: Vec<f64>,
    cpwm: Vec<f64>,
}

#[derive(Serialize)]
struct ReportRecord {
    m: f64,
    f: f64,
    b: f64,
    utilization_duty: Option<f64>,
    utilization: Option<f64>,
    dominant_switching_component: SwitchingComponent,
    reference_duties: ReferenceDuties,
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    manifest: &'a RunManifest,
    technique: Technique,
    records: Vec<ReportRecord>,
    warnings: Vec<String>,
}

fn default_sweep() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

fn report_record(
    technique: Technique,
    m: f64,
    delta: f64,
    cfg: &DriveConfig,
    carrier: &CarrierConfig,
) -> Result<ReportRecord, CliError> {
    let polar = PolarCommand::new(m, delta)?;
    let wf = pwm_commutation::synthesize(technique, &polar, cfg, carrier)?;
    let ll = line_to_line(&wf);
    let spectrum = wf.spectrum(&ll.traces[0])?;
    let (utilization_duty, utilization) = if m > 0.0 {
        (
            Some(duty_utilization(technique, m, cfg, DUTY_UTILIZATION_SAMPLES)?),
            Some(harmonic(&spectrum, wf.fundamental_freq, 1)? / wf.v_dc),
        )
    } else {
        (None, None)
    };
    let theta = ElectricalAngle::phase(0.0)?;
    let at = |t: Technique| -> Result<Vec<f64>, CliError> { Ok(t.duty(&theta, &polar, cfg)?.into_vec()) };
    Ok(ReportRecord {
        m,
        f: commutation_offset(m, cfg),
        b: blend_factor(m, cfg),
        utilization_duty,
        utilization,
        dominant_switching_component: dominant_switching_component(
            &spectrum,
            wf.switching_freq,
            &switching_band(&wf, carrier),
        )?,
        reference_duties: ReferenceDuties {
            theta_rad: 0.0,
            apwm: at(Technique::Apwm)?,
            dpwm_offset: at(Technique::DpwmOffset)?,
            cpwm: at(Technique::Cpwm)?,
        },
    })
}

pub fn report(args: &ReportArgs) -> Result<(), CliError> {
    let c = &args.common;
    let format = c.format.unwrap_or(Format::Json);
    let name = format!("report.{}", format.extension());
    let manifest = c.manifest(SamplesRole::PerPwmPeriod, vec![name.clone()])?;
    let polar = manifest.validate()?;
    let sweep = args.sweep.clone().unwrap_or_else(default_sweep);
    if let Some(bad) = sweep.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(CliError::Usage(format!("sweep value {bad} outside [0, 1]")));
    }
    let carrier = manifest.effective_carrier();
    let records = sweep
        .iter()
        .map(|&m| report_record(manifest.technique, m, polar.delta(), &manifest.config, &carrier))
        .collect::<Result<Vec<_>, _>>()?;

    let body = match format {
        Format::Json => to_json(&ReportDocument {
            manifest: &manifest,
            technique: manifest.technique,
            records,
            warnings: Vec::new(),
        }),
        Format::Csv => {
            let mut t = Table::new(vec!["m".into(), "f".into(), "b".into()]);
            t.rows = records.iter().map(|r| vec![r.m, r.f, r.b]).collect();
            t.to_csv()
        }
        Format::Svg => {
            let x: Vec<f64> = records.iter().map(|r| r.m).collect();
            let mut series = vec![
                Series { label: "f(m)".into(), x: x.clone(), y: records.iter().map(|r| r.f).collect() },
                Series { label: "b(m)".into(), x: x.clone(), y: records.iter().map(|r| r.b).collect() },
            ];
            let (ux, uy): (Vec<f64>, Vec<f64>) =
                records.iter().filter_map(|r| r.utilization_duty.map(|u| (r.m, u))).unzip();
            series.push(Series { label: "utilization".into(), x: ux, y: uy });
            line_plot("modulation-index sweep", "modulation index", "value", &series)
        }
    };
    emit(c.out.as_deref(), &manifest, vec![(name, body)])
}

#[derive(Serialize)]
struct ConvertOutput {
    m: f64,
    delta_rad: f64,
}

pub fn convert(args: &ConvertArgs) -> Result<(), CliError> {
    let p = to_polar(&VoltageCommand::new(args.vd, args.vq, args.vdc))?;
    let mut out = serde_json::to_string(&ConvertOutput { m: p.m(), delta_rad: p.delta() }).expect("serializes");
    out.push('\n');
    print!("{out}");
    Ok(())
}
