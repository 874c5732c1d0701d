//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::process::{Command, ExitCode};

use pwm_commutation::commutation::duty_waveform_in_frame;
use pwm_commutation::sim::duty_utilization;
use pwm_commutation::*;

const ANGLES: usize = 3600;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

type Check = Result<Outcome>;
type Criterion = (&'static str, fn() -> Check);

fn m_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

fn polar(m: f64) -> PolarCommand {
    PolarCommand::new(m, 0.0).unwrap()
}

fn cfg(n_phases: usize) -> DriveConfig {
    validate_config(DriveConfig { n_phases, ..DriveConfig::default() }).unwrap()
}

fn wave(t: Technique, m: f64, c: &DriveConfig) -> Result<DutyWaveform> {
    duty_waveform(t, &polar(m), c, ANGLES)
}

fn duty_bounds() -> Check {
    let c = cfg(3);
    let mut violations = 0;
    let mut worst = (0.0f64, 1.0f64);
    for t in Technique::ALL {
        for m in m_grid() {
            for (_, d) in wave(t, m, &c)?.points {
                violations += d.as_slice().iter().filter(|v| !(0.0..=1.0).contains(*v)).count();
                worst = (worst.0.min(d.min()), worst.1.max(d.max()));
            }
        }
    }
    // Outside the criterion: five phases with the same gain, for the record.
    let c5 = cfg(5);
    let mut five = 0;
    for t in Technique::ALL.into_iter().filter(|t| t.supports(5)) {
        for m in m_grid() {
            five += wave(t, m, &c5)?.points.iter().filter(|(_, d)| !d.in_bounds()).count();
        }
    }
    Ok(Outcome::new(
        violations == 0,
        format!(
            "n=3: {violations} violations, duty range [{:.3e}, {}]; n=5 (informational): {five} grid points out of bounds",
            worst.0, worst.1
        ),
    ))
}

fn grounding() -> Check {
    let mut worst = 0.0f64;
    for n in [3, 5] {
        let c = cfg(n);
        for m in m_grid() {
            for (_, d) in wave(Technique::Dpwm, m, &c)?.points {
                worst = worst.max(d.min().abs());
            }
        }
    }
    Ok(Outcome::new(worst < 1e-12, format!("max |min duty| = {worst:.3e} (n=3, n=5)")))
}

fn cpwm_symmetry() -> Check {
    let mut worst = 0.0f64;
    for n in [3, 5] {
        let c = cfg(n);
        for m in m_grid() {
            for (_, d) in wave(Technique::Cpwm, m, &c)?.points {
                worst = worst.max((d.min() + d.max() - 1.0).abs());
            }
        }
    }
    Ok(Outcome::new(worst < 1e-12, format!("max |min + max - 1| = {worst:.3e}")))
}

fn line_to_line_equivalence() -> Check {
    let c = cfg(3);
    let gain = 2.0 / 3f64.sqrt();
    let mut worst = 0.0f64;
    for m in m_grid() {
        let base = wave(Technique::Spwm, m, &c)?;
        for t in [Technique::Thpwm, Technique::Dpwm, Technique::DpwmOffset, Technique::Cpwm] {
            let w = wave(t, m, &c)?;
            for ((_, s), (_, d)) in base.points.iter().zip(&w.points) {
                for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                    worst = worst.max(((d[i] - d[j]) - gain * (s[i] - s[j])).abs());
                }
            }
        }
    }
    Ok(Outcome::new(worst < 1e-12, format!("max pairwise error = {worst:.3e}")))
}

fn third_harmonic() -> Check {
    let c = cfg(3);
    let (mut ll_worst, mut phase_worst) = (0.0f64, 0.0f64);
    for m in m_grid().into_iter().filter(|m| *m > 0.0) {
        let w = wave(Technique::Thpwm, m, &c)?;
        let (a, b) = (w.phase_trace(0), w.phase_trace(1));
        let ll: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        ll_worst = ll_worst.max(harmonic(&analyze(&ll, ANGLES as f64)?, 1.0, 3)?);
        let expected = m / 2.0 * (2.0 / 3f64.sqrt()) / 6.0;
        let got = harmonic(&analyze(&a, ANGLES as f64)?, 1.0, 3)?;
        phase_worst = phase_worst.max((got - expected).abs());
    }
    Ok(Outcome::new(
        ll_worst < 1e-9 && phase_worst < 1e-9,
        format!("line-to-line k=3 max {ll_worst:.3e}; per-phase k=3 max error {phase_worst:.3e}"),
    ))
}

fn utilization() -> Check {
    let c = cfg(3);
    let carrier = CarrierConfig::default();
    let expected = |t: Technique, m: f64| if t == Technique::Spwm { 3f64.sqrt() / 2.0 * m } else { m };
    let (mut duty_err, mut switched_rel, mut ratio_rel) = (0.0f64, 0.0f64, 0.0f64);
    for m in [0.2, 0.5, 0.8, 1.0] {
        for t in [Technique::Spwm, Technique::Thpwm, Technique::Dpwm, Technique::Cpwm] {
            let u = duty_utilization(t, m, &c, ANGLES)?;
            duty_err = duty_err.max((u - expected(t, m)).abs());
            let s = utilization_report(t, m, &c, &carrier)?;
            switched_rel = switched_rel.max((s / expected(t, m) - 1.0).abs());
        }
        let spwm = utilization_report(Technique::Spwm, m, &c, &carrier)?;
        for t in [Technique::Thpwm, Technique::Dpwm, Technique::Cpwm] {
            let ratio = utilization_report(t, m, &c, &carrier)? / spwm;
            ratio_rel = ratio_rel.max((ratio / (2.0 / 3f64.sqrt()) - 1.0).abs());
        }
    }
    Ok(Outcome::new(
        duty_err < 1e-9 && switched_rel < 5e-3 && ratio_rel < 5e-3,
        format!(
            "duty-level max error {duty_err:.3e}; switched (f_ratio=21) max relative error {:.3}%; ratio to SPWM max deviation {:.3}%",
            100.0 * switched_rel,
            100.0 * ratio_rel
        ),
    ))
}

fn averaging() -> Check {
    let c = cfg(3);
    let carrier = CarrierConfig::default();
    let tol = carrier.v_dc / carrier.samples_per_period as f64;
    let (mut worst, mut periods, mut bad) = (0.0f64, 0usize, 0usize);
    for t in Technique::ALL {
        for m in [0.2, 0.8] {
            let wf = synthesize(t, &polar(m), &c, &carrier)?;
            for (p, avg) in wf.periods.iter().zip(period_averages(&wf)) {
                periods += 1;
                let err = p.duties.iter().zip(&avg).map(|(d, v)| (v - d * wf.v_dc).abs()).fold(0.0, f64::max);
                worst = worst.max(err);
                bad += usize::from(err > tol);
            }
        }
    }
    Ok(Outcome::new(
        bad == 0,
        format!("{periods} periods, {bad} outside v_dc/N = {tol:.3e} V, max error {worst:.3e} V"),
    ))
}

fn dominant(t: Technique, m: f64, c: &DriveConfig, carrier: &CarrierConfig) -> Result<usize> {
    let wf = synthesize(t, &polar(m), c, carrier)?;
    let ll = line_to_line(&wf);
    let spec = wf.spectrum(&ll.traces[0])?;
    let band = SwitchingBand::sidebands(1, 2, wf.fundamental_freq, carrier.f_ratio);
    Ok(dominant_switching_component(&spec, wf.switching_freq, &band)?.multiple)
}

fn range_of(ms: &[f64]) -> String {
    match (ms.first(), ms.last()) {
        (Some(a), Some(b)) => format!("[{a:.2}, {b:.2}] ({} of the sweep points)", ms.len()),
        _ => "none".into(),
    }
}

fn spectrum_claim() -> Check {
    let c = cfg(3);
    let carrier = CarrierConfig::default();
    let sweep: Vec<f64> = (1..=19).map(|k| k as f64 * 0.05).collect();
    let (mut cpwm_two, mut dpwm_one, mut both) = (Vec::new(), Vec::new(), Vec::new());
    for &m in &sweep {
        let cp = dominant(Technique::Cpwm, m, &c, &carrier)? == 2;
        let dp = dominant(Technique::Dpwm, m, &c, &carrier)? == 1;
        if cp {
            cpwm_two.push(m);
        }
        if dp {
            dpwm_one.push(m);
        }
        if cp && dp && (0.2 - 1e-12..=0.6 + 1e-12).contains(&m) {
            both.push(m);
        }
    }
    Ok(Outcome::new(
        !both.is_empty(),
        format!(
            "CPWM 2*f_sw dominant for m in {}; DPWM 1*f_sw dominant for m in {}; both within [0.2, 0.6]: {}",
            range_of(&cpwm_two),
            range_of(&dpwm_one),
            range_of(&both)
        ),
    ))
}

fn switching_count_ratio() -> Check {
    let c = cfg(3);
    let carrier = CarrierConfig { f_ratio: 64, ..CarrierConfig::default() };
    let total = |t: Technique| -> Result<usize> {
        Ok(switching_count(&synthesize(t, &polar(0.8), &c, &carrier)?).iter().sum())
    };
    let (d, cp) = (total(Technique::Dpwm)?, total(Technique::Cpwm)?);
    let ratio = d as f64 / cp as f64;
    let target = 2.0 / 3.0;
    Ok(Outcome::new(
        (ratio / target - 1.0).abs() <= 0.05,
        format!("DPWM {d} / CPWM {cp} = {ratio:.4} (target {target:.4} +/- 5%)"),
    ))
}

fn ramps() -> Check {
    let c = cfg(3);
    let (lo, hi) = (c.m_l, c.m_h);
    let eps = 1e-12;
    let points = [0.0, lo - eps, lo, (lo + hi) / 2.0, hi - eps, hi, 1.0];
    let expected = [1.0, 1.0, 1.0, 0.5, 0.0, 0.0, 0.0];
    let mut worst_mid = 0.0f64;
    let mut pass = true;
    for (name, ramp) in [("f", commutation_offset as fn(f64, &DriveConfig) -> f64), ("b", blend_factor)] {
        for (i, (&m, &e)) in points.iter().zip(&expected).enumerate() {
            let v = ramp(m, &c);
            let ok = match i {
                3 => {
                    worst_mid = worst_mid.max((v - e).abs());
                    (v - e).abs() < 1e-12
                }
                4 => v.abs() < 1e-9,
                _ => v == e,
            };
            if !ok {
                eprintln!("  {name}({m}) = {v}, expected {e}");
                pass = false;
            }
        }
    }
    let mut gap = 0.0f64;
    for ramp in [commutation_offset as fn(f64, &DriveConfig) -> f64, blend_factor] {
        for b in [lo, hi] {
            gap = gap.max((ramp(b + eps, &c) - ramp(b - eps, &c)).abs());
            gap = gap.max((ramp(b, &c) - ramp(b - eps, &c)).abs());
        }
    }
    pass &= gap < 1e-9;
    Ok(Outcome::new(pass, format!("midpoint error {worst_mid:.3e}; continuity gap {gap:.3e}")))
}

fn apwm() -> Check {
    let c = cfg(3);
    let mut exact = true;
    for m in [0.0, 0.1, 0.2, 0.3, 0.39] {
        exact &= values(&wave(Technique::Apwm, m, &c)?) == values(&wave(Technique::DpwmOffset, m, &c)?);
    }
    for m in [0.6, 0.7, 0.8, 0.9, 1.0] {
        exact &= values(&wave(Technique::Apwm, m, &c)?) == values(&wave(Technique::Cpwm, m, &c)?);
    }
    // One-sided linear extrapolation across each breakpoint.
    let h = 1e-6;
    let mut gap = 0.0f64;
    for b in [c.m_l, c.m_h] {
        let at = |m: f64| wave(Technique::Apwm, m, &c);
        let (w0, l1, l2, r1, r2) = (at(b)?, at(b - h)?, at(b - 2.0 * h)?, at(b + h)?, at(b + 2.0 * h)?);
        gap = gap.max(extrapolation_gap(&w0, &l1, &l2));
        gap = gap.max(extrapolation_gap(&w0, &r1, &r2));
    }
    Ok(Outcome::new(
        exact && gap < 1e-9,
        format!("endpoint equality: {exact}; sup-norm jump at breakpoints {gap:.3e} per step 1e-6"),
    ))
}

/// `|d(b) - (2 d(b -+ h) - d(b -+ 2h))|` in the sup norm.
fn extrapolation_gap(at: &DutyWaveform, near: &DutyWaveform, far: &DutyWaveform) -> f64 {
    at.points
        .iter()
        .zip(near.points.iter().zip(&far.points))
        .flat_map(|((_, a), ((_, n), (_, f)))| (0..a.len()).map(move |r| (a[r] - (2.0 * n[r] - f[r])).abs()))
        .fold(0.0, f64::max)
}

/// Duty vectors carry their technique, so compare the numbers only.
fn values(w: &DutyWaveform) -> Vec<Vec<f64>> {
    w.points.iter().map(|(_, d)| d.as_slice().to_vec()).collect()
}

fn frames() -> Check {
    let mut round_trip = 0.0f64;
    for k in 0..ANGLES {
        for pol in [Polarity::Positive, Polarity::Negative] {
            let raw = TAU * k as f64 / ANGLES as f64;
            let back = line_to_phase(phase_to_line(ElectricalAngle::new(raw, Frame::Phase, pol)?, 3)?, 3)?;
            let d = (back.value() - raw).rem_euclid(TAU);
            round_trip = round_trip.max(d.min(TAU - d));
        }
    }
    let c = cfg(3);
    let shift = ANGLES / 12;
    assert_eq!(shift as f64, ANGLES as f64 * (PI / 6.0) / TAU);
    let mut worst = 0.0f64;
    for pol in [Polarity::Positive, Polarity::Negative] {
        for t in Technique::ALL {
            for m in [0.3, 0.5, 0.9] {
                let p = polar(m);
                let line = duty_waveform_in_frame(t, &p, &c, ANGLES, Frame::Line, pol)?;
                let phase = duty_waveform(t, &p, &c, ANGLES)?;
                for (k, (_, dl)) in line.points.iter().enumerate() {
                    let j = match pol {
                        Polarity::Positive => (k + ANGLES - shift) % ANGLES,
                        Polarity::Negative => (k + shift) % ANGLES,
                    };
                    let dp = &phase.points[j].1;
                    for r in 0..3 {
                        worst = worst.max((dl[r] - dp[r]).abs());
                    }
                }
            }
        }
    }
    Ok(Outcome::new(
        round_trip < 1e-12 && worst < 1e-12,
        format!("round-trip error {round_trip:.3e} rad; line vs shifted phase duty error {worst:.3e}"),
    ))
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_pwmc")).args(args).output().expect("pwmc runs");
    assert!(out.status.success(), "pwmc {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("pwmc-acceptance-{}", std::process::id()));
    let (a, b) = (dir.join("a"), dir.join("b"));
    let args = |out: &std::path::Path| {
        vec![
            "simulate".to_string(),
            "--technique".into(),
            "apwm".into(),
            "--m".into(),
            "0.5".into(),
            "--dither-s".into(),
            "5e-6".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let sa: Vec<String> = args(&a);
    run_cli(&sa.iter().map(String::as_str).collect::<Vec<_>>());
    let manifest = a.join("manifest.json");
    let m = manifest.display().to_string();
    let bs = b.display().to_string();
    run_cli(&["simulate", "--manifest", &m, "--out", &bs]);
    let mut identical = true;
    for f in ["manifest.json", "summary.json", "waveform.csv", "spectrum.csv"] {
        identical &= std::fs::read(a.join(f)).ok() == std::fs::read(b.join(f)).ok();
    }
    let s1 = run_cli(&["duty", "--technique", "cpwm", "--m", "0.7", "--format", "json"]);
    let s2 = run_cli(&["duty", "--technique", "cpwm", "--m", "0.7", "--format", "json"]);
    identical &= s1 == s2;
    let _ = std::fs::remove_dir_all(&dir);

    let tb = TimebaseConfig { t_p_nominal: 50e-6, dither_amplitude: 5e-6, seed: 42 };
    let draws = dithered_periods(&tb, 10_000)?;
    let inside = draws.iter().all(|t| (45e-6..=55e-6).contains(t));
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let mean_ok = (mean / 50e-6 - 1.0).abs() < 0.01;
    Ok(Outcome::new(
        identical && inside && mean_ok,
        format!("byte-identical reruns: {identical}; 10^4 dithered periods within bounds: {inside}; mean/t_p = {:.5}", mean / 50e-6),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("duty bounds", duty_bounds),
        ("DPWM grounding", grounding),
        ("CPWM symmetry", cpwm_symmetry),
        ("line-to-line equivalence", line_to_line_equivalence),
        ("third-harmonic cancellation", third_harmonic),
        ("bus utilization", utilization),
        ("period averaging", averaging),
        ("dominant switching component", spectrum_claim),
        ("switching count ratio", switching_count_ratio),
        ("piecewise ramps", ramps),
        ("APWM endpoints and continuity", apwm),
        ("frame conversion", frames),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        failed += usize::from(!outcome.pass);
        println!(
            "{} criterion {:>2} {name}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
