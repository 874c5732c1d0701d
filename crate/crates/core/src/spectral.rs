//! Single-sided amplitude spectra of uniformly sampled signals.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

/// Single-sided amplitude spectrum.
///
/// A sinusoid `A sin(2 pi f t)` whose frequency falls on a bin reports
/// magnitude `A` at `f`; the DC bin reports the mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub mags: Vec<f64>,
    /// Bin width, hertz.
    pub resolution: f64,
    /// Scaled complex amplitudes, same convention as `mags`.
    #[serde(skip)]
    pub phasors: Vec<Complex64>,
    n_samples: usize,
}

impl Spectrum {
    pub fn nyquist(&self) -> f64 {
        *self.freqs.last().unwrap_or(&0.0)
    }

    pub fn len(&self) -> usize {
        self.mags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mags.is_empty()
    }

    /// Mean-square value of the signal recovered from the spectrum.
    pub fn mean_square(&self) -> f64 {
        let last = self.mags.len() - 1;
        let has_nyquist_bin = self.n_samples.is_multiple_of(2);
        self.mags
            .iter()
            .enumerate()
            .map(|(k, a)| {
                if k == 0 || (k == last && has_nyquist_bin) {
                    a * a
                } else {
                    a * a / 2.0
                }
            })
            .sum()
    }

    fn bin_of(&self, freq: f64) -> Result<usize> {
        if !(freq >= 0.0) || freq > self.nyquist() + 0.5 * self.resolution {
            return Err(Error::domain(format!(
                "frequency {freq} Hz outside [0, {}] Hz",
                self.nyquist()
            )));
        }
        Ok(((freq / self.resolution).round() as usize).min(self.mags.len() - 1))
    }
}

/// Amplitude spectrum of `samples` taken at `sample_rate` hertz. No window is
/// applied, so the capture should span an integer number of cycles.
pub fn analyze(samples: &[f64], sample_rate: f64) -> Result<Spectrum> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::domain(format!("need at least 2 samples, got {n}")));
    }
    if !(sample_rate > 0.0) || !sample_rate.is_finite() {
        return Err(Error::domain(format!("sample rate must be positive, got {sample_rate}")));
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bins = n / 2 + 1;
    let scale = 1.0 / n as f64;
    let phasors: Vec<Complex64> = buf
        .into_iter()
        .take(bins)
        .enumerate()
        .map(|(k, c)| {
            let edge = k == 0 || (n.is_multiple_of(2) && k == n / 2);
            c * if edge { scale } else { 2.0 * scale }
        })
        .collect();
    let resolution = sample_rate / n as f64;
    Ok(Spectrum {
        freqs: (0..bins).map(|k| k as f64 * resolution).collect(),
        mags: phasors.iter().map(|c| c.norm()).collect(),
        resolution,
        phasors,
        n_samples: n,
    })
}

/// Like [`analyze`] but takes sample times; rejects non-uniform spacing.
pub fn analyze_timed(t: &[f64], samples: &[f64]) -> Result<Spectrum> {
    if t.len() != samples.len() {
        return Err(Error::domain("time and sample vectors differ in length"));
    }
    if t.len() < 2 {
        return Err(Error::domain("need at least 2 samples"));
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    let uniform = dt > 0.0 && t.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt);
    if !uniform {
        return Err(Error::domain("sample times are not uniformly spaced"));
    }
    analyze(samples, 1.0 / dt)
}

/// Amplitude at the bin nearest `k * fundamental`.
pub fn harmonic(spec: &Spectrum, fundamental: f64, k: usize) -> Result<f64> {
    if !(fundamental > 0.0) {
        return Err(Error::domain(format!("fundamental must be positive, got {fundamental}")));
    }
    Ok(spec.mags[spec.bin_of(k as f64 * fundamental)?])
}

/// Carrier multiples to inspect and the half-width of the sideband group
/// around each one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchingBand {
    pub first_multiple: usize,
    pub last_multiple: usize,
    pub half_width_hz: f64,
}

impl SwitchingBand {
    /// Groups `f_ratio / 4` fundamental orders either side of each carrier multiple.
    pub fn sidebands(first_multiple: usize, last_multiple: usize, fundamental_hz: f64, f_ratio: usize) -> Self {
        Self {
            first_multiple,
            last_multiple,
            half_width_hz: (f_ratio / 4) as f64 * fundamental_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchingComponent {
    pub multiple: usize,
    /// `multiple * f_sw`, hertz.
    pub frequency: f64,
    /// Root-sum-square amplitude of the group.
    pub amplitude: f64,
    /// `(multiple, amplitude)` for every group in the band.
    pub groups: Vec<(usize, f64)>,
}

/// Strongest carrier-multiple group within `band`.
pub fn dominant_switching_component(spec: &Spectrum, f_sw: f64, band: &SwitchingBand) -> Result<SwitchingComponent> {
    if band.first_multiple == 0 || band.first_multiple > band.last_multiple {
        return Err(Error::domain(format!(
            "empty switching band {}..={}",
            band.first_multiple, band.last_multiple
        )));
    }
    if !(f_sw > 0.0) || !(band.half_width_hz >= 0.0) {
        return Err(Error::domain("switching frequency and group width must be positive"));
    }
    let top = band.last_multiple as f64 * f_sw + band.half_width_hz;
    if top > spec.nyquist() {
        return Err(Error::domain(format!(
            "spectrum ends at {} Hz, band needs {top} Hz",
            spec.nyquist()
        )));
    }
    let slack = 1e-9 * spec.resolution;
    let groups: Vec<(usize, f64)> = (band.first_multiple..=band.last_multiple)
        .map(|k| {
            let centre = k as f64 * f_sw;
            let power: f64 = spec
                .freqs
                .iter()
                .zip(&spec.mags)
                .filter(|(f, _)| (**f - centre).abs() <= band.half_width_hz + slack)
                .map(|(_, a)| a * a)
                .sum();
            (k, power.sqrt())
        })
        .collect();
    let &(multiple, amplitude) = groups
        .iter()
        .fold(&groups[0], |best, g| if g.1 > best.1 { g } else { best });
    Ok(SwitchingComponent { multiple, frequency: multiple as f64 * f_sw, amplitude, groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    /// Direct O(N^2) evaluation used as an independent reference.
    fn direct_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..=n / 2)
            .map(|k| {
                let sum: Complex64 = x
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| v * Complex64::from_polar(1.0, -TAU * (k * j % n) as f64 / n as f64))
                    .sum();
                let edge = k == 0 || (n.is_multiple_of(2) && k == n / 2);
                sum * if edge { 1.0 } else { 2.0 } / n as f64
            })
            .collect()
    }

    fn tone(n: usize, rate: f64, f: f64, a: f64) -> Vec<f64> {
        (0..n).map(|j| a * (TAU * f * j as f64 / rate).sin()).collect()
    }

    #[test]
    fn constant_is_dc_only() {
        let s = analyze(&[3.5; 64], 64.0).unwrap();
        assert_abs_diff_eq!(s.mags[0], 3.5, epsilon = 1e-12);
        assert!(s.mags[1..].iter().all(|&a| a < 1e-10 * 3.5));
    }

    #[test]
    fn on_bin_sinusoid() {
        let s = analyze(&tone(128, 128.0, 5.0, 2.0), 128.0).unwrap();
        assert_abs_diff_eq!(harmonic(&s, 5.0, 1).unwrap(), 2.0, epsilon = 1e-9);
        assert_eq!(s.resolution, 1.0);
    }

    #[test]
    fn two_tones_recovered() {
        let x: Vec<f64> = tone(200, 200.0, 7.0, 1.5)
            .iter()
            .zip(tone(200, 200.0, 31.0, 0.25))
            .map(|(a, b)| a + b)
            .collect();
        let s = analyze(&x, 200.0).unwrap();
        assert_abs_diff_eq!(s.mags[7], 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(s.mags[31], 0.25, epsilon = 1e-9);
    }

    #[test]
    fn matches_direct_dft() {
        let x: Vec<f64> = (0..97).map(|j| ((j * 37 % 23) as f64).cos() + 0.1 * j as f64).collect();
        let fast = analyze(&x, 1.0).unwrap();
        for (a, b) in fast.phasors.iter().zip(direct_dft(&x)) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_short_or_bad_rate() {
        assert!(analyze(&[1.0], 1.0).is_err());
        assert!(analyze(&[1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn non_uniform_times_rejected() {
        let t = [0.0, 1.0, 2.5, 3.0];
        assert!(matches!(analyze_timed(&t, &[0.0; 4]), Err(Error::Domain(_))));
        let t = [0.0, 0.5, 1.0, 1.5];
        assert_eq!(analyze_timed(&t, &[1.0; 4]).unwrap().resolution, 0.5);
    }

    #[test]
    fn harmonic_beyond_nyquist() {
        let s = analyze(&[0.0; 16], 16.0).unwrap();
        assert!(harmonic(&s, 1.0, 9).is_err());
        assert!(harmonic(&s, 1.0, 8).is_ok());
        assert!(harmonic(&s, 0.0, 1).is_err());
    }

    #[test]
    fn dominant_pure_tone() {
        // 1 Hz bins, f_sw = 20 Hz, tone at 40 Hz
        let s = analyze(&tone(200, 200.0, 40.0, 0.7), 200.0).unwrap();
        let band = SwitchingBand { first_multiple: 1, last_multiple: 3, half_width_hz: 5.0 };
        let c = dominant_switching_component(&s, 20.0, &band).unwrap();
        assert_eq!(c.multiple, 2);
        assert_eq!(c.frequency, 40.0);
        assert_abs_diff_eq!(c.amplitude, 0.7, epsilon = 1e-9);
    }

    #[test]
    fn dominant_rejects_bad_band() {
        let s = analyze(&[0.0; 200], 200.0).unwrap();
        let empty = SwitchingBand { first_multiple: 3, last_multiple: 2, half_width_hz: 1.0 };
        assert!(dominant_switching_component(&s, 20.0, &empty).is_err());
        let beyond = SwitchingBand { first_multiple: 1, last_multiple: 6, half_width_hz: 1.0 };
        assert!(dominant_switching_component(&s, 20.0, &beyond).is_err());
    }

    proptest! {
        #[test]
        fn parseval(x in proptest::collection::vec(-10.0..10.0f64, 2..300)) {
            let s = analyze(&x, 1.0).unwrap();
            let time = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
            prop_assert!((time - s.mean_square()).abs() <= 1e-9 * time.max(1e-12));
        }

        #[test]
        fn linear(a in proptest::collection::vec(-1.0..1.0f64, 64), b in proptest::collection::vec(-1.0..1.0f64, 64)) {
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let (sa, sb, ss) = (analyze(&a, 1.0).unwrap(), analyze(&b, 1.0).unwrap(), analyze(&sum, 1.0).unwrap());
            for k in 0..ss.phasors.len() {
                prop_assert!((ss.phasors[k] - sa.phasors[k] - sb.phasors[k]).norm() < 1e-12);
            }
        }
    }
}
