use crate::commutation::DutyWaveform;
use crate::error::{Error, Result};
use crate::sim::{phase_label, LineToLine, SwitchedWaveform};
use crate::spectral::Spectrum;

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Column-oriented numeric CSV with a mandatory header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Serializes with LF line endings.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("write to Vec");
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| fmt_f64(x))).expect("write to Vec");
        }
        String::from_utf8(w.into_inner().expect("flush Vec")).expect("csv output is UTF-8")
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse(format!("csv header: {e}")))?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        if header.is_empty() || header.iter().any(String::is_empty) {
            return Err(Error::Parse("csv header has empty columns".into()));
        }
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(format!("csv row {}: {e}", line + 1)))?;
            if record.len() != header.len() {
                return Err(Error::Parse(format!("csv row {} has {} fields", line + 1, record.len())));
            }
            let row = record
                .iter()
                .map(|field| {
                    field
                        .trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::Parse(format!("csv row {}: `{field}` is not a finite number", line + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    fn expect_header(self, expected: &[String]) -> Result<Self> {
        if self.header != expected {
            return Err(Error::Parse(format!(
                "unexpected csv header `{}` (expected `{}`)",
                self.header.join(","),
                expected.join(",")
            )));
        }
        Ok(self)
    }
}

fn duty_header(n: usize) -> Vec<String> {
    std::iter::once("theta_rad".to_string())
        .chain((1..=n).map(|r| format!("d_{r}")))
        .collect()
}

/// `theta_rad,d_1,...,d_n`, one row per grid point.
pub fn duty_table(w: &DutyWaveform) -> Table {
    let mut t = Table::new(duty_header(w.n_phases()));
    t.rows = w
        .points
        .iter()
        .map(|(theta, d)| std::iter::once(*theta).chain(d.as_slice().iter().copied()).collect())
        .collect();
    t
}

pub fn parse_duty_csv(text: &str) -> Result<Table> {
    let t = Table::parse_csv(text)?;
    let n = t.header.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::Parse("duty csv needs at least one phase column".into()));
    }
    t.expect_header(&duty_header(n))
}

fn waveform_header(n: usize) -> Vec<String> {
    let ll = (0..n).map(|r| format!("v_{}{}", phase_label(r), phase_label((r + 1) % n)));
    std::iter::once("t_s".to_string())
        .chain((0..n).map(|r| format!("v_{}", phase_label(r))))
        .chain(ll)
        .collect()
}

/// `t_s,v_a,v_b,...,v_ab,v_bc,...`
pub fn waveform_table(wf: &SwitchedWaveform, ll: &LineToLine) -> Table {
    let mut t = Table::new(waveform_header(wf.n_phases()));
    t.rows = (0..wf.t.len())
        .map(|i| {
            std::iter::once(wf.t[i])
                .chain(wf.v_pg.iter().map(|p| p[i]))
                .chain(ll.traces.iter().map(|p| p[i]))
                .collect()
        })
        .collect();
    t
}

pub fn parse_waveform_csv(text: &str) -> Result<Table> {
    let t = Table::parse_csv(text)?;
    let cols = t.header.len().saturating_sub(1);
    if cols == 0 || cols % 2 != 0 {
        return Err(Error::Parse("waveform csv needs phase and line-to-line columns".into()));
    }
    t.expect_header(&waveform_header(cols / 2))
}

/// `freq_hz,amplitude`
pub fn spectrum_table(spec: &Spectrum) -> Table {
    let mut t = Table::new(vec!["freq_hz".into(), "amplitude".into()]);
    t.rows = spec.freqs.iter().zip(&spec.mags).map(|(f, a)| vec![*f, *a]).collect();
    t
}

pub fn parse_spectrum_csv(text: &str) -> Result<Table> {
    Table::parse_csv(text)?.expect_header(&["freq_hz".to_string(), "amplitude".to_string()])
}
