//! Serialization: operators as JSON, reports as JSON, series as CSV.
//!
//! CSV files use ',' separators, '.' decimals, LF line endings and UTF-8.
//! Floats are written in the shortest form that round-trips exactly, so two
//! runs with the same inputs produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::operator_core::SpectralResolution;
use crate::wave::{Method, WaveResult};

/// Row-major entries as [re, im] pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub dim: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for OperatorJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self { dim: m.dim(), data: m.as_slice().iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl OperatorJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.data.len() != self.dim * self.dim {
            return Err(invalid(format!("operator JSON has {} entries, expected {}", self.data.len(), self.dim * self.dim)));
        }
        ComplexMatrix::from_vec(self.dim, self.data.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }
}

pub fn operator_to_json(m: &ComplexMatrix) -> Result<String> {
    Ok(serde_json::to_string(&OperatorJson::from(m))?)
}

pub fn operator_from_json(text: &str) -> Result<ComplexMatrix> {
    serde_json::from_str::<OperatorJson>(text)?.to_matrix()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes a header and rows. An empty row set gives a header-only file.
pub fn write_csv<R, S>(path: &Path, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<str>,
{
    let mut w = csv_writer(fs::File::create(path)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(AsRef::as_ref))?;
    }
    w.flush()?;
    Ok(())
}

/// CSV text in memory, same format as [`write_csv`].
pub fn csv_string<R, S>(header: &[&str], rows: R) -> Result<String>
where
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<str>,
{
    let mut w = csv_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(AsRef::as_ref))?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))
}

fn csv_writer<W: Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(inner)
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Density,
    Stationary,
    Residual,
    GammaSpread,
}

impl PlotKind {
    pub fn header(self) -> [&'static str; 2] {
        match self {
            PlotKind::Density => ["lambda", "density"],
            PlotKind::Stationary => ["epsilon", "stationary_value"],
            PlotKind::Residual => ["t", "residual"],
            PlotKind::GammaSpread => ["n", "gamma_spread"],
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            PlotKind::Density => "density.csv",
            PlotKind::Stationary => "stationary.csv",
            PlotKind::Residual => "residual.csv",
            PlotKind::GammaSpread => "gamma_spread.csv",
        }
    }
}

/// Two-column series for gnuplot or a spreadsheet.
pub fn emit_plotdata(path: &Path, kind: PlotKind, points: &[(f64, f64)]) -> Result<()> {
    write_csv(path, &kind.header(), points.iter().map(|&(x, y)| vec![fmt_f64(x), fmt_f64(y)]))
}

/// Normalized eigenvalue histogram on [lo, hi]: (bin centre, count/(N·width)).
pub fn density_points(s: &SpectralResolution, lo: f64, hi: f64, bins: usize) -> Result<Vec<(f64, f64)>> {
    if !(lo < hi) || bins == 0 {
        return Err(invalid("density histogram needs lo < hi and at least one bin"));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &l in s.eigenvalues() {
        if l >= lo && l <= hi {
            counts[(((l - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    let n = s.dim() as f64;
    Ok(counts.iter().enumerate().map(|(k, &c)| (lo + (k as f64 + 0.5) * width, c as f64 / (n * width))).collect())
}

/// (t, residual) or (ε, value) points from a wave computation.
pub fn wave_points(w: &WaveResult) -> (PlotKind, Vec<(f64, f64)>) {
    match w.method {
        Method::Stationary => (PlotKind::Stationary, w.schedule.iter().copied().zip(w.values.iter().copied()).collect()),
        _ => (PlotKind::Residual, w.schedule.iter().skip(1).copied().zip(w.residual_trail.iter().copied()).collect()),
    }
}
