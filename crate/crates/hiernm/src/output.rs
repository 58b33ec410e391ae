//! Machine-readable output: 17-significant-digit decimal formatting (lossless
//! f64 round trips) and the CSV layouts the CLI emits.
//!
//! CSV uses `,` separators and `.` decimals with no locale dependence; the
//! infinite spectral width is spelled `inf`, failed sweep points `nan`.

use crate::error::{Error, Result};
use crate::model::SpectralWidth;
use crate::phase::PhaseDiagram;

/// 17 significant digits: enough to reproduce any f64 bit-exactly.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

pub fn fmt_width(w: SpectralWidth) -> String {
    match w {
        SpectralWidth::Finite(v) => fmt_g17(v),
        SpectralWidth::Infinite => "inf".into(),
    }
}

/// Two-column series, e.g. `t,G` or `t,D`.
pub fn series_csv(col_a: &str, col_b: &str, rows: &[(f64, f64)]) -> String {
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(col_a);
    out.push(',');
    out.push_str(col_b);
    out.push('\n');
    for (a, b) in rows {
        out.push_str(&fmt_g17(*a));
        out.push(',');
        out.push_str(&fmt_g17(*b));
        out.push('\n');
    }
    out
}

/// Parse a two-column series back; header returned alongside the rows.
pub fn parse_series_csv(text: &str) -> Result<(String, Vec<(f64, f64)>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidParams("empty CSV".into()))?
        .to_string();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let a = parse_field(parts.next(), i)?;
        let b = parse_field(parts.next(), i)?;
        if parts.next().is_some() {
            return Err(Error::InvalidParams(format!("row {i}: expected 2 columns")));
        }
        rows.push((a, b));
    }
    Ok((header, rows))
}

fn parse_field(field: Option<&str>, row: usize) -> Result<f64> {
    let s = field.ok_or_else(|| Error::InvalidParams(format!("row {row}: missing column")))?;
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse()
            .map_err(|_| Error::InvalidParams(format!("row {row}: bad number `{s}`"))),
    }
}

/// Phase-diagram matrix: header row carries the lambda values, the first
/// column the kappa values.
pub fn phase_csv(d: &PhaseDiagram) -> String {
    let mut out = String::new();
    out.push_str("kappa");
    for w in &d.lambda_axis {
        out.push(',');
        out.push_str(&fmt_width(*w));
    }
    out.push('\n');
    for (i, kappa) in d.kappa_axis.iter().enumerate() {
        out.push_str(&fmt_g17(*kappa));
        for v in &d.nm_grid[i] {
            out.push(',');
            out.push_str(&fmt_g17(*v));
        }
        out.push('\n');
    }
    out
}

/// A phase-diagram matrix read back from CSV.
pub struct ParsedPhase {
    pub kappa_axis: Vec<f64>,
    pub lambda_axis: Vec<SpectralWidth>,
    pub nm_grid: Vec<Vec<f64>>,
}

/// Parse the phase-diagram matrix back from its CSV layout.
pub fn parse_phase_csv(text: &str) -> Result<ParsedPhase> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidParams("empty CSV".into()))?;
    let mut cols = header.split(',');
    let first = cols.next().unwrap_or_default();
    if first != "kappa" {
        return Err(Error::InvalidParams(format!(
            "expected `kappa` header, got `{first}`"
        )));
    }
    let lambda_axis: Vec<SpectralWidth> =
        cols.map(SpectralWidth::parse).collect::<Result<Vec<_>>>()?;
    let mut kappa_axis = Vec::new();
    let mut grid = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        kappa_axis.push(parse_field(parts.next(), i)?);
        let row: Vec<f64> = parts
            .map(|s| parse_field(Some(s), i))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != lambda_axis.len() {
            return Err(Error::InvalidParams(format!(
                "row {i}: {} values for {} lambda columns",
                row.len(),
                lambda_axis.len()
            )));
        }
        grid.push(row);
    }
    Ok(ParsedPhase {
        kappa_axis,
        lambda_axis,
        nm_grid: grid,
    })
}

/// Threshold curve: `lambda,kappa_t` rows.
pub fn threshold_csv(d: &PhaseDiagram) -> String {
    let mut out = String::from("lambda,kappa_t\n");
    for tp in &d.threshold_curve {
        out.push_str(&fmt_width(tp.lambda));
        out.push(',');
        out.push_str(&fmt_g17(tp.kappa_t));
        out.push('\n');
    }
    out
}
