//! Per-iteration restoration trace as CSV.

use std::path::Path;

use stagetv_core::RestoreResult;

pub const HEADER: [&str; 7] = ["stage", "sigma", "iter", "rel_err", "residual", "psnr", "ssim"];

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub stage: usize,
    /// 1 for first-order stages, 2 for second-order ones.
    pub sigma: u8,
    pub iter: usize,
    pub rel_err: f64,
    pub residual: f64,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("trace line {line}: {reason}")]
    Parse { line: u64, reason: String },
}

pub fn rows_from(result: &RestoreResult) -> Vec<TraceRow> {
    result
        .trace
        .iter()
        .map(|t| TraceRow {
            stage: t.stage,
            sigma: t.regularizer.tag(),
            iter: t.record.k,
            rel_err: t.record.rel_change,
            residual: t.residual,
            psnr: t.psnr,
            ssim: t.ssim,
        })
        .collect()
}

/// `%.9g`-style rendering: nine significant digits, trailing zeros dropped.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn optional(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

pub fn write_trace_to<W: std::io::Write>(rows: &[TraceRow], out: W) -> Result<(), TraceError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.stage.to_string(),
            r.sigma.to_string(),
            r.iter.to_string(),
            format_real(r.rel_err),
            format_real(r.residual),
            optional(r.psnr),
            optional(r.ssim),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(rows: &[TraceRow], path: &Path) -> Result<(), TraceError> {
    write_trace_to(rows, std::fs::File::create(path)?)
}

pub fn read_trace_from<R: std::io::Read>(input: R) -> Result<Vec<TraceRow>, TraceError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(HEADER) {
        return Err(TraceError::Parse {
            line: 1,
            reason: format!("unexpected header {headers:?}"),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |reason: String| TraceError::Parse { line, reason };
        let int = |i: usize| -> Result<usize, TraceError> {
            record[i].parse().map_err(|_| err(format!("bad {} {:?}", HEADER[i], &record[i])))
        };
        let real = |i: usize| -> Result<f64, TraceError> {
            record[i].parse().map_err(|_| err(format!("bad {} {:?}", HEADER[i], &record[i])))
        };
        let opt = |i: usize| -> Result<Option<f64>, TraceError> {
            if record[i].is_empty() {
                Ok(None)
            } else {
                real(i).map(Some)
            }
        };
        let sigma = int(1)?;
        if sigma != 1 && sigma != 2 {
            return Err(err(format!("sigma must be 1 or 2, got {sigma}")));
        }
        rows.push(TraceRow {
            stage: int(0)?,
            sigma: sigma as u8,
            iter: int(2)?,
            rel_err: real(3)?,
            residual: real(4)?,
            psnr: opt(5)?,
            ssim: opt(6)?,
        });
    }
    Ok(rows)
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, TraceError> {
    read_trace_from(std::fs::File::open(path)?)
}
