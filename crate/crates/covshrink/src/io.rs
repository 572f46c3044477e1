//! CSV serialization: comma-separated, `.` decimal, no locale dependence,
//! 17 significant digits so doubles round-trip losslessly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::anomaly::RocCurve;
use crate::numerics::SymMatrix;
use crate::sampling::SampleSet;
use crate::simulation::MseRecord;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Shape(String),
}

pub type CsvResult<T> = std::result::Result<T, CsvError>;

/// 17 significant digits: enough for a lossless f64 round-trip.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // "inf" / "-inf" / "NaN" parse back via f64::from_str
        format!("{v}")
    }
}

/// Writes a `p x p` matrix, one row per line.
pub fn write_matrix_csv(path: &Path, m: &SymMatrix) -> CsvResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let p = m.dim();
    for i in 0..p {
        let line: Vec<String> = (0..p).map(|j| format_float(m.get(i, j))).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an `n x p` numeric CSV into a sample set.
pub fn read_samples_csv(path: &Path, has_header: bool) -> CsvResult<SampleSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 1 + usize::from(has_header);
        if record.is_empty() || (record.len() == 1 && record[0].is_empty()) {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for field in record.iter() {
            row.push(field.parse::<f64>().map_err(|e| CsvError::Parse {
                line,
                msg: format!("bad number `{field}`: {e}"),
            })?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CsvError::Shape("no data rows".into()));
    }
    let p = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
        return Err(CsvError::Shape(format!(
            "row {} has {} columns, expected {p}",
            i + 1,
            r.len()
        )));
    }
    SampleSet::from_rows(&rows).map_err(|e| CsvError::Shape(e.to_string()))
}

/// Reads a square matrix (same format `write_matrix_csv` emits). The upper
/// triangle is mirrored, so a written symmetric matrix round-trips exactly.
pub fn read_matrix_csv(path: &Path) -> CsvResult<SymMatrix> {
    let samples = read_samples_csv(path, false)?;
    let p = samples.dim();
    if samples.len() != p {
        return Err(CsvError::Shape(format!(
            "expected a square matrix, got {} x {p}",
            samples.len()
        )));
    }
    Ok(SymMatrix::from_fn(p, |i, j| samples.row(i)[j]))
}

/// Reads a single column of 0/1 labels.
pub fn read_labels_csv(path: &Path) -> CsvResult<Vec<u8>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut labels = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.is_empty() || (record.len() == 1 && record[0].is_empty()) {
            continue;
        }
        let field = &record[0];
        match field.parse::<f64>() {
            Ok(v) if v == 0.0 || v == 1.0 => labels.push(v as u8),
            _ => {
                return Err(CsvError::Parse {
                    line: idx + 1,
                    msg: format!("labels must be 0 or 1, got `{field}`"),
                })
            }
        }
    }
    if labels.is_empty() {
        return Err(CsvError::Shape("no labels".into()));
    }
    Ok(labels)
}

/// Writes benchmark records with the header
/// `estimator,n,trials,failures,mse_mean,mse_std`.
pub fn write_mse_csv(path: &Path, records: &[MseRecord]) -> CsvResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "estimator,n,trials,failures,mse_mean,mse_std")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.estimator,
            r.n,
            r.trials,
            r.failures,
            format_float(r.mse_mean),
            format_float(r.mse_std)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a ROC curve with the header `threshold,fpr,tpr`.
pub fn write_roc_csv(path: &Path, curve: &RocCurve) -> CsvResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "threshold,fpr,tpr")?;
    for pt in &curve.points {
        writeln!(
            out,
            "{},{},{}",
            format_float(pt.threshold),
            format_float(pt.fpr),
            format_float(pt.tpr)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Writes oracle-grid results with the header `rho,mse_mean`.
pub fn write_grid_csv(path: &Path, grid: &[(f64, f64)]) -> CsvResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "rho,mse_mean")?;
    for (rho, mse) in grid {
        writeln!(out, "{},{}", format_float(*rho), format_float(*mse))?;
    }
    out.flush()?;
    Ok(())
}
