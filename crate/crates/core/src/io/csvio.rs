use std::path::Path;

use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

/// Reads a single-column CSV of reals. A non-numeric first row is treated as a header.
pub fn read_signal_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = rec.get(0).unwrap_or("");
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(v) => return Err(Error::Parse(format!("non-finite value {v} on row {i}"))),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Error::Parse(format!("bad number '{field}' on row {i}"))),
        }
    }
    Ok(out)
}

pub fn write_signal_csv(path: impl AsRef<Path>, header: &str, signal: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([header]).map_err(csv_err)?;
    for v in signal {
        w.write_record([format!("{v:.17e}")]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header row followed by pre-formatted rows.
pub fn write_table_csv<R, S>(path: impl AsRef<Path>, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
