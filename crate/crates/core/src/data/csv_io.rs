use std::path::Path;

use crate::error::{Error, Result};
use crate::series::Series;

fn csv_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Reads the named columns of a headed CSV file. One column gives a
/// univariate series named after it; several give a multichannel series
/// (row-major) named after the file stem. Rows are taken as time order.
pub fn load_csv(path: &Path, columns: &[&str]) -> Result<Series> {
    if columns.is_empty() {
        return Err(Error::Config("select at least one CSV column".into()));
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|e| csv_err(path, 1, e.to_string()))?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(csv_err(path, 1, "empty file: a header row is required"));
    }
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == *c)
                .ok_or_else(|| csv_err(path, 1, format!("no column named {c:?} (columns: {})", headers.iter().collect::<Vec<_>>().join(", "))))
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            csv_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for &i in &idx {
            let cell = record.get(i).unwrap_or("");
            let v: f64 = cell
                .parse()
                .map_err(|_| csv_err(path, line, format!("column {:?}: {cell:?} is not a number", &headers[i])))?;
            if !v.is_finite() {
                return Err(csv_err(path, line, format!("column {:?}: non-finite value {cell:?}", &headers[i])));
            }
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(csv_err(path, 2, "no data rows"));
    }
    if columns.len() == 1 {
        Series::new(columns[0], values)
    } else {
        let stem = path.file_stem().map_or("series".into(), |s| s.to_string_lossy().into_owned());
        Series::multichannel(stem, values, columns.len())
    }
}

/// Writes an `index` column followed by one column per channel. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn write_csv(path: &Path, series: &Series) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_to_io(path, e))?;
    let channels = series.channels();
    let mut header = vec!["index".to_string()];
    if channels.len() == 1 {
        header.push(series.name().to_string());
    } else {
        header.extend(channels.iter().map(|c| c.name().to_string()));
    }
    w.write_record(&header).map_err(|e| csv_to_io(path, e))?;
    let c = series.channel_count();
    for (t, row) in series.values().chunks(c).enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| csv_to_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_to_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}
