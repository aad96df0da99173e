use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = ["dataset", "method", "N", "K", "input_len", "seed_count", "mae_mean", "mae_per_seed"];
pub const MARKDOWN_HEADER: &str = "| dataset | method | N | K | input_len | MAE |";

/// One grid cell: seed-averaged MAE for a dataset, method, N and K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub method: String,
    pub n: usize,
    pub k: usize,
    pub input_len: usize,
    pub mae_per_seed: Vec<f64>,
}

impl ResultRow {
    pub fn mae_mean(&self) -> f64 {
        self.mae_per_seed.iter().sum::<f64>() / self.mae_per_seed.len() as f64
    }
}

/// Table value rounded to three decimals.
pub fn format_mae(v: f64) -> String {
    format!("{v:.3}")
}

pub fn results_csv(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Empty("result rows"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::io("<results csv>", std::io::Error::other(e.to_string()));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let per_seed: Vec<String> = r.mae_per_seed.iter().map(|v| v.to_string()).collect();
        w.write_record([
            r.dataset.clone(),
            r.method.clone(),
            r.n.to_string(),
            r.k.to_string(),
            r.input_len.to_string(),
            r.mae_per_seed.len().to_string(),
            format_mae(r.mae_mean()),
            per_seed.join(";"),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| io(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Parses [`results_csv`] output, taking values from the full-precision column.
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |line: usize, msg: String| Error::Csv {
        path: PathBuf::from("<results csv>"),
        line,
        msg,
    };
    let header: Vec<String> = r.headers().map_err(|e| bad(1, e.to_string()))?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(bad(1, format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        let int = |j: usize| rec[j].parse::<usize>().map_err(|e| bad(line, format!("{}: {e}", CSV_HEADER[j])));
        let per_seed = rec[7]
            .split(';')
            .map(|s| s.parse::<f64>().map_err(|e| bad(line, format!("mae_per_seed: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if per_seed.len() != int(5)? {
            return Err(bad(line, "seed_count disagrees with mae_per_seed".into()));
        }
        rows.push(ResultRow {
            dataset: rec[0].to_string(),
            method: rec[1].to_string(),
            n: int(2)?,
            k: int(3)?,
            input_len: int(4)?,
            mae_per_seed: per_seed,
        });
    }
    Ok(rows)
}

pub fn results_markdown(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Empty("result rows"));
    }
    let mut out = String::new();
    out.push_str(MARKDOWN_HEADER);
    out.push_str("\n|---|---|---:|---:|---:|---:|\n");
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            r.dataset,
            r.method,
            r.n,
            r.k,
            r.input_len,
            format_mae(r.mae_mean())
        );
    }
    Ok(out)
}

/// Writes `results.csv` and `results.md` into `dir`.
pub fn write_results(rows: &[ResultRow], dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv_path = dir.join("results.csv");
    let md_path = dir.join("results.md");
    std::fs::write(&csv_path, results_csv(rows)?).map_err(|e| Error::io(&csv_path, e))?;
    std::fs::write(&md_path, results_markdown(rows)?).map_err(|e| Error::io(&md_path, e))?;
    Ok((csv_path, md_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(maes: Vec<f64>) -> ResultRow {
        ResultRow {
            dataset: "synth".into(),
            method: "smaml".into(),
            n: 70,
            k: 5,
            input_len: 16,
            mae_per_seed: maes,
        }
    }

    #[test]
    fn rounding_rule() {
        assert_eq!(format_mae(0.4049), "0.405");
        let md = results_markdown(&[row(vec![0.4049])]).unwrap();
        assert!(md.contains("| 0.405 |"));
        assert!(md.starts_with("| dataset | method | N | K | input_len | MAE |\n"));
    }

    #[test]
    fn csv_header_and_round_trip() {
        let rows = vec![row(vec![0.1 + 0.2, 1.0 / 3.0, 2.5e-7]), row(vec![0.4049])];
        let text = results_csv(&rows).unwrap();
        assert!(text.starts_with("dataset,method,N,K,input_len,seed_count,mae_mean,mae_per_seed\n"));
        assert!(text.contains(",3,"));
        assert_eq!(parse_results_csv(&text).unwrap(), rows);
    }

    #[test]
    fn empty_rows_and_bad_dir_rejected() {
        assert!(results_csv(&[]).is_err());
        let err = write_results(&[row(vec![1.0])], Path::new("/nonexistent/dir")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/results.csv"));
    }
}
