//! Pmf sources and sequence ingestion.

use std::fs;
use std::path::Path;

use clap::Args;
use rkr_core::{Family, Pmf, PmfSource};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Args)]
pub struct PmfArgs {
    /// JSON file holding `{"probs": [...]}` or a family description
    #[arg(long, value_name = "FILE", conflicts_with = "family")]
    pub pmf: Option<std::path::PathBuf>,
    /// Named family: uniform | truncated_geometric
    #[arg(long)]
    pub family: Option<Family>,
    /// Support size for --family
    #[arg(long = "M", value_name = "M")]
    pub m: Option<usize>,
    /// Ratio of successive masses for truncated_geometric
    #[arg(long)]
    pub ratio: Option<f64>,
}

impl PmfArgs {
    pub fn is_given(&self) -> bool {
        self.pmf.is_some() || self.family.is_some()
    }

    pub fn source(&self) -> CliResult<PmfSource> {
        if let Some(path) = &self.pmf {
            let text = read(path)?;
            return serde_json::from_str(&text).map_err(|e| CliError::Parse {
                line: e.line() as u64,
                message: format!("{}: {e}", path.display()),
            });
        }
        match (self.family, self.m) {
            (Some(family), Some(m)) => Ok(PmfSource::Family {
                family,
                m,
                ratio: self.ratio,
            }),
            (Some(_), None) => Err(CliError::Usage("--family requires --M".into())),
            _ => Err(CliError::Usage(
                "a distribution is required: pass --pmf FILE or --family NAME --M M".into(),
            )),
        }
    }

    pub fn resolve(&self) -> CliResult<(PmfSource, Pmf)> {
        let source = self.source()?;
        let pmf = source.build()?;
        Ok((source, pmf))
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        context: format!("reading {}", path.display()),
        source,
    })
}

#[derive(Deserialize)]
struct JsonlRow {
    x: i64,
}

fn positive(value: i64, line: u64) -> CliResult<usize> {
    if value < 1 {
        return Err(CliError::NonPositiveValue { line, value });
    }
    Ok(value as usize)
}

/// Reads positive integers from CSV (one per row or comma-separated) or,
/// for `.jsonl` / `.ndjson` files, one `{"x": v}` object per line.
pub fn read_sequence(path: &Path) -> CliResult<Vec<usize>> {
    let text = read(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if matches!(ext, "jsonl" | "ndjson") {
        parse_jsonl(&text)
    } else {
        parse_csv(&text)
    }
}

pub fn parse_jsonl(text: &str) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonlRow = serde_json::from_str(line).map_err(|e| CliError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push(positive(row.x, line_no)?);
    }
    Ok(out)
}

/// A first row with no integer fields is treated as a header.
pub fn parse_csv(text: &str) -> CliResult<Vec<usize>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        if idx == 0 && !fields.is_empty() && fields.iter().all(|f| f.parse::<i64>().is_err()) {
            continue;
        }
        for field in fields {
            let value = field.parse::<i64>().map_err(|_| CliError::Parse {
                line,
                message: format!("'{field}' is not an integer"),
            })?;
            out.push(positive(value, line)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layouts() {
        assert_eq!(parse_csv("1\n3\n2\n").unwrap(), vec![1, 3, 2]);
        assert_eq!(parse_csv("1,3,2\n3,1\n").unwrap(), vec![1, 3, 2, 3, 1]);
        assert_eq!(parse_csv("x\n4\n5\n").unwrap(), vec![4, 5]);
        assert_eq!(parse_csv("").unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        match parse_csv("1\n2\nabc\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_csv("1\n0\n") {
            Err(CliError::NonPositiveValue { line, value }) => assert_eq!((line, value), (2, 0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jsonl_rows() {
        assert_eq!(
            parse_jsonl("{\"x\": 3}\n\n{\"x\": 1}\n").unwrap(),
            vec![3, 1]
        );
        assert!(matches!(
            parse_jsonl("{\"x\": 3}\n{\"y\": 1}\n"),
            Err(CliError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_jsonl("{\"x\": -2}\n"),
            Err(CliError::NonPositiveValue { line: 1, value: -2 })
        ));
    }

    #[test]
    fn pmf_args_require_a_source() {
        assert!(matches!(
            PmfArgs::default().source(),
            Err(CliError::Usage(_))
        ));
        let args = PmfArgs {
            family: Some(Family::Uniform),
            ..Default::default()
        };
        assert!(matches!(args.source(), Err(CliError::Usage(_))));
    }
}
