//! Closing-price CSV ingestion and log-return construction.
//!
//! Input files carry a header row, a date column parseable as ISO-8601 by
//! default (a custom `chrono` format string may be supplied), and a strictly
//! positive closing-price column. Rows must be in strictly increasing date
//! order; consecutive rows define consecutive trading days.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column layout of a price CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvFormat {
    pub delimiter: u8,
    pub date_column: String,
    pub close_column: String,
    /// `chrono` format string; ISO-8601 (%Y-%m-%d) when absent.
    pub date_format: Option<String>,
}

impl Default for CsvFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            date_column: "date".into(),
            close_column: "close".into(),
            date_format: None,
        }
    }
}

/// Validated closing prices with strictly increasing dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub close: Vec<f64>,
}

/// Log-returns r_t = ln(P_t / P_{t-1}), aligned to the later date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
}

/// Load and validate a closing-price CSV. Rows with unparseable dates or
/// missing/non-positive closes are rejected with their 1-based row number
/// (the header is row 1).
pub fn load_prices(path: impl AsRef<Path>, fmt: &CsvFormat) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(fmt.delimiter)
        .from_path(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            row: 1,
            reason: format!("missing column '{name}'"),
        })
    };
    let date_idx = col(&fmt.date_column)?;
    let close_idx = col(&fmt.close_column)?;

    let mut dates = Vec::new();
    let mut close = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let date_raw = record.get(date_idx).ok_or_else(|| Error::Parse {
            row,
            reason: "missing date field".into(),
        })?;
        let date = match &fmt.date_format {
            Some(f) => NaiveDate::parse_from_str(date_raw, f),
            None => date_raw.parse::<NaiveDate>(),
        }
        .map_err(|e| Error::Parse { row, reason: format!("bad date '{date_raw}': {e}") })?;
        let close_raw = record.get(close_idx).ok_or_else(|| Error::Parse {
            row,
            reason: "missing close field".into(),
        })?;
        let c: f64 = close_raw.trim().parse().map_err(|e| Error::Parse {
            row,
            reason: format!("bad close '{close_raw}': {e}"),
        })?;
        if !(c > 0.0) {
            return Err(Error::Parse { row, reason: format!("non-positive close {c}") });
        }
        if let Some(&prev) = dates.last() {
            if date <= prev {
                return Err(Error::NonMonotoneDates { row });
            }
        }
        dates.push(date);
        close.push(c);
    }
    if close.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(PriceSeries { dates, close })
}

/// Daily log-returns of a price series, aligned to the later date.
pub fn log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.close.len() < 2 {
        return Err(Error::EmptySeries);
    }
    let returns = prices
        .close
        .windows(2)
        .map(|w| (w[1] / w[0]).ln())
        .collect();
    Ok(ReturnSeries { dates: prices.dates[1..].to_vec(), returns })
}

/// Load a single numeric column from a headered CSV (observation streams
/// written by the command-line tools round-trip through this).
pub fn load_returns(path: impl AsRef<Path>, column: &str, delimiter: u8) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .from_path(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let idx = headers.iter().position(|h| h == column).ok_or_else(|| Error::Parse {
        row: 1,
        reason: format!("missing column '{column}'"),
    })?;
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let raw = record.get(idx).ok_or_else(|| Error::Parse {
            row,
            reason: format!("missing '{column}' field"),
        })?;
        let v: f64 = raw.trim().parse().map_err(|e| Error::Parse {
            row,
            reason: format!("bad value '{raw}': {e}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse { row, reason: format!("non-finite value {v}") });
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(out)
}
