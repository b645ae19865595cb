//! Stock-price series loader.
//!
//! The pipeline consumes one aggregate market series from a CSV file with
//! header `date,close[,series]`, ISO-8601 dates and dot-decimal prices.

use std::collections::HashMap;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub close: f64,
    pub series_name: String,
}

/// Load price points sorted by (series, date); duplicate dates within a
/// series are rejected with the offending row number.
pub fn load_prices(path: &Path) -> Result<Vec<PricePoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::data(format!("cannot open prices file {}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::data(format!("cannot read prices header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let date_col = col("date").ok_or_else(|| {
        Error::data(format!(
            "prices file {} lacks a date column",
            path.display()
        ))
    })?;
    let close_col = col("close").ok_or_else(|| {
        Error::data(format!(
            "prices file {} lacks a close column",
            path.display()
        ))
    })?;
    let series_col = col("series");

    let mut points = Vec::new();
    let mut seen: HashMap<(String, NaiveDate), usize> = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record =
            record.map_err(|e| Error::data(format!("prices row {row}: unreadable: {e}")))?;
        let date_text = record.get(date_col).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d")
            .map_err(|_| Error::data(format!("prices row {row}: unparsable date {date_text:?}")))?;
        let close_text = record.get(close_col).unwrap_or("");
        let close: f64 = close_text.parse().map_err(|_| {
            Error::data(format!("prices row {row}: unparsable price {close_text:?}"))
        })?;
        if !(close.is_finite() && close > 0.0) {
            return Err(Error::data(format!(
                "prices row {row}: non-positive price {close}"
            )));
        }
        let series_name = series_col
            .and_then(|c| record.get(c))
            .filter(|s| !s.is_empty())
            .unwrap_or("prices")
            .to_string();
        if let Some(first) = seen.insert((series_name.clone(), date), row) {
            return Err(Error::data(format!(
                "prices row {row}: duplicate date {date} (first seen at row {first})"
            )));
        }
        points.push(PricePoint {
            date,
            close,
            series_name,
        });
    }
    points.sort_by(|a, b| (&a.series_name, a.date).cmp(&(&b.series_name, b.date)));
    Ok(points)
}
