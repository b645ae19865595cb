//! Filing acquisition: EDGAR index listing, document fetch with on-disk
//! caching, and the stock-price series loader.
//!
//! Listing and fetching go through a [`FetchSource`], either the live EDGAR
//! archive or a local fixture directory mirroring its layout. Fetched
//! documents land in a shared cache keyed by accession id, so reruns are
//! free and fixture/live runs share one code path.

mod cache;
mod http;
mod prices;

pub use cache::{Cache, CacheMeta};
pub use http::{EdgarClient, RateLimiter};
pub use prices::{load_prices, PricePoint};

use std::path::{Path, PathBuf};

use chrono::{DateTime, Datelike, NaiveDate, Utc};

use crate::error::{Error, Result};

/// Identity of one filing as listed in an EDGAR index file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilingRef {
    pub cik: String,
    pub company_name: String,
    /// 4 decimal digits, or "unknown" until the document header is read.
    pub sic_code: String,
    pub form_type: String,
    pub filing_date: NaiveDate,
    pub accession_id: String,
    /// Archive-relative document path, e.g. `edgar/data/320193/....txt`.
    pub document_url: String,
}

/// A fetched document body plus where it came from.
#[derive(Debug, Clone)]
pub struct RawFiling {
    pub ref_: FilingRef,
    pub content: Vec<u8>,
    pub fetched_at: DateTime<Utc>,
    pub from_cache: bool,
}

/// Where document bytes come from.
pub enum FetchSource {
    Live(EdgarClient),
    /// Directory tree mirroring the archive layout under `base_url`.
    Fixture {
        root: PathBuf,
    },
}

impl FetchSource {
    /// Read one archive-relative path.
    pub fn get(&self, rel_path: &str) -> Result<Vec<u8>> {
        match self {
            FetchSource::Live(client) => client.get(rel_path),
            FetchSource::Fixture { root } => {
                let path = root.join(rel_path.trim_start_matches('/'));
                std::fs::read(&path).map_err(|e| Error::io("fixture document not found", &path, e))
            }
        }
    }
}

/// Lists and fetches filings against one source and one cache.
pub struct Ingestor {
    source: FetchSource,
    cache: Cache,
    include_amended: bool,
}

impl Ingestor {
    pub fn new(source: FetchSource, cache: Cache, include_amended: bool) -> Self {
        Ingestor {
            source,
            cache,
            include_amended,
        }
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    /// Every filing of `form_type` filed in `[start_date, end_date]`, from
    /// the quarterly index files, ordered by (filing_date, accession_id).
    pub fn list_filings(
        &self,
        start_date: NaiveDate,
        end_date: NaiveDate,
        form_type: &str,
    ) -> Result<Vec<FilingRef>> {
        if start_date > end_date {
            return Err(Error::config(format!(
                "inverted date range: {start_date} > {end_date}"
            )));
        }
        if form_type.is_empty() {
            return Err(Error::config("form type must be non-empty"));
        }

        let mut refs = Vec::new();
        let mut skipped = 0usize;
        for (year, quarter) in quarters_in_range(start_date, end_date) {
            let rel = format!("edgar/full-index/{year}/QTR{quarter}/master.idx");
            let bytes = self.source.get(&rel)?;
            let text = String::from_utf8_lossy(&bytes);
            let (rows, skips) = parse_index(&text);
            skipped += skips;
            for row in rows {
                if row.filing_date < start_date || row.filing_date > end_date {
                    continue;
                }
                if !self.form_matches(&row.form_type, form_type) {
                    continue;
                }
                refs.push(row);
            }
        }
        if skipped > 0 {
            log::warn!("skipped {skipped} malformed index lines");
        }
        refs.sort_by(|a, b| {
            (a.filing_date, &a.accession_id).cmp(&(b.filing_date, &b.accession_id))
        });
        refs.dedup_by(|a, b| a.accession_id == b.accession_id);
        Ok(refs)
    }

    fn form_matches(&self, listed: &str, wanted: &str) -> bool {
        if listed == wanted {
            return true;
        }
        self.include_amended && listed == format!("{wanted}/A")
    }

    /// Return the document body, from cache when present, downloading and
    /// caching it otherwise.
    pub fn fetch_filing(&self, ref_: &FilingRef) -> Result<RawFiling> {
        if let Some((content, meta)) = self.cache.get(&ref_.accession_id)? {
            return Ok(RawFiling {
                ref_: ref_.clone(),
                content,
                fetched_at: meta.fetched_at,
                from_cache: true,
            });
        }
        let content = self.source.get(&ref_.document_url)?;
        if content.is_empty() {
            return Err(Error::data(format!(
                "empty document body for {}",
                ref_.accession_id
            )));
        }
        let meta = self
            .cache
            .put(&ref_.accession_id, &content, &ref_.document_url)?;
        Ok(RawFiling {
            ref_: ref_.clone(),
            content,
            fetched_at: meta.fetched_at,
            from_cache: false,
        })
    }
}

/// (year, quarter) pairs covering the date range, in order.
fn quarters_in_range(start: NaiveDate, end: NaiveDate) -> Vec<(i32, u32)> {
    let mut out = Vec::new();
    let (mut year, mut quarter) = (start.year(), (start.month() - 1) / 3 + 1);
    let (end_year, end_quarter) = (end.year(), (end.month() - 1) / 3 + 1);
    while (year, quarter) <= (end_year, end_quarter) {
        out.push((year, quarter));
        quarter += 1;
        if quarter > 4 {
            quarter = 1;
            year += 1;
        }
    }
    out
}

/// Parse an EDGAR master index: `CIK|Company Name|Form Type|Date Filed|File`.
///
/// Header furniture (lines without a `|`, the column-header line, dash
/// rules) is ignored; pipe-bearing lines that fail to parse are counted as
/// skips. Returns (rows, skipped).
pub fn parse_index(text: &str) -> (Vec<FilingRef>, usize) {
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for line in text.lines() {
        let line = line.trim_end();
        if !line.contains('|') {
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        if fields.len() != 5 {
            skipped += 1;
            log::warn!("malformed index line (expected 5 fields): {line}");
            continue;
        }
        if fields[0].eq_ignore_ascii_case("cik") {
            continue;
        }
        let Ok(filing_date) = NaiveDate::parse_from_str(fields[3], "%Y-%m-%d") else {
            skipped += 1;
            log::warn!("malformed index line (bad date): {line}");
            continue;
        };
        let document_url = fields[4].to_string();
        let Some(accession_id) = accession_from_path(&document_url) else {
            skipped += 1;
            log::warn!("malformed index line (no accession id in path): {line}");
            continue;
        };
        rows.push(FilingRef {
            cik: fields[0].to_string(),
            company_name: fields[1].to_string(),
            sic_code: "unknown".to_string(),
            form_type: fields[2].to_string(),
            filing_date,
            accession_id,
            document_url,
        });
    }
    (rows, skipped)
}

/// File stem of the index path, e.g. `edgar/data/1/0001-20-000001.txt`
/// → `0001-20-000001`.
fn accession_from_path(path: &str) -> Option<String> {
    Path::new(path)
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .map(|s| s.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const INDEX: &str = "\
Description: Master Index of EDGAR Dissemination Feed
Last Data Received: March 31, 2020

CIK|Company Name|Form Type|Date Filed|File Name
--------------------------------------------------------------------------------
100|ALPHA CORP|10-K|2020-01-30|edgar/data/100/0000000100-20-000001.txt
101|BETA INC|10-Q|2020-01-30|edgar/data/101/0000000101-20-000002.txt
102|GAMMA LLC|10-K|2020-01-31|edgar/data/102/0000000102-20-000003.txt
103|DELTA CO|10-K/A|2020-01-31|edgar/data/103/0000000103-20-000004.txt
104|BROKEN|10-K|not-a-date|edgar/data/104/0000000104-20-000005.txt
";

    #[test]
    fn index_parses_rows_and_counts_skips() {
        let (rows, skipped) = parse_index(INDEX);
        assert_eq!(rows.len(), 4);
        assert_eq!(skipped, 1);
        assert_eq!(rows[0].cik, "100");
        assert_eq!(rows[0].accession_id, "0000000100-20-000001");
        assert_eq!(rows[0].sic_code, "unknown");
        assert_eq!(
            rows[0].filing_date,
            NaiveDate::from_ymd_opt(2020, 1, 30).unwrap()
        );
    }

    #[test]
    fn quarters_cover_range() {
        let d = |y, m, d| NaiveDate::from_ymd_opt(y, m, d).unwrap();
        assert_eq!(
            quarters_in_range(d(2020, 1, 30), d(2020, 1, 30)),
            vec![(2020, 1)]
        );
        assert_eq!(
            quarters_in_range(d(2019, 11, 1), d(2020, 4, 2)),
            vec![(2019, 4), (2020, 1), (2020, 2)]
        );
    }

    #[test]
    fn accession_id_from_document_path() {
        assert_eq!(
            accession_from_path("edgar/data/1/0001-20-000001.txt").as_deref(),
            Some("0001-20-000001")
        );
        assert_eq!(accession_from_path(""), None);
    }
}
