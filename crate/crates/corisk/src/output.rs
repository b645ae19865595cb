//! CSV output and stage-handoff files.
//!
//! Every file starts with two comment lines: a metadata line carrying
//! the tool version, config hash, and file-specific parameters, then a
//! timestamp line. Golden comparisons skip the timestamp line only, so
//! everything else must be byte-deterministic.

use std::path::Path;

use chrono::{NaiveDate, Utc};

use crate::error::{Error, Result};
use crate::index::{CoRiskPoint, IndustryWeekAggregate, TopicHeatmap};
use crate::parser::ExtractionMethod;
use crate::pipeline::FilingMetrics;
use crate::timeseries::CrossCorrResult;
use crate::topics::KScore;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `key=value` pairs appended to the metadata line.
pub type MetaPairs<'a> = &'a [(&'a str, String)];

fn metadata_line(config_hash: &str, extras: MetaPairs) -> String {
    let mut line = format!("# corisk {TOOL_VERSION} config={config_hash}");
    for (key, value) in extras {
        line.push_str(&format!(" {key}={value}"));
    }
    line
}

fn field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

pub fn fmt_f64(value: f64) -> String {
    value.to_string()
}

pub fn fmt_opt_f64(value: Option<f64>) -> String {
    value.map(fmt_f64).unwrap_or_default()
}

fn write_table(
    path: &Path,
    config_hash: &str,
    extras: MetaPairs,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&metadata_line(config_hash, extras));
    out.push('\n');
    out.push_str(&format!(
        "# generated_at={}\n",
        Utc::now().format("%Y-%m-%dT%H:%M:%SZ")
    ));
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| field(c)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| Error::io("creating output directory", parent, e))?;
    }
    std::fs::write(path, out).map_err(|e| Error::io("writing output", path, e))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))
}

fn parse_date(text: &str, path: &Path, row: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map_err(|_| Error::data(format!("{} row {row}: bad date {text:?}", path.display())))
}

/// One fetched filing as recorded in manifest.csv.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub accession_id: String,
    pub cik: String,
    pub sic_code: String,
    pub filing_date: NaiveDate,
    pub cache_path: String,
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow], config_hash: &str) -> Result<()> {
    write_table(
        path,
        config_hash,
        &[],
        &["accession_id", "cik", "sic", "date", "cache_path"],
        rows.iter().map(|r| {
            vec![
                r.accession_id.clone(),
                r.cik.clone(),
                r.sic_code.clone(),
                r.filing_date.format("%Y-%m-%d").to_string(),
                r.cache_path.clone(),
            ]
        }),
    )
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let mut reader = csv_reader(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        if record.len() != 5 {
            return Err(Error::data(format!(
                "{} row {}: expected 5 fields, found {}",
                path.display(),
                i + 3,
                record.len()
            )));
        }
        rows.push(ManifestRow {
            accession_id: record[0].to_string(),
            cik: record[1].to_string(),
            sic_code: record[2].to_string(),
            filing_date: parse_date(&record[3], path, i + 3)?,
            cache_path: record[4].to_string(),
        });
    }
    Ok(rows)
}

fn parse_extraction_method(text: &str) -> Result<ExtractionMethod> {
    match text {
        "item1a_headers" => Ok(ExtractionMethod::Item1aHeaders),
        "whole_document_fallback" => Ok(ExtractionMethod::WholeDocumentFallback),
        other => Err(Error::data(format!("unknown extraction method {other:?}"))),
    }
}

pub fn write_filings(
    path: &Path,
    metrics: &[FilingMetrics],
    topic_names: &[String],
    config_hash: &str,
    extras: MetaPairs,
) -> Result<()> {
    let mut header: Vec<String> = [
        "accession_id",
        "cik",
        "sic",
        "industry",
        "date",
        "extraction_method",
        "mention_count",
        "mentions_flag",
        "crisis_sentences",
        "negative_tokens",
        "total_tokens",
        "negativity",
        "topic_crisis_sentences",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(topic_names.iter().map(|name| format!("hits_{name}")));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();

    write_table(
        path,
        config_hash,
        extras,
        &header_refs,
        metrics.iter().map(|m| {
            assert_eq!(m.topic_hits.len(), topic_names.len());
            let mut row = vec![
                m.accession_id.clone(),
                m.cik.clone(),
                m.sic_code.clone(),
                m.industry.clone(),
                m.filing_date.format("%Y-%m-%d").to_string(),
                m.extraction_method.as_str().to_string(),
                m.mention_count.to_string(),
                m.mentions_flag.to_string(),
                m.crisis_sentence_count.to_string(),
                m.negative_token_count.to_string(),
                m.total_token_count.to_string(),
                fmt_opt_f64(m.negativity),
                m.topic_crisis_sentence_count.to_string(),
            ];
            row.extend(m.topic_hits.iter().map(|h| h.to_string()));
            row
        }),
    )
}

/// Filing records plus the topic names recovered from the header.
pub fn read_filings(path: &Path) -> Result<(Vec<FilingMetrics>, Vec<String>)> {
    let mut reader = csv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?
        .clone();
    const FIXED: usize = 13;
    if headers.len() < FIXED {
        return Err(Error::data(format!(
            "{}: unrecognized filings header",
            path.display()
        )));
    }
    let topic_names: Vec<String> = headers
        .iter()
        .skip(FIXED)
        .map(|h| {
            h.strip_prefix("hits_")
                .map(|s| s.to_string())
                .ok_or_else(|| Error::data(format!("{}: unexpected column {h:?}", path.display())))
        })
        .collect::<Result<_>>()?;

    let parse_usize = |text: &str, row: usize| -> Result<usize> {
        text.parse()
            .map_err(|_| Error::data(format!("{} row {row}: bad count {text:?}", path.display())))
    };

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        let row_no = i + 4;
        if record.len() != FIXED + topic_names.len() {
            return Err(Error::data(format!(
                "{} row {row_no}: expected {} fields, found {}",
                path.display(),
                FIXED + topic_names.len(),
                record.len()
            )));
        }
        let negativity = if record[11].is_empty() {
            None
        } else {
            Some(record[11].parse::<f64>().map_err(|_| {
                Error::data(format!(
                    "{} row {row_no}: bad negativity {:?}",
                    path.display(),
                    &record[11]
                ))
            })?)
        };
        let topic_hits = (FIXED..record.len())
            .map(|j| parse_usize(&record[j], row_no))
            .collect::<Result<Vec<_>>>()?;
        rows.push(FilingMetrics {
            accession_id: record[0].to_string(),
            cik: record[1].to_string(),
            sic_code: record[2].to_string(),
            industry: record[3].to_string(),
            filing_date: parse_date(&record[4], path, row_no)?,
            extraction_method: parse_extraction_method(&record[5])?,
            mention_count: parse_usize(&record[6], row_no)?,
            mentions_flag: match &record[7] {
                "true" => true,
                "false" => false,
                other => {
                    return Err(Error::data(format!(
                        "{} row {row_no}: bad flag {other:?}",
                        path.display()
                    )))
                }
            },
            crisis_sentence_count: parse_usize(&record[8], row_no)?,
            negative_token_count: parse_usize(&record[9], row_no)?,
            total_token_count: parse_usize(&record[10], row_no)?,
            negativity,
            topic_crisis_sentence_count: parse_usize(&record[12], row_no)?,
            topic_hits,
        });
    }
    Ok((rows, topic_names))
}

/// Weekly index rows: aggregates joined with their index values.
pub fn write_corisk(
    path: &Path,
    rows: &[(IndustryWeekAggregate, CoRiskPoint)],
    config_hash: &str,
    mention_cap: f64,
) -> Result<()> {
    write_table(
        path,
        config_hash,
        &[("mention_cap", fmt_f64(mention_cap))],
        &[
            "industry",
            "week",
            "n_reports",
            "mention_share",
            "mean_mentions",
            "mean_negativity",
            "corisk",
            "low_support",
        ],
        rows.iter().map(|(agg, point)| {
            debug_assert_eq!(agg.industry, point.industry);
            debug_assert_eq!(agg.week, point.week);
            vec![
                agg.industry.clone(),
                agg.week.clone(),
                agg.n_reports.to_string(),
                fmt_f64(agg.mention_share),
                fmt_f64(agg.mean_mentions),
                fmt_opt_f64(agg.mean_negativity),
                fmt_f64(point.value),
                agg.low_support().to_string(),
            ]
        }),
    )
}

pub fn write_heatmap(path: &Path, heatmap: &TopicHeatmap, config_hash: &str) -> Result<()> {
    let mut rows = Vec::new();
    for row in &heatmap.rows {
        for (topic, rate) in heatmap.topics.iter().zip(&row.rates) {
            rows.push(vec![
                row.industry.clone(),
                topic.clone(),
                fmt_opt_f64(*rate),
                row.crisis_sentences.to_string(),
            ]);
        }
    }
    write_table(
        path,
        config_hash,
        &[],
        &["industry", "topic", "rate_per_1000", "crisis_sentences"],
        rows,
    )
}

pub fn write_xcorr(
    path: &Path,
    result: &CrossCorrResult,
    config_hash: &str,
    extras: MetaPairs,
) -> Result<()> {
    let mut all = vec![(
        "convention".to_string(),
        "positive_lag_means_prices_lag_text".to_string(),
    )];
    all.extend(extras.iter().map(|(k, v)| (k.to_string(), v.clone())));
    all.push(("best_lag".to_string(), result.best_lag.to_string()));
    all.push(("best_rho".to_string(), fmt_f64(result.best_rho)));
    let extra_refs: Vec<(&str, String)> =
        all.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    write_table(
        path,
        config_hash,
        &extra_refs,
        &["lag_days", "rho", "n_pairs"],
        result.by_lag.iter().map(|lag| {
            vec![
                lag.lag.to_string(),
                fmt_opt_f64(lag.rho),
                lag.n_pairs.to_string(),
            ]
        }),
    )
}

pub fn write_coherence(
    path: &Path,
    scores: &[KScore],
    chosen_k: usize,
    config_hash: &str,
    extras: MetaPairs,
) -> Result<()> {
    write_table(
        path,
        config_hash,
        extras,
        &["k", "mean_coherence", "selected"],
        scores.iter().map(|s| {
            vec![
                s.k.to_string(),
                fmt_f64(s.mean_coherence),
                (s.k == chosen_k).to_string(),
            ]
        }),
    )
}

/// `rows` are (topic, rank, word, count) with rank starting at 1.
pub fn write_top_words(
    path: &Path,
    rows: &[(usize, usize, String, u32)],
    config_hash: &str,
    extras: MetaPairs,
) -> Result<()> {
    write_table(
        path,
        config_hash,
        extras,
        &["topic", "rank", "word", "count"],
        rows.iter().map(|(topic, rank, word, count)| {
            vec![
                topic.to_string(),
                rank.to_string(),
                word.clone(),
                count.to_string(),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::LagCorrelation;

    fn sample_metrics(accession: &str) -> FilingMetrics {
        FilingMetrics {
            accession_id: accession.to_string(),
            cik: "77".into(),
            sic_code: "2834".into(),
            industry: "Manufacturing".into(),
            filing_date: NaiveDate::from_ymd_opt(2020, 2, 5).unwrap(),
            extraction_method: ExtractionMethod::Item1aHeaders,
            mention_count: 3,
            mentions_flag: true,
            crisis_sentence_count: 2,
            negative_token_count: 1,
            total_token_count: 16,
            negativity: Some(0.0625),
            topic_crisis_sentence_count: 2,
            topic_hits: vec![1, 0],
        }
    }

    #[test]
    fn manifest_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        let rows = vec![ManifestRow {
            accession_id: "0000000001-20-000001".into(),
            cik: "1".into(),
            sic_code: "2834".into(),
            filing_date: NaiveDate::from_ymd_opt(2020, 2, 3).unwrap(),
            cache_path: "cache/ab/0000000001-20-000001".into(),
        }];
        write_manifest(&path, &rows, "deadbeef0123").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# corisk "));
        assert!(lines.next().unwrap().starts_with("# generated_at="));
        assert_eq!(
            lines.next().unwrap(),
            "accession_id,cik,sic,date,cache_path"
        );
        assert_eq!(read_manifest(&path).unwrap(), rows);
    }

    #[test]
    fn filings_roundtrip_with_missing_negativity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("filings.csv");
        let mut quiet = sample_metrics("b");
        quiet.negativity = None;
        quiet.mentions_flag = false;
        quiet.topic_hits = vec![0, 0];
        let metrics = vec![sample_metrics("a"), quiet];
        let topics = vec!["Supply".to_string(), "Travel".to_string()];
        write_filings(&path, &metrics, &topics, "deadbeef0123", &[]).unwrap();

        let (back, names) = read_filings(&path).unwrap();
        assert_eq!(names, topics);
        assert_eq!(back, metrics);
    }

    #[test]
    fn corisk_floats_use_shortest_form() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corisk.csv");
        let agg = IndustryWeekAggregate {
            industry: "Retail".into(),
            week: "2020-W06".into(),
            n_reports: 2,
            n_mentioning: 1,
            mention_share: 0.5,
            mean_mentions: 2.0,
            mean_negativity: None,
        };
        let point = CoRiskPoint {
            industry: "Retail".into(),
            week: "2020-W06".into(),
            components: (0.5, 0.08, 0.0),
            value: 0.0,
        };
        write_corisk(&path, &[(agg, point)], "deadbeef0123", 25.0).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let row = text.lines().last().unwrap();
        assert_eq!(row, "Retail,2020-W06,2,0.5,2,,0,true");
        assert!(text.lines().next().unwrap().contains("mention_cap=25"));
    }

    #[test]
    fn xcorr_metadata_names_convention_and_best_lag() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("xcorr.csv");
        let result = CrossCorrResult {
            by_lag: vec![
                LagCorrelation {
                    lag: -1,
                    rho: None,
                    n_pairs: 2,
                },
                LagCorrelation {
                    lag: 0,
                    rho: Some(-0.25),
                    n_pairs: 5,
                },
            ],
            best_lag: 0,
            best_rho: -0.25,
        };
        write_xcorr(
            &path,
            &result,
            "deadbeef0123",
            &[("smoothing_window", "7".into())],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let meta = text.lines().next().unwrap();
        assert!(meta.contains("convention=positive_lag_means_prices_lag_text"));
        assert!(meta.contains("smoothing_window=7"));
        assert!(meta.contains("best_lag=0"));
        assert!(meta.contains("best_rho=-0.25"));
        assert!(text.lines().any(|l| l == "-1,,2"));
        assert!(text.lines().any(|l| l == "0,-0.25,5"));
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        assert_eq!(field("plain"), "plain");
        assert_eq!(field("a,b"), "\"a,b\"");
        assert_eq!(field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
