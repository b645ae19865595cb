//! Industry mapping and weekly aggregation: SIC division lookup, per-week
//! component statistics, the compound risk index, and the topic heatmap.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use once_cell::sync::Lazy;

use crate::error::{Error, Result};

/// One row of the committed SIC division table.
#[derive(Debug, Clone)]
pub struct SicRange {
    pub low: u32,
    pub high: u32,
    pub division: String,
}

const SIC_TABLE: &str = include_str!("../data/sic_divisions.csv");

static SIC_RANGES: Lazy<Vec<SicRange>> =
    Lazy::new(|| parse_sic_table(SIC_TABLE).expect("committed SIC division table is valid"));

fn parse_sic_table(text: &str) -> Result<Vec<SicRange>> {
    let mut ranges = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::data(format!("SIC table line {}: bad row", i + 1)));
        }
        let parse = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| Error::data(format!("SIC table line {}: bad bound {s:?}", i + 1)))
        };
        ranges.push(SicRange {
            low: parse(fields[0])?,
            high: parse(fields[1])?,
            division: fields[2].to_string(),
        });
    }
    Ok(ranges)
}

pub fn sic_divisions() -> &'static [SicRange] {
    &SIC_RANGES
}

/// Map a 4-digit SIC code (or "unknown") to its division name; codes
/// outside every published range map to "Other".
pub fn sic_to_division(sic: &str) -> String {
    let Ok(code) = sic.parse::<u32>() else {
        return "Other".to_string();
    };
    SIC_RANGES
        .iter()
        .find(|r| (r.low..=r.high).contains(&code))
        .map(|r| r.division.clone())
        .unwrap_or_else(|| "Other".to_string())
}

/// ISO week identifier of a date, e.g. "2020-W05".
pub fn iso_week_id(date: NaiveDate) -> String {
    let week = date.iso_week();
    format!("{}-W{:02}", week.year(), week.week())
}

/// Per-filing inputs to the weekly aggregation.
#[derive(Debug, Clone)]
pub struct FilingSignal {
    pub industry: String,
    pub filing_date: NaiveDate,
    pub mention_count: usize,
    pub mentions_flag: bool,
    /// Crisis-sentence negativity; None when the filing had no crisis tokens.
    pub negativity: Option<f64>,
}

/// Component statistics of one (industry, week) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct IndustryWeekAggregate {
    pub industry: String,
    pub week: String,
    pub n_reports: usize,
    pub n_mentioning: usize,
    pub mention_share: f64,
    pub mean_mentions: f64,
    /// Mean over reports with a defined score; None when none have one.
    pub mean_negativity: Option<f64>,
}

impl IndustryWeekAggregate {
    /// Cells this thin are marked in exports: weekly statistics over very
    /// few reports swing hard.
    pub fn low_support(&self) -> bool {
        self.n_reports < 5
    }
}

/// Fold filings into (industry, week) cells, ordered by (industry, week).
/// `week_fn` maps a filing date to its week identifier.
pub fn aggregate(
    signals: &[FilingSignal],
    week_fn: impl Fn(NaiveDate) -> String,
) -> Vec<IndustryWeekAggregate> {
    struct Cell {
        n_reports: usize,
        n_mentioning: usize,
        mention_sum: usize,
        negativity_sum: f64,
        negativity_n: usize,
    }

    let mut cells: BTreeMap<(String, String), Cell> = BTreeMap::new();
    for signal in signals {
        let key = (signal.industry.clone(), week_fn(signal.filing_date));
        let cell = cells.entry(key).or_insert(Cell {
            n_reports: 0,
            n_mentioning: 0,
            mention_sum: 0,
            negativity_sum: 0.0,
            negativity_n: 0,
        });
        cell.n_reports += 1;
        if signal.mentions_flag {
            cell.n_mentioning += 1;
        }
        cell.mention_sum += signal.mention_count;
        if let Some(score) = signal.negativity {
            cell.negativity_sum += score;
            cell.negativity_n += 1;
        }
    }

    cells
        .into_iter()
        .map(|((industry, week), cell)| IndustryWeekAggregate {
            industry,
            week,
            n_reports: cell.n_reports,
            n_mentioning: cell.n_mentioning,
            mention_share: cell.n_mentioning as f64 / cell.n_reports as f64,
            mean_mentions: cell.mention_sum as f64 / cell.n_reports as f64,
            mean_negativity: (cell.negativity_n > 0)
                .then(|| cell.negativity_sum / cell.negativity_n as f64),
        })
        .collect()
}

/// The compound index value of one cell with its components.
#[derive(Debug, Clone, PartialEq)]
pub struct CoRiskPoint {
    pub industry: String,
    pub week: String,
    /// (mention share, capped mean mentions, negativity), each in [0, 1].
    pub components: (f64, f64, f64),
    pub value: f64,
}

/// Geometric mean of mention share, cap-normalized mean mentions, and mean
/// negativity. Undefined negativity enters as 0, so the index starts at
/// zero until crisis text appears.
pub fn corisk(agg: &IndustryWeekAggregate, mention_cap: f64) -> CoRiskPoint {
    let s = agg.mention_share;
    let m = (agg.mean_mentions / mention_cap).min(1.0);
    let n = agg.mean_negativity.unwrap_or(0.0);
    CoRiskPoint {
        industry: agg.industry.clone(),
        week: agg.week.clone(),
        components: (s, m, n),
        value: (s * m * n).cbrt(),
    }
}

/// Topic rates per industry: crisis sentences hitting each topic per 1,000
/// crisis sentences of that industry.
#[derive(Debug, Clone)]
pub struct TopicHeatmap {
    pub topics: Vec<String>,
    pub rows: Vec<HeatmapRow>,
}

#[derive(Debug, Clone)]
pub struct HeatmapRow {
    pub industry: String,
    pub crisis_sentences: usize,
    /// Aligned with `topics`; None when the industry has no crisis
    /// sentences (a rate of 0/0 is absent, not zero).
    pub rates: Vec<Option<f64>>,
}

/// Per-filing topic inputs: industry, crisis sentence count, and hits per
/// topic in a shared topic order.
#[derive(Debug, Clone)]
pub struct TopicSignal {
    pub industry: String,
    pub crisis_sentence_count: usize,
    pub hits: Vec<usize>,
}

/// Sum hits and crisis sentences per industry and convert to rates per
/// 1,000. Rows come out sorted by industry.
pub fn heatmap(signals: &[TopicSignal], topics: &[String]) -> TopicHeatmap {
    struct Row {
        crisis_sentences: usize,
        hits: Vec<usize>,
    }

    let mut by_industry: BTreeMap<String, Row> = BTreeMap::new();
    for signal in signals {
        assert_eq!(signal.hits.len(), topics.len(), "topic order mismatch");
        let row = by_industry.entry(signal.industry.clone()).or_insert(Row {
            crisis_sentences: 0,
            hits: vec![0; topics.len()],
        });
        row.crisis_sentences += signal.crisis_sentence_count;
        for (total, hit) in row.hits.iter_mut().zip(&signal.hits) {
            *total += hit;
        }
    }

    let rows = by_industry
        .into_iter()
        .map(|(industry, row)| HeatmapRow {
            industry,
            crisis_sentences: row.crisis_sentences,
            rates: row
                .hits
                .iter()
                .map(|&h| {
                    (row.crisis_sentences > 0)
                        .then(|| 1000.0 * h as f64 / row.crisis_sentences as f64)
                })
                .collect(),
        })
        .collect();

    TopicHeatmap {
        topics: topics.to_vec(),
        rows,
    }
}
