//! Per-filing analysis: join mention counting, crisis-sentence
//! sentiment, and topic tagging into one record per document.
//!
//! Mention counts and negativity are measured over the whole cleaned
//! document; topic tagging is restricted to the risk-factor section
//! when one was found (the whole document otherwise).

use crate::error::Result;
use crate::exec;
use crate::ingest::RawFiling;
use crate::keywords::{self, KeywordSpec};
use crate::parser::{self, ExtractionMethod, FilingText};
use crate::sentiment::{self, Lexicon};

/// Everything downstream stages need about one filing.
#[derive(Debug, Clone, PartialEq)]
pub struct FilingMetrics {
    pub accession_id: String,
    pub cik: String,
    pub sic_code: String,
    pub industry: String,
    pub filing_date: chrono::NaiveDate,
    pub extraction_method: ExtractionMethod,
    /// Crisis-keyword hits over the whole document.
    pub mention_count: usize,
    pub mentions_flag: bool,
    /// Crisis sentences in the whole document (negativity scope).
    pub crisis_sentence_count: usize,
    pub negative_token_count: usize,
    pub total_token_count: usize,
    pub negativity: Option<f64>,
    /// Crisis sentences in the topic scope (risk section when found).
    pub topic_crisis_sentence_count: usize,
    /// Hit counts aligned with `KeywordSpec::topic_names` order.
    pub topic_hits: Vec<usize>,
}

pub fn analyze_filing(
    raw: &RawFiling,
    spec: &KeywordSpec,
    lexicon: &Lexicon,
) -> Result<FilingMetrics> {
    let text = parser::extract_text(raw)?;
    Ok(analyze_text(&text, spec, lexicon))
}

pub fn analyze_text(text: &FilingText, spec: &KeywordSpec, lexicon: &Lexicon) -> FilingMetrics {
    let mentions = keywords::count_mentions(text, spec);

    let full_sentences = parser::split_sentences(&text.full_text);
    let crisis_full = keywords::crisis_sentences(&full_sentences, spec);
    let score = sentiment::negativity(&text.ref_, &crisis_full, lexicon);

    let topic_sentences = parser::split_sentences(text.topic_text());
    let crisis_topic = keywords::crisis_sentences(&topic_sentences, spec);
    let hits = keywords::topic_hits(&text.ref_, &crisis_topic, spec);

    FilingMetrics {
        accession_id: text.ref_.accession_id.clone(),
        cik: text.ref_.cik.clone(),
        sic_code: text.ref_.sic_code.clone(),
        industry: crate::index::sic_to_division(&text.ref_.sic_code).to_string(),
        filing_date: text.ref_.filing_date,
        extraction_method: text.extraction_method,
        mention_count: mentions.mention_count,
        mentions_flag: mentions.mentions_flag,
        crisis_sentence_count: score.crisis_sentence_count,
        negative_token_count: score.negative_token_count,
        total_token_count: score.total_token_count,
        negativity: score.score,
        topic_crisis_sentence_count: hits.crisis_sentence_count,
        topic_hits: spec
            .topic_names()
            .iter()
            .map(|name| hits.count_for(name))
            .collect(),
    }
}

/// Tokens of the topic-scope crisis sentences, the per-document input
/// for topic modeling.
pub fn crisis_doc_tokens(text: &FilingText, spec: &KeywordSpec) -> Vec<String> {
    let sentences = parser::split_sentences(text.topic_text());
    keywords::crisis_sentences(&sentences, spec)
        .iter()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect()
}

/// Outcome of a batch run; failures are counted, not fatal.
#[derive(Debug)]
pub struct BatchOutcome {
    /// Sorted by accession id regardless of input or schedule order.
    pub metrics: Vec<FilingMetrics>,
    pub failures: usize,
}

pub fn analyze_batch(raws: &[RawFiling], spec: &KeywordSpec, lexicon: &Lexicon) -> BatchOutcome {
    let results = exec::map_collect(raws.iter().collect::<Vec<_>>(), |raw| {
        analyze_filing(raw, spec, lexicon).map_err(|e| (raw.ref_.accession_id.clone(), e))
    });
    collect_outcome(results)
}

/// Sequential twin of [`analyze_batch`] for benchmark comparison.
pub fn analyze_batch_serial(
    raws: &[RawFiling],
    spec: &KeywordSpec,
    lexicon: &Lexicon,
) -> BatchOutcome {
    let results = exec::map_collect_serial(raws.iter().collect::<Vec<_>>(), |raw| {
        analyze_filing(raw, spec, lexicon).map_err(|e| (raw.ref_.accession_id.clone(), e))
    });
    collect_outcome(results)
}

fn collect_outcome(
    results: Vec<std::result::Result<FilingMetrics, (String, crate::error::Error)>>,
) -> BatchOutcome {
    let mut metrics = Vec::with_capacity(results.len());
    let mut failures = 0;
    for result in results {
        match result {
            Ok(m) => metrics.push(m),
            Err((accession_id, error)) => {
                failures += 1;
                log::warn!("skipping filing {accession_id}: {error}");
            }
        }
    }
    metrics.sort_by(|a, b| a.accession_id.cmp(&b.accession_id));
    BatchOutcome { metrics, failures }
}
