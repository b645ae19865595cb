//! Subcommand orchestration: each command reads its stage inputs,
//! delegates to the library, writes its stage outputs, and returns a
//! one-line summary for stdout.

use std::collections::BTreeSet;
use std::path::PathBuf;

use chrono::Utc;

use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::exec;
use crate::index::{self, FilingSignal, TopicSignal};
use crate::ingest::{load_prices, Cache, EdgarClient, FetchSource, FilingRef, Ingestor, RawFiling};
use crate::keywords::{self, KeywordSpec};
use crate::output::{self, ManifestRow};
use crate::parser;
use crate::pipeline::{self, FilingMetrics};
use crate::sentiment::{self, Lexicon, NegativityScore};
use crate::timeseries::{self, Series};
use crate::topics;

/// Label for the cross-industry pooled rows in index outputs.
pub const POOLED_INDUSTRY: &str = "All industries";

pub fn manifest_path(config: &RunConfig) -> PathBuf {
    config.paths.out.join("manifest.csv")
}

pub fn filings_path(config: &RunConfig) -> PathBuf {
    config.paths.out.join("filings.csv")
}

fn load_spec(config: &RunConfig) -> Result<KeywordSpec> {
    match &config.paths.keywords {
        Some(path) => keywords::load_keyword_spec(path),
        None => Ok(KeywordSpec::builtin_default()),
    }
}

fn keywords_label(config: &RunConfig) -> String {
    match &config.paths.keywords {
        Some(path) => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string()),
        None => "builtin".to_string(),
    }
}

fn load_lexicon(config: &RunConfig) -> Result<Lexicon> {
    let path = config.paths.lexicon.as_ref().ok_or_else(|| {
        Error::config("paths.lexicon is required here; point it at a negative-word list")
    })?;
    sentiment::load_lexicon(path)
}

fn read_manifest_required(config: &RunConfig) -> Result<Vec<ManifestRow>> {
    let path = manifest_path(config);
    if !path.is_file() {
        return Err(Error::data(format!(
            "manifest not found at {}; run `corisk fetch` first",
            path.display()
        )));
    }
    output::read_manifest(&path)
}

fn read_filings_required(config: &RunConfig) -> Result<(Vec<FilingMetrics>, Vec<String>)> {
    let path = filings_path(config);
    if !path.is_file() {
        return Err(Error::data(format!(
            "filing metrics not found at {}; run `corisk analyze` first",
            path.display()
        )));
    }
    output::read_filings(&path)
}

/// Minimal ref for records flowing back out of filings.csv.
fn metrics_ref(m: &FilingMetrics, form_type: &str) -> FilingRef {
    FilingRef {
        cik: m.cik.clone(),
        company_name: String::new(),
        sic_code: m.sic_code.clone(),
        form_type: form_type.to_string(),
        filing_date: m.filing_date,
        accession_id: m.accession_id.clone(),
        document_url: String::new(),
    }
}

pub fn cmd_fetch(config: &RunConfig) -> Result<String> {
    let (since, until) = config.date_range()?;
    let source = match config.mode {
        Mode::Live => FetchSource::Live(EdgarClient::new(
            config.edgar.base_url.clone(),
            config.edgar.rate_per_sec,
        )?),
        Mode::Fixture => FetchSource::Fixture {
            root: config.fixture.root.clone().expect("validated fixture root"),
        },
    };
    let cache = Cache::new(&config.cache.dir)?;
    let ingestor = Ingestor::new(source, cache, config.include_amended);

    let listings = ingestor.list_filings(since, until, &config.form_type)?;
    let mut rows = Vec::with_capacity(listings.len());
    let mut downloaded = 0usize;
    let mut from_cache = 0usize;
    for ref_ in &listings {
        let raw = ingestor.fetch_filing(ref_)?;
        if raw.from_cache {
            from_cache += 1;
        } else {
            downloaded += 1;
        }
        let sic_code =
            parser::extract_sic_code(&raw.content).unwrap_or_else(|| ref_.sic_code.clone());
        rows.push(ManifestRow {
            accession_id: ref_.accession_id.clone(),
            cik: ref_.cik.clone(),
            sic_code,
            filing_date: ref_.filing_date,
            cache_path: ingestor
                .cache()
                .path_for(&ref_.accession_id)
                .display()
                .to_string(),
        });
    }

    let path = manifest_path(config);
    output::write_manifest(&path, &rows, &config.hash())?;
    Ok(format!(
        "fetch: {} filings listed, {downloaded} downloaded, {from_cache} from cache -> {}",
        rows.len(),
        path.display()
    ))
}

fn raw_from_cache_path(row: &ManifestRow, form_type: &str) -> std::io::Result<RawFiling> {
    let content = std::fs::read(&row.cache_path)?;
    Ok(RawFiling {
        ref_: FilingRef {
            cik: row.cik.clone(),
            company_name: String::new(),
            sic_code: row.sic_code.clone(),
            form_type: form_type.to_string(),
            filing_date: row.filing_date,
            accession_id: row.accession_id.clone(),
            document_url: String::new(),
        },
        content,
        fetched_at: Utc::now(),
        from_cache: true,
    })
}

pub fn cmd_analyze(config: &RunConfig) -> Result<String> {
    let rows = read_manifest_required(config)?;
    let spec = load_spec(config)?;
    let lexicon = load_lexicon(config)?;

    let mut raws = Vec::with_capacity(rows.len());
    let mut failures = 0usize;
    for row in &rows {
        match raw_from_cache_path(row, &config.form_type) {
            Ok(raw) => raws.push(raw),
            Err(e) => {
                failures += 1;
                log::warn!(
                    "skipping filing {}: cannot read cached document {}: {e}",
                    row.accession_id,
                    row.cache_path
                );
            }
        }
    }

    let outcome = pipeline::analyze_batch(&raws, &spec, &lexicon);
    failures += outcome.failures;

    let path = filings_path(config);
    output::write_filings(
        &path,
        &outcome.metrics,
        &spec.topic_names(),
        &config.hash(),
        &[
            ("lexicon", lexicon.name.clone()),
            ("keywords", keywords_label(config)),
        ],
    )?;
    Ok(format!(
        "analyze: {} filings analyzed, {failures} failures -> {}",
        outcome.metrics.len(),
        path.display()
    ))
}

pub fn cmd_index(config: &RunConfig) -> Result<String> {
    let (metrics, topic_names) = read_filings_required(config)?;
    if metrics.is_empty() {
        return Err(Error::data(
            "no filing metrics to aggregate; filings.csv has no rows",
        ));
    }

    let mut signals = Vec::with_capacity(metrics.len() * 2);
    let mut topic_signals = Vec::with_capacity(metrics.len() * 2);
    for m in &metrics {
        for industry in [m.industry.as_str(), POOLED_INDUSTRY] {
            signals.push(FilingSignal {
                industry: industry.to_string(),
                filing_date: m.filing_date,
                mention_count: m.mention_count,
                mentions_flag: m.mentions_flag,
                negativity: m.negativity,
            });
            topic_signals.push(TopicSignal {
                industry: industry.to_string(),
                crisis_sentence_count: m.topic_crisis_sentence_count,
                hits: m.topic_hits.clone(),
            });
        }
    }

    let aggregates = index::aggregate(&signals, index::iso_week_id);
    let rows: Vec<_> = aggregates
        .iter()
        .map(|agg| (agg.clone(), index::corisk(agg, config.index.mention_cap)))
        .collect();
    let corisk_path = config.paths.out.join("corisk.csv");
    output::write_corisk(
        &corisk_path,
        &rows,
        &config.hash(),
        config.index.mention_cap,
    )?;

    let heatmap = index::heatmap(&topic_signals, &topic_names);
    let heatmap_path = config.paths.out.join("heatmap.csv");
    output::write_heatmap(&heatmap_path, &heatmap, &config.hash())?;

    Ok(format!(
        "index: {} industry-week cells, {} heatmap rows -> {}, {}",
        rows.len(),
        heatmap.rows.len(),
        corisk_path.display(),
        heatmap_path.display()
    ))
}

pub fn cmd_correlate(config: &RunConfig) -> Result<String> {
    let (metrics, _) = read_filings_required(config)?;
    let prices_path = config.paths.prices.as_ref().ok_or_else(|| {
        Error::config("paths.prices is required for correlate; point it at a date,close CSV")
    })?;
    let points = load_prices(prices_path)?;
    if points.is_empty() {
        return Err(Error::data(format!(
            "no price rows in {}",
            prices_path.display()
        )));
    }
    let series_names: BTreeSet<&str> = points.iter().map(|p| p.series_name.as_str()).collect();
    let series_name = points[0].series_name.clone();
    if series_names.len() > 1 {
        log::info!(
            "{} price series found; correlating against {series_name:?}",
            series_names.len()
        );
    }
    let prices = Series::from_pairs(
        &series_name,
        points
            .iter()
            .filter(|p| p.series_name == series_name)
            .map(|p| (p.date, p.close)),
    )?;

    let scores: Vec<NegativityScore> = metrics
        .iter()
        .map(|m| NegativityScore {
            ref_: metrics_ref(m, &config.form_type),
            score: m.negativity,
            negative_token_count: m.negative_token_count,
            total_token_count: m.total_token_count,
            crisis_sentence_count: m.crisis_sentence_count,
        })
        .collect();
    let weighting = config.weighting()?;
    let daily = timeseries::daily_series(&scores, weighting)?;
    let smoothed = timeseries::rolling_mean(&daily, config.correlate.smoothing_window);

    let max_lag = config.correlate.max_lag;
    let smoothed_result = timeseries::cross_correlation(&smoothed, &prices, max_lag)?;
    let raw_result = timeseries::cross_correlation(&daily, &prices, max_lag)?;

    let xcorr_path = config.paths.out.join("xcorr.csv");
    output::write_xcorr(
        &xcorr_path,
        &smoothed_result,
        &config.hash(),
        &[
            (
                "smoothing_window",
                config.correlate.smoothing_window.to_string(),
            ),
            ("weighting", config.correlate.weighting.clone()),
            ("prices", series_name.clone()),
        ],
    )?;
    let raw_path = config.paths.out.join("xcorr_raw.csv");
    output::write_xcorr(
        &raw_path,
        &raw_result,
        &config.hash(),
        &[
            ("smoothing_window", "1".to_string()),
            ("weighting", config.correlate.weighting.clone()),
            ("prices", series_name),
        ],
    )?;

    Ok(format!(
        "correlate: best lag {} days, rho {} over {} lags -> {}",
        smoothed_result.best_lag,
        output::fmt_f64(smoothed_result.best_rho),
        smoothed_result.by_lag.len(),
        xcorr_path.display()
    ))
}

pub fn cmd_topics(config: &RunConfig) -> Result<String> {
    let manifest = read_manifest_required(config)?;
    // Topic modeling consumes the same crisis-sentence scope the
    // analyze stage tags, so require that stage to have run.
    let filings = filings_path(config);
    if !filings.is_file() {
        return Err(Error::data(format!(
            "filing metrics not found at {}; run `corisk analyze` first",
            filings.display()
        )));
    }
    let spec = load_spec(config)?;
    let stopwords = match &config.paths.stopwords {
        Some(path) => topics::load_stopwords(path)?,
        None => topics::builtin_stopwords(),
    };

    let extracted = exec::map_collect(manifest.iter().collect::<Vec<_>>(), |row| {
        let raw = raw_from_cache_path(row, &config.form_type)
            .map_err(|e| (row.accession_id.clone(), Error::data(e.to_string())))?;
        let text = parser::extract_text(&raw).map_err(|e| (row.accession_id.clone(), e))?;
        Ok::<_, (String, Error)>((
            row.accession_id.clone(),
            pipeline::crisis_doc_tokens(&text, &spec),
        ))
    });
    let mut docs = Vec::with_capacity(extracted.len());
    let mut failures = 0usize;
    for result in extracted {
        match result {
            Ok(doc) => docs.push(doc),
            Err((accession_id, error)) => {
                failures += 1;
                log::warn!("skipping filing {accession_id}: {error}");
            }
        }
    }

    let corpus = topics::build_corpus(&docs, &stopwords, config.lda.max_df, config.lda.min_df)?;
    let template = config.lda_template();
    let [lo, hi] = config.lda.k_range;
    let (chosen_k, scores) = topics::select_k(&corpus, lo..=hi, &template)?;
    let model = topics::fit_lda(&corpus, &template.for_k(chosen_k))?;

    let alpha_label = match config.lda.alpha {
        Some(a) => output::fmt_f64(a),
        None => "50/k".to_string(),
    };
    let extras = [
        ("k_range", format!("{lo}..{hi}")),
        ("alpha", alpha_label),
        ("beta", output::fmt_f64(config.lda.beta)),
        ("iterations", config.lda.iterations.to_string()),
        ("burn_in", config.lda.burn_in.to_string()),
        ("seed", config.seed.to_string()),
        ("min_df", config.lda.min_df.to_string()),
        ("max_df", output::fmt_f64(config.lda.max_df)),
        ("docs", corpus.num_docs().to_string()),
        ("vocab", corpus.vocab_size().to_string()),
        ("chosen_k", chosen_k.to_string()),
    ];

    let coherence_path = config.paths.out.join("lda_coherence.csv");
    output::write_coherence(&coherence_path, &scores, chosen_k, &config.hash(), &extras)?;

    let mut word_rows = Vec::new();
    for (topic, words) in topics::top_words(&model, 10).iter().enumerate() {
        for (rank, (word, count)) in words.iter().enumerate() {
            word_rows.push((topic, rank + 1, word.clone(), *count));
        }
    }
    let words_path = config.paths.out.join("lda_top_words.csv");
    output::write_top_words(&words_path, &word_rows, &config.hash(), &extras)?;

    Ok(format!(
        "topics: chose K={chosen_k} from {lo}..{hi} over {} docs ({} words), {failures} failures -> {}, {}",
        corpus.num_docs(),
        corpus.vocab_size(),
        coherence_path.display(),
        words_path.display()
    ))
}

pub fn cmd_all(config: &RunConfig) -> Result<Vec<String>> {
    Ok(vec![
        cmd_fetch(config)?,
        cmd_analyze(config)?,
        cmd_index(config)?,
        cmd_correlate(config)?,
        cmd_topics(config)?,
    ])
}
