//! Exploratory topic modelling: document-frequency filtered corpus
//! construction, collapsed Gibbs LDA, UMass coherence, and coherence-based
//! selection of the topic count.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;

/// Bag-of-words corpus after stopword and document-frequency filtering.
#[derive(Debug, Clone)]
pub struct Corpus {
    /// Sorted; word ids index into this list, so ties resolve alphabetically.
    pub vocabulary: Vec<String>,
    /// Per document: (word id, count) sorted by word id.
    pub docs: Vec<Vec<(u32, u32)>>,
    pub doc_ids: Vec<String>,
    /// Documents containing each word at least once.
    doc_frequencies: Vec<u32>,
}

impl Corpus {
    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.docs
            .iter()
            .flat_map(|d| d.iter().map(|&(_, c)| c as u64))
            .sum()
    }

    pub fn word_id(&self, word: &str) -> Option<u32> {
        self.vocabulary
            .binary_search_by(|w| w.as_str().cmp(word))
            .ok()
            .map(|i| i as u32)
    }

    pub fn doc_frequency(&self, word_id: u32) -> u32 {
        self.doc_frequencies[word_id as usize]
    }

    /// Documents containing both words.
    pub fn co_doc_frequency(&self, a: u32, b: u32) -> u32 {
        self.docs
            .iter()
            .filter(|doc| {
                doc.binary_search_by_key(&a, |&(w, _)| w).is_ok()
                    && doc.binary_search_by_key(&b, |&(w, _)| w).is_ok()
            })
            .count() as u32
    }
}

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// The committed English stopword list.
pub fn builtin_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io("cannot read stopwords", path, e))?;
    Ok(parse_stopwords(&text))
}

/// Build the corpus from per-filing token sequences. A word survives when
/// it is no stopword, occurs in at least `min_df` documents, and in fewer
/// than `max_df` (fraction) of them. Documents left empty are dropped.
pub fn build_corpus(
    docs: &[(String, Vec<String>)],
    stopwords: &HashSet<String>,
    max_df: f64,
    min_df: u32,
) -> Result<Corpus> {
    if !(max_df > 0.0 && max_df <= 1.0) {
        return Err(Error::config(format!("max_df must be in (0,1]: {max_df}")));
    }
    if min_df < 1 {
        return Err(Error::config("min_df must be at least 1"));
    }

    let num_docs = docs.len();
    let mut df: HashMap<&str, u32> = HashMap::new();
    for (_, tokens) in docs {
        let unique: HashSet<&str> = tokens.iter().map(String::as_str).collect();
        for word in unique {
            *df.entry(word).or_insert(0) += 1;
        }
    }

    let mut vocabulary: Vec<String> = df
        .iter()
        .filter(|(word, &count)| {
            count >= min_df
                && (count as f64) < max_df * num_docs as f64
                && !stopwords.contains(**word)
        })
        .map(|(word, _)| word.to_string())
        .collect();
    vocabulary.sort();

    let word_ids: HashMap<&str, u32> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i as u32))
        .collect();

    let mut kept_docs = Vec::new();
    let mut doc_ids = Vec::new();
    for (doc_id, tokens) in docs {
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for token in tokens {
            if let Some(&id) = word_ids.get(token.as_str()) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            continue;
        }
        let mut doc: Vec<(u32, u32)> = counts.into_iter().collect();
        doc.sort_by_key(|&(w, _)| w);
        kept_docs.push(doc);
        doc_ids.push(doc_id.clone());
    }

    if kept_docs.is_empty() {
        return Err(Error::data(format!(
            "corpus is empty after document-frequency filters (min_df={min_df}, max_df={max_df})"
        )));
    }

    let mut doc_frequencies = vec![0u32; vocabulary.len()];
    for doc in &kept_docs {
        for &(word, _) in doc {
            doc_frequencies[word as usize] += 1;
        }
    }

    Ok(Corpus {
        vocabulary,
        docs: kept_docs,
        doc_ids,
        doc_frequencies,
    })
}

/// Sampler parameters. An unset `alpha` derives the standard 50/K.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Doc-topic prior; None derives 50/K for whatever K is fitted.
    pub alpha: Option<f64>,
    /// Topic-word prior.
    pub beta: f64,
    pub iterations: u32,
    pub burn_in: u32,
    pub seed: u64,
}

impl LdaConfig {
    pub fn with_defaults(num_topics: usize, seed: u64) -> LdaConfig {
        LdaConfig {
            num_topics,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            burn_in: 200,
            seed,
        }
    }

    pub fn effective_alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.num_topics as f64)
    }

    /// Same settings for a different K. A derived alpha re-derives; an
    /// explicit alpha stays fixed across the scan.
    pub fn for_k(&self, num_topics: usize) -> LdaConfig {
        LdaConfig {
            num_topics,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_topics < 1 {
            return Err(Error::config("num_topics must be at least 1"));
        }
        if !(self.effective_alpha() > 0.0 && self.beta > 0.0) {
            return Err(Error::config("LDA priors must be positive"));
        }
        if self.iterations <= self.burn_in {
            return Err(Error::config(format!(
                "iterations ({}) must exceed burn_in ({})",
                self.iterations, self.burn_in
            )));
        }
        Ok(())
    }
}

/// Count matrices after the final Gibbs sweep.
#[derive(Debug, Clone)]
pub struct LdaModel {
    /// K × V.
    pub topic_word_counts: Vec<Vec<u32>>,
    /// D × K.
    pub doc_topic_counts: Vec<Vec<u32>>,
    pub config: LdaConfig,
    pub vocabulary: Vec<String>,
}

/// Collapsed Gibbs sampling: every token carries a topic assignment, and
/// each sweep resamples every token from the conditional with that token's
/// own count removed. Identical corpus, config, and seed give identical
/// count matrices.
pub fn fit_lda(corpus: &Corpus, config: &LdaConfig) -> Result<LdaModel> {
    fit_lda_observed(corpus, config, |_, _, _| {})
}

/// Like [`fit_lda`], invoking `observer(sweep, topic_word, doc_topic)`
/// after every sweep so invariants can be checked mid-run.
pub fn fit_lda_observed(
    corpus: &Corpus,
    config: &LdaConfig,
    mut observer: impl FnMut(u32, &[Vec<u32>], &[Vec<u32>]),
) -> Result<LdaModel> {
    config.validate()?;
    if corpus.num_docs() == 0 {
        return Err(Error::data("cannot fit a topic model on an empty corpus"));
    }

    let k = config.num_topics;
    let v = corpus.vocab_size();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // Token-level view of the bags; order within a document is by word id,
    // which is as arbitrary as any other fixed order for exchangeable bags.
    let docs: Vec<Vec<u32>> = corpus
        .docs
        .iter()
        .map(|doc| {
            let mut tokens = Vec::new();
            for &(word, count) in doc {
                tokens.extend(std::iter::repeat(word).take(count as usize));
            }
            tokens
        })
        .collect();

    let mut doc_topic = vec![vec![0u32; k]; docs.len()];
    let mut topic_word = vec![vec![0u32; v]; k];
    let mut topic_total = vec![0u32; k];
    let mut assignments: Vec<Vec<u16>> = docs
        .iter()
        .map(|tokens| tokens.iter().map(|_| rng.gen_range(0..k) as u16).collect())
        .collect();
    for (d, tokens) in docs.iter().enumerate() {
        for (i, &word) in tokens.iter().enumerate() {
            let topic = assignments[d][i] as usize;
            doc_topic[d][topic] += 1;
            topic_word[topic][word as usize] += 1;
            topic_total[topic] += 1;
        }
    }

    let alpha = config.effective_alpha();
    let v_beta = v as f64 * config.beta;
    let mut cumulative = vec![0.0f64; k];
    for sweep in 0..config.iterations {
        for (d, tokens) in docs.iter().enumerate() {
            for (i, &word) in tokens.iter().enumerate() {
                let w = word as usize;
                let old = assignments[d][i] as usize;
                doc_topic[d][old] -= 1;
                topic_word[old][w] -= 1;
                topic_total[old] -= 1;

                let mut cum = 0.0;
                for t in 0..k {
                    let weight = (doc_topic[d][t] as f64 + alpha)
                        * (topic_word[t][w] as f64 + config.beta)
                        / (topic_total[t] as f64 + v_beta);
                    cum += weight;
                    cumulative[t] = cum;
                }
                let u = rng.gen::<f64>() * cum;
                let new = cumulative.partition_point(|&c| c <= u).min(k - 1);

                assignments[d][i] = new as u16;
                doc_topic[d][new] += 1;
                topic_word[new][w] += 1;
                topic_total[new] += 1;
            }
        }
        observer(sweep, &topic_word, &doc_topic);
    }

    Ok(LdaModel {
        topic_word_counts: topic_word,
        doc_topic_counts: doc_topic,
        config: config.clone(),
        vocabulary: corpus.vocabulary.clone(),
    })
}

/// Per topic, the n highest-count words as (word, count), counts
/// descending, ties in vocabulary (alphabetical) order.
pub fn top_words(model: &LdaModel, n: usize) -> Vec<Vec<(String, u32)>> {
    assert!(n >= 1, "top_words needs n >= 1");
    model
        .topic_word_counts
        .iter()
        .map(|counts| {
            let mut order: Vec<u32> = (0..counts.len() as u32).collect();
            order.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]).then(a.cmp(&b)));
            order
                .into_iter()
                .take(n)
                .map(|w| (model.vocabulary[w as usize].clone(), counts[w as usize]))
                .collect()
        })
        .collect()
}

/// UMass coherence per topic over its top-10 words: for ranked words
/// w_i, w_j with i < j, sum log((codf(w_i, w_j) + 1) / df(w_i)). Higher is
/// better.
pub fn coherence(model: &LdaModel, corpus: &Corpus) -> Vec<f64> {
    top_words(model, 10)
        .iter()
        .map(|words| {
            let ids: Vec<u32> = words
                .iter()
                .map(|(w, _)| corpus.word_id(w).expect("model words come from the corpus"))
                .collect();
            let mut sum = 0.0;
            for i in 0..ids.len() {
                for j in (i + 1)..ids.len() {
                    let codf = corpus.co_doc_frequency(ids[i], ids[j]);
                    let df = corpus.doc_frequency(ids[i]);
                    sum += ((codf as f64 + 1.0) / df as f64).ln();
                }
            }
            sum
        })
        .collect()
}

/// Mean coherence of one fitted K.
#[derive(Debug, Clone)]
pub struct KScore {
    pub k: usize,
    pub mean_coherence: f64,
}

/// Fit one model per K (same seed) and pick the K with the highest mean
/// per-topic coherence; ties go to the smallest K. Fits run in parallel
/// when the `parallel` feature is on.
pub fn select_k(
    corpus: &Corpus,
    k_range: impl IntoIterator<Item = usize>,
    template: &LdaConfig,
) -> Result<(usize, Vec<KScore>)> {
    let ks: Vec<usize> = k_range.into_iter().collect();
    if ks.is_empty() {
        return Err(Error::config("empty K range"));
    }

    let scored: Vec<Result<KScore>> = exec::map_collect(ks, |k| {
        let model = fit_lda(corpus, &template.for_k(k))?;
        let per_topic = coherence(&model, corpus);
        let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
        Ok(KScore {
            k,
            mean_coherence: mean,
        })
    });
    let table: Vec<KScore> = scored.into_iter().collect::<Result<_>>()?;

    let best = table
        .iter()
        .min_by(|a, b| {
            b.mean_coherence
                .partial_cmp(&a.mean_coherence)
                .unwrap()
                .then(a.k.cmp(&b.k))
        })
        .expect("table is non-empty")
        .k;
    Ok((best, table))
}
