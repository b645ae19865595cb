//! Crisis-keyword mention counting and topic phrase search.
//!
//! Crisis tokens match by substring containment inside word tokens: a word
//! containing several crisis tokens still counts once, attributed to the
//! first matching token in spec order. Topic phrases are exact unigram or
//! adjacent-bigram matches over a sentence's tokens, at most one hit per
//! topic per sentence.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::FilingRef;
use crate::parser::{tokenize, FilingText, Sentence};

/// A one- or two-token topic phrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phrase {
    Unigram(String),
    Bigram(String, String),
}

impl Phrase {
    fn parse(text: &str) -> Result<Phrase> {
        let words: Vec<&str> = text.split_whitespace().collect();
        match words.as_slice() {
            [w] => Ok(Phrase::Unigram(w.to_lowercase())),
            [a, b] => Ok(Phrase::Bigram(a.to_lowercase(), b.to_lowercase())),
            _ => Err(Error::config(format!(
                "topic phrase must be 1 or 2 tokens: {text:?}"
            ))),
        }
    }

    /// True when the phrase occurs in the token sequence.
    fn matches(&self, tokens: &[String]) -> bool {
        match self {
            Phrase::Unigram(w) => tokens.iter().any(|t| t == w),
            Phrase::Bigram(a, b) => tokens.windows(2).any(|pair| &pair[0] == a && &pair[1] == b),
        }
    }
}

/// One named topic with its phrase list, in file order.
#[derive(Debug, Clone)]
pub struct Topic {
    pub name: String,
    pub phrases: Vec<Phrase>,
}

/// Crisis tokens plus ordered topic lists.
#[derive(Debug, Clone)]
pub struct KeywordSpec {
    /// Ordered and deduplicated; order decides mention attribution.
    pub crisis_tokens: Vec<String>,
    pub topics: Vec<Topic>,
}

const DEFAULT_SPEC: &str = include_str!("../data/keywords_default.txt");

impl KeywordSpec {
    /// The committed default spec (COVID-19 crisis tokens, five topics).
    pub fn builtin_default() -> KeywordSpec {
        parse_keyword_spec(DEFAULT_SPEC).expect("committed default keyword spec is valid")
    }

    pub fn topic_names(&self) -> Vec<String> {
        self.topics.iter().map(|t| t.name.clone()).collect()
    }
}

/// Parse a keyword spec file: a `[crisis]` section listing tokens and one
/// `[topic.<Name>]` section per topic, one entry per line, `#` comments.
/// Entries are lowercased; duplicates keep their first occurrence.
pub fn parse_keyword_spec(text: &str) -> Result<KeywordSpec> {
    enum Section {
        None,
        Crisis,
        Topic(usize),
    }

    let mut crisis_tokens: Vec<String> = Vec::new();
    let mut topics: Vec<Topic> = Vec::new();
    let mut section = Section::None;

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if header.eq_ignore_ascii_case("crisis") {
                section = Section::Crisis;
            } else if let Some(name) = header.strip_prefix("topic.") {
                if name.is_empty() {
                    return Err(Error::config(format!(
                        "keyword spec line {}: empty topic name",
                        lineno + 1
                    )));
                }
                if topics.iter().any(|t| t.name == name) {
                    return Err(Error::config(format!(
                        "keyword spec line {}: duplicate topic {name:?}",
                        lineno + 1
                    )));
                }
                topics.push(Topic {
                    name: name.to_string(),
                    phrases: Vec::new(),
                });
                section = Section::Topic(topics.len() - 1);
            } else {
                return Err(Error::config(format!(
                    "keyword spec line {}: unknown section {header:?}",
                    lineno + 1
                )));
            }
            continue;
        }
        match section {
            Section::None => {
                return Err(Error::config(format!(
                    "keyword spec line {}: entry before any section header",
                    lineno + 1
                )));
            }
            Section::Crisis => {
                let token = line.to_lowercase();
                if token.split_whitespace().count() != 1 {
                    return Err(Error::config(format!(
                        "keyword spec line {}: crisis token must be one word: {line:?}",
                        lineno + 1
                    )));
                }
                if !crisis_tokens.contains(&token) {
                    crisis_tokens.push(token);
                }
            }
            Section::Topic(i) => {
                let phrase = Phrase::parse(line)?;
                if !topics[i].phrases.contains(&phrase) {
                    topics[i].phrases.push(phrase);
                }
            }
        }
    }

    if crisis_tokens.is_empty() {
        return Err(Error::config("keyword spec has no crisis tokens"));
    }
    Ok(KeywordSpec {
        crisis_tokens,
        topics,
    })
}

pub fn load_keyword_spec(path: &Path) -> Result<KeywordSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io("cannot read keyword spec", path, e))?;
    parse_keyword_spec(&text)
}

/// Per-filing crisis-keyword counts.
#[derive(Debug, Clone)]
pub struct MentionStats {
    pub ref_: FilingRef,
    pub mention_count: usize,
    pub mentions_by_token: BTreeMap<String, usize>,
    pub mentions_flag: bool,
}

/// Count words containing a crisis token, once per word.
pub fn count_mentions(doc: &FilingText, spec: &KeywordSpec) -> MentionStats {
    let mut mentions_by_token: BTreeMap<String, usize> = BTreeMap::new();
    let mut mention_count = 0usize;
    for word in tokenize(&doc.full_text) {
        if let Some(token) = spec
            .crisis_tokens
            .iter()
            .find(|t| word.contains(t.as_str()))
        {
            mention_count += 1;
            *mentions_by_token.entry(token.clone()).or_insert(0) += 1;
        }
    }
    MentionStats {
        ref_: doc.ref_.clone(),
        mention_count,
        mentions_by_token,
        mentions_flag: mention_count > 0,
    }
}

/// Keep the sentences whose text contains a crisis-token substring.
pub fn crisis_sentences<'a>(sentences: &'a [Sentence], spec: &KeywordSpec) -> Vec<&'a Sentence> {
    sentences
        .iter()
        .filter(|s| {
            spec.crisis_tokens
                .iter()
                .any(|t| s.text.contains(t.as_str()))
        })
        .collect()
}

/// Per-filing topic hit counts over crisis sentences.
#[derive(Debug, Clone)]
pub struct TopicHits {
    pub ref_: FilingRef,
    pub crisis_sentence_count: usize,
    /// (topic name, sentences with ≥1 phrase of that topic), in spec order.
    pub hits: Vec<(String, usize)>,
}

impl TopicHits {
    pub fn count_for(&self, topic: &str) -> usize {
        self.hits
            .iter()
            .find(|(name, _)| name == topic)
            .map(|(_, n)| *n)
            .unwrap_or(0)
    }
}

/// Count, per topic, the crisis sentences containing at least one of its
/// phrases. A sentence can score for several topics but once per topic.
pub fn topic_hits(ref_: &FilingRef, crisis_sents: &[&Sentence], spec: &KeywordSpec) -> TopicHits {
    let hits = spec
        .topics
        .iter()
        .map(|topic| {
            let n = crisis_sents
                .iter()
                .filter(|s| topic.phrases.iter().any(|p| p.matches(&s.tokens)))
                .count();
            (topic.name.clone(), n)
        })
        .collect();
    TopicHits {
        ref_: ref_.clone(),
        crisis_sentence_count: crisis_sents.len(),
        hits,
    }
}
