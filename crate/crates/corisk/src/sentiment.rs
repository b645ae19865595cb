//! Negativity scoring of crisis sentences: the share of lexicon-negative
//! words among all their tokens.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::FilingRef;
use crate::parser::Sentence;

/// A set of negative words loaded from a one-word-per-line file.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub negative_words: HashSet<String>,
    pub name: String,
    pub source_path: String,
}

impl Lexicon {
    pub fn contains(&self, token: &str) -> bool {
        self.negative_words.contains(token)
    }
}

/// Load a lexicon file: one word per line, `#` comments, blank lines
/// ignored, entries lowercased and deduplicated.
pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io("cannot read lexicon", path, e))?;
    let mut negative_words = HashSet::new();
    for line in text.lines() {
        let entry = line.trim();
        if entry.is_empty() || entry.starts_with('#') {
            continue;
        }
        let word = entry.to_lowercase();
        if word.split_whitespace().count() != 1 {
            return Err(Error::data(format!(
                "lexicon {} contains a multi-word entry: {entry:?}",
                path.display()
            )));
        }
        negative_words.insert(word);
    }
    if negative_words.is_empty() {
        return Err(Error::data(format!(
            "lexicon {} is empty after parsing",
            path.display()
        )));
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("lexicon")
        .to_string();
    Ok(Lexicon {
        negative_words,
        name,
        source_path: path.display().to_string(),
    })
}

/// Negativity of one filing's crisis sentences.
#[derive(Debug, Clone)]
pub struct NegativityScore {
    pub ref_: FilingRef,
    /// negative / total token share; None when there are no tokens.
    pub score: Option<f64>,
    pub negative_token_count: usize,
    pub total_token_count: usize,
    pub crisis_sentence_count: usize,
}

/// Share of lexicon-negative tokens over all tokens of the crisis
/// sentences. Undefined (None) when the sentences carry no tokens.
pub fn negativity(ref_: &FilingRef, crisis_sents: &[&Sentence], lex: &Lexicon) -> NegativityScore {
    let mut negative = 0usize;
    let mut total = 0usize;
    for sentence in crisis_sents {
        total += sentence.tokens.len();
        negative += sentence.tokens.iter().filter(|t| lex.contains(t)).count();
    }
    NegativityScore {
        ref_: ref_.clone(),
        score: (total > 0).then(|| negative as f64 / total as f64),
        negative_token_count: negative,
        total_token_count: total,
        crisis_sentence_count: crisis_sents.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::split_sentences;
    use chrono::NaiveDate;
    use std::io::Write;

    fn test_ref() -> FilingRef {
        FilingRef {
            cik: "1".into(),
            company_name: "Test".into(),
            sic_code: "5200".into(),
            form_type: "10-K".into(),
            filing_date: NaiveDate::from_ymd_opt(2020, 2, 10).unwrap(),
            accession_id: "0001-20-000002".into(),
            document_url: "edgar/data/1/0001-20-000002.txt".into(),
        }
    }

    fn lexicon(words: &[&str]) -> Lexicon {
        Lexicon {
            negative_words: words.iter().map(|w| w.to_string()).collect(),
            name: "test".into(),
            source_path: "test".into(),
        }
    }

    fn write_lexicon(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    #[test]
    fn loads_dedups_and_lowercases() {
        let file = write_lexicon("# negative words\nLoss\ndecline\nloss\n\n");
        let lex = load_lexicon(file.path()).unwrap();
        assert_eq!(lex.negative_words.len(), 2);
        assert!(lex.contains("loss"));
        assert!(lex.contains("decline"));
    }

    #[test]
    fn comment_only_file_is_an_error() {
        let file = write_lexicon("# nothing\n# here\n");
        assert!(load_lexicon(file.path()).is_err());
    }

    #[test]
    fn half_negative_sentence_scores_half() {
        let sents = split_sentences("demand loss.");
        let refs: Vec<&Sentence> = sents.iter().collect();
        let score = negativity(&test_ref(), &refs, &lexicon(&["loss"]));
        assert_eq!(score.score, Some(0.5));
        assert_eq!(score.negative_token_count, 1);
        assert_eq!(score.total_token_count, 2);
        assert_eq!(score.crisis_sentence_count, 1);
    }

    #[test]
    fn empty_input_is_undefined() {
        let score = negativity(&test_ref(), &[], &lexicon(&["loss"]));
        assert_eq!(score.score, None);
        assert_eq!(score.crisis_sentence_count, 0);
    }

    #[test]
    fn score_ignores_sentence_order() {
        let lex = lexicon(&["loss", "adverse"]);
        let sents = split_sentences("adverse shock. demand loss grew.");
        let forward: Vec<&Sentence> = sents.iter().collect();
        let backward: Vec<&Sentence> = sents.iter().rev().collect();
        assert_eq!(
            negativity(&test_ref(), &forward, &lex).score,
            negativity(&test_ref(), &backward, &lex).score
        );
    }

    #[test]
    fn doubling_the_corpus_preserves_the_score() {
        let lex = lexicon(&["loss"]);
        let sents = split_sentences("covid loss hit. covid spread widely.");
        let single: Vec<&Sentence> = sents.iter().collect();
        let doubled: Vec<&Sentence> = sents.iter().chain(sents.iter()).collect();
        let a = negativity(&test_ref(), &single, &lex).score.unwrap();
        let b = negativity(&test_ref(), &doubled, &lex).score.unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn unused_lexicon_words_do_not_change_the_score() {
        let sents = split_sentences("demand loss.");
        let refs: Vec<&Sentence> = sents.iter().collect();
        let a = negativity(&test_ref(), &refs, &lexicon(&["loss"])).score;
        let b = negativity(&test_ref(), &refs, &lexicon(&["loss", "absentword"])).score;
        assert_eq!(a, b);
    }
}
