//! Filing text extraction: markup removal, Item 1A isolation, sentence and
//! token segmentation.
//!
//! All downstream analysis operates on the lowercased plain text produced
//! here. Cleaning runs to a fixpoint so that feeding the output back through
//! `extract_text` reproduces it byte for byte.

use std::collections::HashSet;
use std::ops::Range;

use once_cell::sync::Lazy;
use regex::Regex;

use crate::error::{Error, Result};
use crate::ingest::{FilingRef, RawFiling};

/// How the risk section of a filing was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionMethod {
    /// An `item 1a` header was found and the section between it and the next
    /// `item 1b` / `item 2` header was taken.
    Item1aHeaders,
    /// No usable header; topic analysis falls back to the whole document.
    WholeDocumentFallback,
}

impl ExtractionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExtractionMethod::Item1aHeaders => "item1a_headers",
            ExtractionMethod::WholeDocumentFallback => "whole_document_fallback",
        }
    }
}

/// Cleaned, lowercased filing text with the located risk-factor span.
#[derive(Debug, Clone)]
pub struct FilingText {
    pub ref_: FilingRef,
    pub full_text: String,
    /// Byte span of the trimmed Item 1A body within `full_text`.
    pub risk_span: Option<Range<usize>>,
    pub extraction_method: ExtractionMethod,
}

impl FilingText {
    /// The Item 1A body when found.
    pub fn risk_section(&self) -> Option<&str> {
        self.risk_span.clone().map(|r| &self.full_text[r])
    }

    /// Text used for topic analysis: the risk section, or the whole document
    /// when no Item 1A header exists.
    pub fn topic_text(&self) -> &str {
        self.risk_section().unwrap_or(&self.full_text)
    }
}

/// One sentence of a cleaned text together with its word tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub tokens: Vec<String>,
}

/// Clean a raw filing into lowercased plain text and locate Item 1A.
///
/// Markup tags are dropped (block-level tags become line breaks), character
/// entities are decoded, whitespace runs collapse to single spaces within
/// lines, and the result is lowercased.
pub fn extract_text(raw: &RawFiling) -> Result<FilingText> {
    let decoded = String::from_utf8_lossy(&raw.content);
    if looks_binary(&decoded) {
        return Err(Error::data(format!(
            "filing {} has binary or undecodable content",
            raw.ref_.accession_id
        )));
    }

    let mut text = clean_pass(&decoded);
    // Iterate to a fixpoint so re-running the extractor is the identity.
    for _ in 0..8 {
        let next = clean_pass(&text);
        if next == text {
            break;
        }
        text = next;
    }

    let (risk_span, extraction_method) = match extract_risk_section(&text) {
        Some(span) => (Some(span), ExtractionMethod::Item1aHeaders),
        None => (None, ExtractionMethod::WholeDocumentFallback),
    };

    Ok(FilingText {
        ref_: raw.ref_.clone(),
        full_text: text,
        risk_span,
        extraction_method,
    })
}

fn looks_binary(text: &str) -> bool {
    if text.is_empty() {
        return false;
    }
    let mut total = 0usize;
    let mut bad = 0usize;
    for c in text.chars() {
        total += 1;
        if c == '\u{FFFD}' || (c.is_control() && c != '\n' && c != '\r' && c != '\t') {
            bad += 1;
        }
    }
    bad * 10 > total
}

/// One markup-removal + normalization + lowercase pass.
fn clean_pass(input: &str) -> String {
    let stripped = strip_markup(input);
    let normalized = normalize_whitespace(&stripped);
    normalized.to_lowercase()
}

const BLOCK_TAGS: &[&str] = &[
    "p",
    "div",
    "br",
    "hr",
    "table",
    "tr",
    "li",
    "ul",
    "ol",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "blockquote",
    "pre",
    "section",
    "article",
    "header",
    "footer",
    "title",
];

const CELL_TAGS: &[&str] = &["td", "th", "span", "font"];

/// Drop tags and decode entities in a single scan.
fn strip_markup(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'<' => {
                if let Some(advance) = consume_tag(&input[i..], &mut out) {
                    i += advance;
                } else {
                    out.push('<');
                    i += 1;
                }
            }
            b'&' => {
                if let Some((decoded, advance)) = decode_entity(&input[i..]) {
                    out.push_str(&decoded);
                    i += advance;
                } else {
                    out.push('&');
                    i += 1;
                }
            }
            _ => {
                let c = input[i..].chars().next().unwrap();
                out.push(c);
                i += c.len_utf8();
            }
        }
    }
    out
}

/// Consume one tag starting at `rest` (which begins with '<'). Returns the
/// number of bytes consumed, or None when the text is not a tag.
fn consume_tag(rest: &str, out: &mut String) -> Option<usize> {
    let after = &rest[1..];
    let first = after.chars().next()?;
    // Comments and doctype-ish declarations.
    if first == '!' {
        if let Some(body) = after.strip_prefix("!--") {
            let end = body.find("-->")?;
            return Some(1 + 3 + end + 3);
        }
        let end = after.find('>')?;
        return Some(1 + end + 1);
    }
    if !(first.is_ascii_alphabetic() || first == '/' || first == '?') {
        return None;
    }
    let end = after.find('>')?;
    let inner = &after[..end];
    let name: String = inner
        .trim_start_matches('/')
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase();

    let mut consumed = 1 + end + 1;

    // Drop script/style bodies entirely.
    if (name == "script" || name == "style") && !inner.starts_with('/') {
        let closer = format!("</{name}");
        let tail = &rest[consumed..];
        if let Some(pos) = tail.to_ascii_lowercase().find(&closer) {
            let after_close = &tail[pos..];
            if let Some(gt) = after_close.find('>') {
                consumed += pos + gt + 1;
            } else {
                consumed = rest.len();
            }
        } else {
            consumed = rest.len();
        }
        out.push('\n');
        return Some(consumed);
    }

    if BLOCK_TAGS.contains(&name.as_str()) {
        out.push('\n');
    } else if CELL_TAGS.contains(&name.as_str()) {
        out.push(' ');
    }
    Some(consumed)
}

static NAMED_ENTITIES: Lazy<Vec<(&'static str, &'static str)>> = Lazy::new(|| {
    vec![
        ("amp", "&"),
        ("lt", "<"),
        ("gt", ">"),
        ("quot", "\""),
        ("apos", "'"),
        ("nbsp", " "),
        ("rsquo", "'"),
        ("lsquo", "'"),
        ("rdquo", "\""),
        ("ldquo", "\""),
        ("mdash", "\u{2014}"),
        ("ndash", "\u{2013}"),
        ("hellip", "..."),
        ("bull", "\u{2022}"),
        ("middot", "\u{00B7}"),
        ("sect", "\u{00A7}"),
        ("para", "\u{00B6}"),
        ("copy", "\u{00A9}"),
        ("reg", "\u{00AE}"),
        ("trade", "\u{2122}"),
        ("deg", "\u{00B0}"),
        ("plusmn", "\u{00B1}"),
        ("times", "\u{00D7}"),
        ("divide", "\u{00F7}"),
        ("cent", "\u{00A2}"),
        ("pound", "\u{00A3}"),
        ("euro", "\u{20AC}"),
        ("yen", "\u{00A5}"),
    ]
});

/// Decode one entity starting at `rest` (which begins with '&'). Returns the
/// replacement text and the number of bytes consumed.
fn decode_entity(rest: &str) -> Option<(String, usize)> {
    let semi = rest[1..].find(';')?;
    if semi == 0 || semi > 10 {
        return None;
    }
    let body = &rest[1..1 + semi];
    let consumed = semi + 2;
    if let Some(num) = body.strip_prefix('#') {
        let code = if let Some(hex) = num.strip_prefix('x').or_else(|| num.strip_prefix('X')) {
            u32::from_str_radix(hex, 16).ok()?
        } else {
            num.parse::<u32>().ok()?
        };
        let c = char::from_u32(code)?;
        // Normalize the non-breaking space the same way as &nbsp;.
        let text = if c == '\u{00A0}' {
            " ".to_string()
        } else {
            c.to_string()
        };
        return Some((text, consumed));
    }
    let lower = body.to_ascii_lowercase();
    NAMED_ENTITIES
        .iter()
        .find(|(name, _)| *name == lower)
        .map(|(_, repl)| (repl.to_string(), consumed))
}

/// Collapse whitespace runs to single spaces within lines, trim lines, and
/// drop empty lines.
fn normalize_whitespace(input: &str) -> String {
    let mut lines = Vec::new();
    for line in input.lines() {
        let collapsed = line.split_whitespace().collect::<Vec<_>>().join(" ");
        if !collapsed.is_empty() {
            lines.push(collapsed);
        }
    }
    lines.join("\n")
}

static ITEM_1A_START: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"item\s+1a\b[\s.:;,\-]*(risk\s+factors)?").unwrap());
static ITEM_1A_END: Lazy<Regex> = Lazy::new(|| Regex::new(r"item\s+(1b|2)\b").unwrap());

/// Locate the Item 1A body inside lowercased text.
///
/// The span starts after the LAST `item 1a` header (table-of-contents
/// references precede the real section) and ends before the next `item 1b`
/// or `item 2` header, or at end of text. The returned span is trimmed.
pub fn extract_risk_section(full_text: &str) -> Option<Range<usize>> {
    let start_match = ITEM_1A_START.find_iter(full_text).last()?;
    let body_start = start_match.end();
    let body_end = ITEM_1A_END
        .find(&full_text[body_start..])
        .map(|m| body_start + m.start())
        .unwrap_or(full_text.len());

    let body = &full_text[body_start..body_end];
    let trimmed = body.trim();
    if trimmed.is_empty() {
        return Some(body_start..body_start);
    }
    let offset = body.find(trimmed).unwrap_or(0);
    Some(body_start + offset..body_start + offset + trimmed.len())
}

static ABBREVIATIONS: Lazy<HashSet<&'static str>> = Lazy::new(|| {
    [
        "u.s.", "u.s.a.", "u.k.", "no.", "nos.", "inc.", "corp.", "co.", "ltd.", "llc.", "l.p.",
        "e.g.", "i.e.", "etc.", "vs.", "v.", "mr.", "ms.", "mrs.", "dr.", "jr.", "sr.", "st.",
        "approx.", "dept.", "fig.", "sec.",
    ]
    .into_iter()
    .collect()
});

/// Split lowercased plain text into sentences.
///
/// A sentence ends at `.`, `!` or `?` followed by whitespace (or end of
/// text), unless the terminating word is a known abbreviation. Every
/// non-whitespace character of the input lands in exactly one sentence.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let mut sentences = Vec::new();
    let bytes = text.as_bytes();
    let mut start = 0usize;

    let push = |slice: &str, sentences: &mut Vec<Sentence>| {
        let trimmed = slice.trim();
        if trimmed.is_empty() {
            return;
        }
        let index = sentences.len();
        sentences.push(Sentence {
            index,
            text: trimmed.to_string(),
            tokens: tokenize(trimmed),
        });
    };

    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'.' || b == b'!' || b == b'?' {
            let at_end = i + 1 == bytes.len();
            let next_ws = !at_end && bytes[i + 1].is_ascii_whitespace();
            if (at_end || next_ws) && !(b == b'.' && is_abbreviation(text, i)) {
                push(&text[start..=i], &mut sentences);
                start = i + 1;
            }
        }
        i += 1;
    }
    if start < bytes.len() {
        push(&text[start..], &mut sentences);
    }
    sentences
}

/// Does the word ending with the `.` at byte `dot` belong to the guard list?
fn is_abbreviation(text: &str, dot: usize) -> bool {
    let head = &text[..=dot];
    let word_start = head
        .rfind(|c: char| c.is_whitespace())
        .map(|p| p + 1)
        .unwrap_or(0);
    let chunk = head[word_start..].trim_start_matches(|c: char| !c.is_alphanumeric());
    ABBREVIATIONS.contains(chunk)
}

/// Split lowercased text into word tokens.
///
/// Any character that is not a letter, digit, or hyphen separates tokens, so
/// "covid-19" survives as a single token.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '-'))
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

static SIC_HEADER: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)standard industrial classification:[^\[\r\n]*\[(\d{1,4})\]").unwrap()
});
static SIC_TAG: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)<sic>\s*(\d{1,4})").unwrap());

/// Pull the 4-digit SIC code out of a raw EDGAR submission header, if any.
///
/// Works on the undecoded document; the code appears either as
/// `STANDARD INDUSTRIAL CLASSIFICATION: ... [2834]` or as an SGML `<SIC>`
/// tag. Short codes are zero-padded to 4 digits.
pub fn extract_sic_code(raw_content: &[u8]) -> Option<String> {
    let text = String::from_utf8_lossy(raw_content);
    let digits = SIC_HEADER
        .captures(&text)
        .or_else(|| SIC_TAG.captures(&text))
        .map(|c| c[1].to_string())?;
    Some(format!("{digits:0>4}"))
}
