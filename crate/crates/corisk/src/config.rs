//! Run configuration: a TOML file mirrored into [`RunConfig`], CLI
//! overrides, validation, and a stable hash for output provenance.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::timeseries::Weighting;
use crate::topics::LdaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fetch from the live archive over HTTP.
    Live,
    /// Read from a local directory mirroring the archive layout.
    Fixture,
}

impl Mode {
    pub fn parse(text: &str) -> Result<Mode> {
        match text {
            "live" => Ok(Mode::Live),
            "fixture" => Ok(Mode::Fixture),
            other => Err(Error::config(format!(
                "unknown mode {other:?} (expected live or fixture)"
            ))),
        }
    }
}

fn default_since() -> String {
    // The first crisis keyword appeared in a filing on this date.
    "2020-01-30".to_string()
}

fn default_form_type() -> String {
    "10-K".to_string()
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgarSection {
    pub base_url: String,
    pub rate_per_sec: u32,
}

impl Default for EdgarSection {
    fn default() -> Self {
        EdgarSection {
            base_url: "https://www.sec.gov/Archives".to_string(),
            rate_per_sec: 8,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixtureSection {
    pub root: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CacheSection {
    pub dir: PathBuf,
}

impl Default for CacheSection {
    fn default() -> Self {
        CacheSection {
            dir: PathBuf::from(".corisk-cache"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    /// Negative-word list; required by analyze (no built-in default, the
    /// reference financial lexicon is not redistributable).
    pub lexicon: Option<PathBuf>,
    /// Keyword spec file; the committed default applies when unset.
    pub keywords: Option<PathBuf>,
    /// Stopword list; the committed default applies when unset.
    pub stopwords: Option<PathBuf>,
    /// Price series CSV; required by correlate.
    pub prices: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        PathsSection {
            lexicon: None,
            keywords: None,
            stopwords: None,
            prices: None,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexSection {
    /// Mean mentions per report saturating the index's m-component.
    pub mention_cap: f64,
}

impl Default for IndexSection {
    fn default() -> Self {
        IndexSection { mention_cap: 25.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelateSection {
    /// Centered calendar-day window applied to the negativity series.
    pub smoothing_window: i64,
    pub max_lag: i64,
    /// "report_mean" or "token_weighted".
    pub weighting: String,
}

impl Default for CorrelateSection {
    fn default() -> Self {
        CorrelateSection {
            smoothing_window: 7,
            max_lag: 10,
            weighting: "report_mean".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LdaSection {
    pub k_range: [usize; 2],
    pub iterations: u32,
    pub burn_in: u32,
    /// Unset derives the standard 50/K per fitted K.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub min_df: u32,
    pub max_df: f64,
}

impl Default for LdaSection {
    fn default() -> Self {
        LdaSection {
            k_range: [2, 8],
            iterations: 1000,
            burn_in: 200,
            alpha: None,
            beta: 0.01,
            min_df: 2,
            max_df: 0.8,
        }
    }
}

/// The whole resolved run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Mode,
    /// ISO dates as strings, validated by [`RunConfig::date_range`].
    pub since: String,
    pub until: Option<String>,
    pub form_type: String,
    pub include_amended: bool,
    pub seed: u64,
    pub edgar: EdgarSection,
    pub fixture: FixtureSection,
    pub cache: CacheSection,
    pub paths: PathsSection,
    pub index: IndexSection,
    pub correlate: CorrelateSection,
    pub lda: LdaSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Fixture,
            since: default_since(),
            until: None,
            form_type: default_form_type(),
            include_amended: false,
            seed: default_seed(),
            edgar: EdgarSection::default(),
            fixture: FixtureSection::default(),
            cache: CacheSection::default(),
            paths: PathsSection::default(),
            index: IndexSection::default(),
            correlate: CorrelateSection::default(),
            lda: LdaSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::config(format!("config {}: {e}", path.display())))
    }

    /// Parsed (since, until) range; `until` is required.
    pub fn date_range(&self) -> Result<(NaiveDate, NaiveDate)> {
        let parse = |label: &str, text: &str| {
            NaiveDate::parse_from_str(text, "%Y-%m-%d")
                .map_err(|_| Error::config(format!("{label} is not an ISO date: {text:?}")))
        };
        let since = parse("since", &self.since)?;
        let until_text = self
            .until
            .as_deref()
            .ok_or_else(|| Error::config("until date is required (config key or --until)"))?;
        let until = parse("until", until_text)?;
        if since > until {
            return Err(Error::config(format!(
                "empty date range: since {since} is after until {until}"
            )));
        }
        Ok((since, until))
    }

    pub fn weighting(&self) -> Result<Weighting> {
        Weighting::parse(&self.correlate.weighting)
    }

    /// LDA template for the smallest K of the scan; `for_k` rescales.
    pub fn lda_template(&self) -> LdaConfig {
        LdaConfig {
            num_topics: self.lda.k_range[0],
            alpha: self.lda.alpha,
            beta: self.lda.beta,
            iterations: self.lda.iterations,
            burn_in: self.lda.burn_in,
            seed: self.seed,
        }
    }

    /// Check everything checkable without touching the network.
    pub fn validate(&self) -> Result<()> {
        self.date_range()?;
        if self.form_type.is_empty() {
            return Err(Error::config("form_type must be non-empty"));
        }
        if self.mode == Mode::Fixture {
            let root = self.fixture.root.as_ref().ok_or_else(|| {
                Error::config("fixture mode needs fixture.root pointing at a corpus directory")
            })?;
            if !root.is_dir() {
                return Err(Error::config(format!(
                    "fixture.root is not a directory: {}",
                    root.display()
                )));
            }
        }
        if self.edgar.rate_per_sec < 1 {
            return Err(Error::config("edgar.rate_per_sec must be at least 1"));
        }
        for (label, path) in [
            ("paths.lexicon", &self.paths.lexicon),
            ("paths.keywords", &self.paths.keywords),
            ("paths.stopwords", &self.paths.stopwords),
            ("paths.prices", &self.paths.prices),
        ] {
            if let Some(path) = path {
                if !path.is_file() {
                    return Err(Error::config(format!(
                        "{label} does not exist: {}",
                        path.display()
                    )));
                }
            }
        }
        if !(self.index.mention_cap > 0.0) {
            return Err(Error::config("index.mention_cap must be positive"));
        }
        if self.correlate.smoothing_window < 1 {
            return Err(Error::config(
                "correlate.smoothing_window must be at least 1",
            ));
        }
        if self.correlate.max_lag < 0 {
            return Err(Error::config("correlate.max_lag must be non-negative"));
        }
        self.weighting()?;
        let [lo, hi] = self.lda.k_range;
        if lo < 1 || lo > hi {
            return Err(Error::config(format!(
                "lda.k_range must be an increasing pair of positive counts: [{lo}, {hi}]"
            )));
        }
        if self.lda.iterations <= self.lda.burn_in {
            return Err(Error::config("lda.iterations must exceed lda.burn_in"));
        }
        if !(self.lda.max_df > 0.0 && self.lda.max_df <= 1.0) {
            return Err(Error::config("lda.max_df must be in (0, 1]"));
        }
        if self.lda.min_df < 1 {
            return Err(Error::config("lda.min_df must be at least 1"));
        }
        Ok(())
    }

    /// Short, stable digest of the resolved configuration, stamped into
    /// every output file's metadata line.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..12].to_string()
    }
}
