//! Library for turning SEC 10-K filings into industry-level weekly
//! risk-awareness measures for a configurable crisis-keyword set.
//!
//! The pipeline stages map onto the modules below:
//! [`ingest`] acquires filings and price data, [`parser`] cleans text and
//! isolates the risk-factor section, [`keywords`] counts crisis mentions and
//! topic hits, [`sentiment`] scores crisis-sentence negativity, [`index`]
//! aggregates per-industry weekly statistics into the compound index,
//! [`timeseries`] correlates negativity against the market series, and
//! [`topics`] runs the exploratory LDA. [`pipeline`] joins the per-filing
//! measurements, [`commands`] orchestrates whole stages, and [`config`]
//! and [`output`] handle run settings and the CSV files between stages.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod index;
pub mod ingest;
pub mod keywords;
pub mod output;
pub mod parser;
pub mod pipeline;
pub mod sentiment;
pub mod timeseries;
pub mod topics;
