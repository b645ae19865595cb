//! Parallel versus serial filing analysis on a synthetic batch.
//!
//! Run with `cargo bench --bench pipeline`. The batch is sized so the
//! per-filing parse dominates scheduling overhead.

use chrono::{NaiveDate, Utc};
use corisk::ingest::{FilingRef, RawFiling};
use corisk::keywords::KeywordSpec;
use corisk::pipeline::{analyze_batch, analyze_batch_serial};
use corisk::sentiment::Lexicon;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One synthetic 10-K: SGML header plus an HTML body with an Item 1A
/// section, a few hundred sentences, and scattered crisis mentions.
fn synthetic_filing(index: usize, rng: &mut ChaCha8Rng) -> RawFiling {
    let vocab = [
        "operations",
        "revenue",
        "customers",
        "segment",
        "facility",
        "supply",
        "contracts",
        "quarterly",
        "capital",
        "regulatory",
        "employees",
        "market",
        "products",
        "services",
        "competitors",
        "seasonal",
        "inventory",
        "margins",
    ];
    let negatives = ["decline", "loss", "disruption", "shortage", "uncertainty"];

    let mut body = String::new();
    body.push_str("<p>Item 1. Business.</p>\n");
    for _ in 0..150 {
        body.push_str("<p>The company manages ");
        for _ in 0..12 {
            body.push_str(vocab[rng.gen_range(0..vocab.len())]);
            body.push(' ');
        }
        body.push_str("across regions.</p>\n");
    }
    body.push_str("<p>Item 1A. Risk Factors.</p>\n");
    for s in 0..200 {
        if s % 5 == 0 {
            body.push_str("<p>The covid-19 outbreak may cause a ");
            body.push_str(negatives[rng.gen_range(0..negatives.len())]);
            body.push_str(" in demand.</p>\n");
        } else {
            body.push_str("<p>Results depend on ");
            for _ in 0..10 {
                body.push_str(vocab[rng.gen_range(0..vocab.len())]);
                body.push(' ');
            }
            body.push_str("and other factors.</p>\n");
        }
    }
    body.push_str("<p>Item 1B. Unresolved Staff Comments.</p>\n<p>None.</p>\n");

    let accession = format!("0000000099-20-{index:06}");
    let content = format!(
        "ACCESSION NUMBER: {accession}\nCONFORMED SUBMISSION TYPE: 10-K\n\
         STANDARD INDUSTRIAL CLASSIFICATION: WIDGETS [3559]\n\
         <html><body>\n{body}</body></html>\n"
    );
    RawFiling {
        ref_: FilingRef {
            cik: format!("{:010}", 99),
            company_name: format!("Bench Co {index}"),
            sic_code: "3559".into(),
            form_type: "10-K".into(),
            filing_date: NaiveDate::from_ymd_opt(2020, 2, 14).unwrap(),
            accession_id: accession.clone(),
            document_url: format!("edgar/data/99/{accession}.txt"),
        },
        content: content.into_bytes(),
        fetched_at: Utc::now(),
        from_cache: true,
    }
}

fn bench_batch_analysis(c: &mut Criterion) {
    let spec = KeywordSpec::builtin_default();
    let lexicon = Lexicon {
        negative_words: ["decline", "loss", "disruption", "shortage", "uncertainty"]
            .into_iter()
            .map(str::to_string)
            .collect(),
        name: "bench".into(),
        source_path: "bench".into(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let filings: Vec<RawFiling> = (0..64).map(|i| synthetic_filing(i, &mut rng)).collect();

    let mut group = c.benchmark_group("analyze_batch");
    group.throughput(Throughput::Elements(filings.len() as u64));
    group.sample_size(10);
    group.bench_with_input(
        BenchmarkId::new("parallel", filings.len()),
        &filings,
        |b, raws| b.iter(|| analyze_batch(raws, &spec, &lexicon)),
    );
    group.bench_with_input(
        BenchmarkId::new("serial", filings.len()),
        &filings,
        |b, raws| b.iter(|| analyze_batch_serial(raws, &spec, &lexicon)),
    );
    group.finish();
}

criterion_group!(benches, bench_batch_analysis);
criterion_main!(benches);
