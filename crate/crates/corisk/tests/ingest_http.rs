//! Client, retry, and cache behavior against a scripted local HTTP server.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread::JoinHandle;
use std::time::Duration;

use chrono::NaiveDate;
use corisk::error::Error;
use corisk::ingest::{Cache, EdgarClient, FetchSource, FilingRef, Ingestor};
use tempfile::TempDir;

/// Serves the scripted (status, body) responses in order, one connection
/// each, recording the request path. Extra connections get 500s so a test
/// bug fails loudly instead of hanging.
struct ScriptedServer {
    base_url: String,
    paths: mpsc::Receiver<String>,
    handle: Option<JoinHandle<()>>,
}

impl ScriptedServer {
    fn start(script: Vec<(u16, &'static str)>) -> ScriptedServer {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base_url = format!("http://{}", listener.local_addr().unwrap());
        let (tx, rx) = mpsc::channel();

        let handle = std::thread::spawn(move || {
            for (status, body) in script {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream);

                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                let path = request_line
                    .split_whitespace()
                    .nth(1)
                    .unwrap_or("")
                    .to_string();
                let mut line = String::new();
                while reader.read_line(&mut line).unwrap() > 0 && line != "\r\n" {
                    line.clear();
                }
                tx.send(path).unwrap();

                let reason = match status {
                    200 => "OK",
                    404 => "Not Found",
                    429 => "Too Many Requests",
                    500 => "Internal Server Error",
                    503 => "Service Unavailable",
                    _ => "Unknown",
                };
                let response = format!(
                    "HTTP/1.1 {status} {reason}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len(),
                );
                reader.get_mut().write_all(response.as_bytes()).unwrap();
            }
        });

        ScriptedServer {
            base_url,
            paths: rx,
            handle: Some(handle),
        }
    }

    fn requested_paths(mut self) -> Vec<String> {
        self.handle.take().unwrap().join().unwrap();
        self.paths.try_iter().collect()
    }
}

fn fast_client(base_url: &str, max_attempts: u32) -> EdgarClient {
    EdgarClient::with_backoff(base_url, 100, max_attempts, Duration::from_millis(2)).unwrap()
}

fn filing_ref(accession: &str) -> FilingRef {
    FilingRef {
        cik: "0000000042".into(),
        company_name: "Wire Test Co".into(),
        sic_code: "5331".into(),
        form_type: "10-K".into(),
        filing_date: NaiveDate::from_ymd_opt(2020, 2, 14).unwrap(),
        accession_id: accession.into(),
        document_url: format!("edgar/data/42/{accession}.txt"),
    }
}

#[test]
fn get_returns_the_body_for_the_requested_path() {
    let server = ScriptedServer::start(vec![(200, "master index body")]);
    let client = fast_client(&server.base_url, 1);

    let body = client.get("edgar/full-index/2020/QTR1/master.idx").unwrap();
    assert_eq!(body, b"master index body");
    assert_eq!(
        server.requested_paths(),
        vec!["/edgar/full-index/2020/QTR1/master.idx".to_string()]
    );
}

#[test]
fn throttled_responses_are_retried_until_success() {
    let server = ScriptedServer::start(vec![(429, ""), (503, ""), (200, "eventually")]);
    let client = fast_client(&server.base_url, 5);

    let body = client.get("edgar/data/42/doc.txt").unwrap();
    assert_eq!(body, b"eventually");
    assert_eq!(server.requested_paths().len(), 3);
}

#[test]
fn retries_stop_at_the_attempt_budget() {
    let server = ScriptedServer::start(vec![(429, ""), (429, "")]);
    let client = fast_client(&server.base_url, 2);

    let err = client.get("edgar/data/42/doc.txt").unwrap_err();
    match err {
        Error::HttpStatus { status, .. } => assert_eq!(status, 429),
        other => panic!("expected HttpStatus, got {other:?}"),
    }
    assert_eq!(server.requested_paths().len(), 2);
}

#[test]
fn terminal_statuses_fail_without_retry_and_map_to_network_exit() {
    let server = ScriptedServer::start(vec![(404, "nope")]);
    let client = fast_client(&server.base_url, 5);

    let err = client.get("edgar/data/42/missing.txt").unwrap_err();
    assert_eq!(err.exit_code(), 3);
    match err {
        Error::HttpStatus { status, url } => {
            assert_eq!(status, 404);
            assert!(url.ends_with("/edgar/data/42/missing.txt"), "url {url}");
        }
        other => panic!("expected HttpStatus, got {other:?}"),
    }
    assert_eq!(server.requested_paths().len(), 1);
}

#[test]
fn fetched_documents_are_cached_and_reused_without_the_network() {
    // One scripted response: a second network hit would stall the client,
    // so a second successful fetch proves the cache answered.
    let server = ScriptedServer::start(vec![(200, "document body")]);
    let cache_dir = TempDir::new().unwrap();
    let ingestor = Ingestor::new(
        FetchSource::Live(fast_client(&server.base_url, 1)),
        Cache::new(cache_dir.path()).unwrap(),
        false,
    );
    let ref_ = filing_ref("0000000042-20-000001");

    let first = ingestor.fetch_filing(&ref_).unwrap();
    assert!(!first.from_cache);
    assert_eq!(first.content, b"document body");

    let second = ingestor.fetch_filing(&ref_).unwrap();
    assert!(second.from_cache);
    assert_eq!(second.content, first.content);
    assert_eq!(server.requested_paths().len(), 1);
}

#[test]
fn failed_downloads_leave_no_cache_entry() {
    let server = ScriptedServer::start(vec![(500, "boom")]);
    let cache_dir = TempDir::new().unwrap();
    let ingestor = Ingestor::new(
        FetchSource::Live(fast_client(&server.base_url, 1)),
        Cache::new(cache_dir.path()).unwrap(),
        false,
    );
    let ref_ = filing_ref("0000000042-20-000002");

    ingestor.fetch_filing(&ref_).unwrap_err();
    assert!(!ingestor.cache().contains(&ref_.accession_id));
    drop(server);
}

#[test]
fn listing_pulls_every_quarter_index_in_range() {
    let index = "CIK|Company Name|Form Type|Date Filed|File Name\n\
                 ----------------\n\
                 42|Wire Test Co|10-K|2020-02-14|edgar/data/42/0000000042-20-000001.txt\n";
    let server = ScriptedServer::start(vec![(200, index), (200, index)]);
    let cache_dir = TempDir::new().unwrap();
    let ingestor = Ingestor::new(
        FetchSource::Live(fast_client(&server.base_url, 1)),
        Cache::new(cache_dir.path()).unwrap(),
        false,
    );

    let refs = ingestor
        .list_filings(
            NaiveDate::from_ymd_opt(2020, 2, 1).unwrap(),
            NaiveDate::from_ymd_opt(2020, 5, 15).unwrap(),
            "10-K",
        )
        .unwrap();
    // The same accession listed in both quarters dedupes to one row.
    assert_eq!(refs.len(), 1);
    assert_eq!(refs[0].accession_id, "0000000042-20-000001");

    let paths = server.requested_paths();
    assert_eq!(
        paths,
        vec![
            "/edgar/full-index/2020/QTR1/master.idx".to_string(),
            "/edgar/full-index/2020/QTR2/master.idx".to_string(),
        ]
    );
}
