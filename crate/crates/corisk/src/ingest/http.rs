//! Rate-limited HTTP access to the EDGAR archive.
//!
//! Requests are throttled to a configurable per-second rate (EDGAR fair-use
//! default 8) and retried with jittered exponential backoff on 429/503.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::error::{Error, Result};

const USER_AGENT: &str = concat!("corisk/", env!("CARGO_PKG_VERSION"), " (research tool)");

/// Sliding-window limiter: at most `rate` acquisitions in any 1 s window.
pub struct RateLimiter {
    rate: u32,
    window: Mutex<VecDeque<Instant>>,
}

impl RateLimiter {
    pub fn new(rate: u32) -> Self {
        RateLimiter {
            rate: rate.max(1),
            window: Mutex::new(VecDeque::new()),
        }
    }

    /// Block until issuing one more request stays within the rate.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let now = Instant::now();
                let mut window = self.window.lock().unwrap();
                while window
                    .front()
                    .is_some_and(|&t| now.duration_since(t) >= Duration::from_secs(1))
                {
                    window.pop_front();
                }
                if (window.len() as u32) < self.rate {
                    window.push_back(now);
                    return;
                }
                Duration::from_secs(1) - now.duration_since(*window.front().unwrap())
            };
            std::thread::sleep(wait + Duration::from_millis(1));
        }
    }
}

pub struct EdgarClient {
    client: reqwest::blocking::Client,
    base_url: String,
    limiter: RateLimiter,
    max_attempts: u32,
    backoff_base: Duration,
}

impl EdgarClient {
    pub fn new(base_url: impl Into<String>, rate_per_sec: u32) -> Result<Self> {
        Self::with_backoff(base_url, rate_per_sec, 5, Duration::from_secs(1))
    }

    pub fn with_backoff(
        base_url: impl Into<String>,
        rate_per_sec: u32,
        max_attempts: u32,
        backoff_base: Duration,
    ) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .user_agent(USER_AGENT)
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| Error::Network {
                url: String::new(),
                message: format!("cannot build HTTP client: {e}"),
            })?;
        Ok(EdgarClient {
            client,
            base_url: base_url.into().trim_end_matches('/').to_string(),
            limiter: RateLimiter::new(rate_per_sec),
            max_attempts: max_attempts.max(1),
            backoff_base,
        })
    }

    /// GET one archive-relative path, returning the body bytes.
    pub fn get(&self, rel_path: &str) -> Result<Vec<u8>> {
        let url = format!("{}/{}", self.base_url, rel_path.trim_start_matches('/'));
        let mut attempt = 0u32;
        loop {
            self.limiter.acquire();
            let response = self.client.get(&url).send().map_err(|e| Error::Network {
                url: url.clone(),
                message: e.to_string(),
            })?;
            let status = response.status().as_u16();
            if (200..300).contains(&status) {
                let bytes = response.bytes().map_err(|e| Error::Network {
                    url: url.clone(),
                    message: format!("body read failed: {e}"),
                })?;
                return Ok(bytes.to_vec());
            }
            attempt += 1;
            if (status == 429 || status == 503) && attempt < self.max_attempts {
                let delay = self.backoff_delay(attempt);
                log::warn!("HTTP {status} from {url}, retrying in {delay:?} (attempt {attempt})");
                std::thread::sleep(delay);
                continue;
            }
            return Err(Error::HttpStatus { status, url });
        }
    }

    /// base × 2^(attempt−1) plus up to 25% uniform jitter.
    fn backoff_delay(&self, attempt: u32) -> Duration {
        let exp = self
            .backoff_base
            .saturating_mul(1u32 << (attempt - 1).min(16));
        let jitter = rand::thread_rng().gen_range(0.0..=0.25);
        exp.mul_f64(1.0 + jitter)
    }
}
