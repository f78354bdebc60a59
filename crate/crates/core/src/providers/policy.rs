use std::future::Future;
use std::time::Duration;

use rand::Rng;
use tokio::time::Instant;

use super::{ProviderConfig, ProviderError};

pub const BACKOFF_BASE: Duration = Duration::from_millis(500);

/// Timeout and retry rules for one provider.
///
/// `timeout` bounds the whole call, retries and backoff included. Only
/// [`ProviderError::is_retryable`] failures are retried, at most
/// `max_retries` times, sleeping `base · 2^(n-1)` scaled by a random factor
/// in `[0.5, 1.0]` and never past the deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CallPolicy {
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff_base: Duration,
}

impl CallPolicy {
    pub fn from_config(config: &ProviderConfig) -> Self {
        Self {
            timeout: Duration::from_millis(config.timeout_ms),
            max_retries: config.max_retries,
            backoff_base: BACKOFF_BASE,
        }
    }

    pub async fn run<T, F, Fut>(&self, mut attempt: F) -> Result<T, ProviderError>
    where
        F: FnMut(Duration) -> Fut,
        Fut: Future<Output = Result<T, ProviderError>>,
    {
        let deadline = Instant::now() + self.timeout;
        let retries = async {
            let mut tries = 0u32;
            loop {
                let remaining = deadline.saturating_duration_since(Instant::now());
                if remaining.is_zero() {
                    return Err(ProviderError::Timeout);
                }
                match attempt(remaining).await {
                    Ok(v) => return Ok(v),
                    Err(e) if e.is_retryable() && tries < self.max_retries => {
                        tries += 1;
                        let backoff = self.backoff(tries);
                        let remaining = deadline.saturating_duration_since(Instant::now());
                        tracing::debug!(attempt = tries, ?backoff, code = e.code(), "retrying provider call");
                        tokio::time::sleep(backoff.min(remaining)).await;
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        match tokio::time::timeout_at(deadline, retries).await {
            Ok(r) => r,
            Err(_) => Err(ProviderError::Timeout),
        }
    }

    fn backoff(&self, retry: u32) -> Duration {
        let exp = self.backoff_base.saturating_mul(1u32 << (retry - 1).min(16));
        let jitter: f64 = rand::rng().random_range(0.5..=1.0);
        exp.mul_f64(jitter)
    }
}
