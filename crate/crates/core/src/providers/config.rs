use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Transcriber,
    Dialogue,
    Synthesizer,
    Lipsync,
}

impl fmt::Display for ProviderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProviderKind::Transcriber => "transcriber",
            ProviderKind::Dialogue => "dialogue",
            ProviderKind::Synthesizer => "synthesizer",
            ProviderKind::Lipsync => "lipsync",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderMode {
    Remote,
    Offline,
    /// Offline binding plus an injected delay.
    Simulated,
    /// No provider at all. Only meaningful for the transcriber (text-only
    /// deployments).
    Disabled,
}

/// Inclusive millisecond range, written `lo:hi` on the command line and
/// `[lo, hi]` in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct DelayRange {
    pub lo: u64,
    pub hi: u64,
}

impl From<[u64; 2]> for DelayRange {
    fn from([lo, hi]: [u64; 2]) -> Self {
        Self { lo, hi }
    }
}

impl From<DelayRange> for [u64; 2] {
    fn from(r: DelayRange) -> Self {
        [r.lo, r.hi]
    }
}

impl FromStr for DelayRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
        let lo: u64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
        let hi: u64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
        if lo > hi {
            return Err(format!("lower bound {lo} exceeds upper bound {hi}"));
        }
        Ok(Self { lo, hi })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{kind} provider: {message}")]
    Invalid { kind: ProviderKind, message: String },
}

/// How to reach one provider. Holds the *name* of the environment variable
/// with the credential, never the credential itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub mode: ProviderMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential_env: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated_delay_ms: Option<DelayRange>,
    /// Seed for simulated delays; unseeded runs draw from OS entropy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_timeout_ms() -> u64 {
    60_000
}

fn default_max_retries() -> u32 {
    2
}

impl ProviderConfig {
    pub fn offline(kind: ProviderKind) -> Self {
        Self {
            kind,
            mode: ProviderMode::Offline,
            endpoint: None,
            credential_env: None,
            timeout_ms: default_timeout_ms(),
            max_retries: default_max_retries(),
            simulated_delay_ms: None,
            seed: None,
        }
    }

    pub fn simulated(kind: ProviderKind, delay: DelayRange) -> Self {
        Self {
            mode: ProviderMode::Simulated,
            simulated_delay_ms: Some(delay),
            // leave room for the longest injected delay
            timeout_ms: default_timeout_ms().max(delay.hi + 5_000),
            ..Self::offline(kind)
        }
    }

    pub fn remote(kind: ProviderKind, endpoint: impl Into<String>, credential_env: impl Into<String>) -> Self {
        Self {
            mode: ProviderMode::Remote,
            endpoint: Some(endpoint.into()),
            credential_env: Some(credential_env.into()),
            ..Self::offline(kind)
        }
    }

    pub fn disabled(kind: ProviderKind) -> Self {
        Self {
            mode: ProviderMode::Disabled,
            ..Self::offline(kind)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |message: &str| {
            Err(ConfigError::Invalid {
                kind: self.kind,
                message: message.to_string(),
            })
        };
        if self.timeout_ms == 0 {
            return fail("timeout_ms must be positive");
        }
        if self.max_retries > 10 {
            return fail("max_retries must be at most 10");
        }
        match self.mode {
            ProviderMode::Remote => {
                if self.endpoint.as_deref().is_none_or(str::is_empty) {
                    return fail("remote mode requires an endpoint");
                }
                if self.credential_env.as_deref().is_none_or(str::is_empty) {
                    return fail("remote mode requires credential_env");
                }
            }
            ProviderMode::Simulated => {
                let Some(range) = self.simulated_delay_ms else {
                    return fail("simulated mode requires simulated_delay_ms");
                };
                if range.lo > range.hi {
                    return fail("simulated_delay_ms lower bound exceeds upper bound");
                }
            }
            ProviderMode::Disabled if self.kind != ProviderKind::Transcriber => {
                return fail("only the transcriber can be disabled");
            }
            _ => {}
        }
        if self.mode != ProviderMode::Simulated && self.simulated_delay_ms.is_some() {
            return fail("simulated_delay_ms is only valid in simulated mode");
        }
        Ok(())
    }
}
