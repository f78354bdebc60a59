//! Contracts for the four external capabilities a turn needs, and their
//! bindings.
//!
//! | capability  | trait            | offline binding                              |
//! |-------------|------------------|----------------------------------------------|
//! | transcriber | [`Transcriber`]  | sidecar transcript, else short audio digest  |
//! | dialogue    | [`DialogueModel`]| persona-flavoured template                   |
//! | synthesizer | [`Synthesizer`]  | 440 Hz tone, 250 ms per word                 |
//! | lipsync     | [`LipSync`]      | WAV "clip" bound to the base video manifest  |
//!
//! Remote bindings speak JSON over HTTPS (see `docs/providers.md`);
//! simulated bindings wrap the offline ones with an injected delay.

mod audio;
mod clip;
mod config;
mod offline;
mod params;
mod policy;
mod remote;
mod simulated;

use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assets::{BaseVideo, VoiceModelRef};
use crate::persona::PromptBundle;

pub use audio::{sine_tone, AudioBlob, AudioError, AudioFormat, SAMPLES_PER_MS, SAMPLE_RATE};
pub use clip::{content_type_for, ClipBlob, ClipManifest, OFFLINE_CONTAINER};
pub use config::{ConfigError, DelayRange, ProviderConfig, ProviderKind, ProviderMode};
pub use offline::{
    offline_reply, OfflineDialogue, OfflineLipSync, OfflineSynthesizer, OfflineTranscriber,
    DisabledTranscriber, MS_PER_WORD,
};
pub use params::{DialogueParams, VoiceParams};
pub use policy::{CallPolicy, BACKOFF_BASE};
pub use remote::{RemoteDialogue, RemoteLipSync, RemoteSynthesizer, RemoteTranscriber};
pub use simulated::Simulated;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProviderError {
    #[error("provider timed out")]
    Timeout,
    #[error("provider rejected credentials")]
    Auth,
    #[error("provider rate limit exceeded")]
    RateLimited,
    #[error("no speech detected")]
    EmptySpeech,
    #[error("provider disabled in this deployment")]
    Disabled,
    #[error("conversation exceeds the provider context limit")]
    ContextOverflow,
    #[error("unknown voice `{0}`")]
    UnknownVoice(String),
    #[error("unknown base video `{0}`")]
    UnknownBaseVideo(String),
    #[error("render failed: {0}")]
    RenderFailure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("provider returned HTTP {0}")]
    Upstream(u16),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed provider response: {0}")]
    BadResponse(String),
    #[error("cancelled")]
    Cancelled,
}

impl ProviderError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ProviderError::Timeout => "provider_timeout",
            ProviderError::Auth => "provider_auth",
            ProviderError::RateLimited => "provider_rate_limit",
            ProviderError::EmptySpeech => "empty_speech",
            ProviderError::Disabled => "provider_disabled",
            ProviderError::ContextOverflow => "context_overflow",
            ProviderError::UnknownVoice(_) => "unknown_voice",
            ProviderError::UnknownBaseVideo(_) => "unknown_base_video",
            ProviderError::RenderFailure(_) => "render_failure",
            ProviderError::InvalidInput(_) => "invalid_input",
            ProviderError::Upstream(_) => "provider_error",
            ProviderError::Transport(_) => "provider_unreachable",
            ProviderError::BadResponse(_) => "provider_bad_response",
            ProviderError::Cancelled => "cancelled",
        }
    }

    /// Only timeouts and rate limits are worth another attempt.
    pub fn is_retryable(&self) -> bool {
        matches!(self, ProviderError::Timeout | ProviderError::RateLimited)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Learner,
    Patient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub speaker: Speaker,
    pub text: String,
}

/// Everything the dialogue provider sees for one reply.
#[derive(Debug, Clone, Copy)]
pub struct DialogueRequest<'a> {
    pub prompt: &'a PromptBundle,
    /// Prior exchanges, oldest first.
    pub history: &'a [HistoryEntry],
    pub user_text: &'a str,
    pub params: &'a DialogueParams,
}

#[async_trait]
pub trait Transcriber: Send + Sync {
    async fn transcribe(&self, audio: &AudioBlob) -> Result<String, ProviderError>;

    /// False for deployments without audio input.
    fn is_enabled(&self) -> bool {
        true
    }
}

#[async_trait]
pub trait DialogueModel: Send + Sync {
    async fn generate_reply(&self, request: DialogueRequest<'_>) -> Result<String, ProviderError>;
}

#[async_trait]
pub trait Synthesizer: Send + Sync {
    async fn synthesize(
        &self,
        text: &str,
        voice: &VoiceModelRef,
        params: &VoiceParams,
    ) -> Result<AudioBlob, ProviderError>;
}

#[async_trait]
pub trait LipSync: Send + Sync {
    async fn render(&self, base: &BaseVideo, audio: &AudioBlob) -> Result<ClipBlob, ProviderError>;
}

/// Per-capability configuration, as it appears in the `[providers]` table of
/// the service config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProvidersConfig {
    pub transcriber: ProviderConfig,
    pub dialogue: ProviderConfig,
    pub synthesizer: ProviderConfig,
    pub lipsync: ProviderConfig,
}

impl Default for ProvidersConfig {
    fn default() -> Self {
        Self {
            transcriber: ProviderConfig::offline(ProviderKind::Transcriber),
            dialogue: ProviderConfig::offline(ProviderKind::Dialogue),
            synthesizer: ProviderConfig::offline(ProviderKind::Synthesizer),
            lipsync: ProviderConfig::offline(ProviderKind::Lipsync),
        }
    }
}

impl ProvidersConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (expected, c) in [
            (ProviderKind::Transcriber, &self.transcriber),
            (ProviderKind::Dialogue, &self.dialogue),
            (ProviderKind::Synthesizer, &self.synthesizer),
            (ProviderKind::Lipsync, &self.lipsync),
        ] {
            if c.kind != expected {
                return Err(ConfigError::Invalid {
                    kind: c.kind,
                    message: format!("configured in the {expected} slot"),
                });
            }
            c.validate()?;
        }
        Ok(())
    }
}

/// The four bindings a pipeline runs against.
#[derive(Clone)]
pub struct ProviderSet {
    pub transcriber: Arc<dyn Transcriber>,
    pub dialogue: Arc<dyn DialogueModel>,
    pub synthesizer: Arc<dyn Synthesizer>,
    pub lipsync: Arc<dyn LipSync>,
}

impl std::fmt::Debug for ProviderSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProviderSet")
            .field("text_only", &self.text_only())
            .finish_non_exhaustive()
    }
}

impl ProviderSet {
    pub fn offline() -> Self {
        Self {
            transcriber: Arc::new(OfflineTranscriber),
            dialogue: Arc::new(OfflineDialogue::default()),
            synthesizer: Arc::new(OfflineSynthesizer),
            lipsync: Arc::new(OfflineLipSync),
        }
    }

    pub fn from_config(config: &ProvidersConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Self {
            transcriber: transcriber_for(&config.transcriber)?,
            dialogue: dialogue_for(&config.dialogue)?,
            synthesizer: synthesizer_for(&config.synthesizer)?,
            lipsync: lipsync_for(&config.lipsync)?,
        })
    }

    pub fn text_only(&self) -> bool {
        !self.transcriber.is_enabled()
    }
}

fn http_client(config: &ProviderConfig) -> Result<remote::HttpBinding, ConfigError> {
    remote::HttpBinding::new(config).map_err(|message| ConfigError::Invalid {
        kind: config.kind,
        message,
    })
}

fn transcriber_for(c: &ProviderConfig) -> Result<Arc<dyn Transcriber>, ConfigError> {
    Ok(match c.mode {
        ProviderMode::Offline => Arc::new(OfflineTranscriber),
        ProviderMode::Simulated => Arc::new(Simulated::new(OfflineTranscriber, c)),
        ProviderMode::Remote => Arc::new(RemoteTranscriber::new(http_client(c)?)),
        ProviderMode::Disabled => Arc::new(DisabledTranscriber),
    })
}

fn dialogue_for(c: &ProviderConfig) -> Result<Arc<dyn DialogueModel>, ConfigError> {
    Ok(match c.mode {
        ProviderMode::Offline => Arc::new(OfflineDialogue::default()),
        ProviderMode::Simulated => Arc::new(Simulated::new(OfflineDialogue::default(), c)),
        ProviderMode::Remote => Arc::new(RemoteDialogue::new(http_client(c)?)),
        ProviderMode::Disabled => unreachable!("rejected by validate"),
    })
}

fn synthesizer_for(c: &ProviderConfig) -> Result<Arc<dyn Synthesizer>, ConfigError> {
    Ok(match c.mode {
        ProviderMode::Offline => Arc::new(OfflineSynthesizer),
        ProviderMode::Simulated => Arc::new(Simulated::new(OfflineSynthesizer, c)),
        ProviderMode::Remote => Arc::new(RemoteSynthesizer::new(http_client(c)?)),
        ProviderMode::Disabled => unreachable!("rejected by validate"),
    })
}

fn lipsync_for(c: &ProviderConfig) -> Result<Arc<dyn LipSync>, ConfigError> {
    Ok(match c.mode {
        ProviderMode::Offline => Arc::new(OfflineLipSync),
        ProviderMode::Simulated => Arc::new(Simulated::new(OfflineLipSync, c)),
        ProviderMode::Remote => Arc::new(RemoteLipSync::new(http_client(c)?)),
        ProviderMode::Disabled => unreachable!("rejected by validate"),
    })
}
