//! Deterministic bindings with no network or model. Equal inputs always
//! produce byte-equal outputs.

use async_trait::async_trait;

use super::{
    sine_tone, AudioBlob, ClipBlob, ClipManifest, DialogueModel, DialogueRequest, LipSync,
    ProviderError, Synthesizer, Transcriber, VoiceParams, OFFLINE_CONTAINER,
};
use crate::assets::{BaseVideo, VoiceModelRef};
use crate::digest::sha256_hex;
use crate::persona::first_sentence;

pub const MS_PER_WORD: u64 = 250;

/// Returns the sidecar transcript when present, otherwise the hex of the
/// first 8 bytes of the audio's SHA-256.
#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineTranscriber;

#[async_trait]
impl Transcriber for OfflineTranscriber {
    async fn transcribe(&self, audio: &AudioBlob) -> Result<String, ProviderError> {
        if audio.is_empty() {
            return Err(ProviderError::InvalidInput("audio is empty".into()));
        }
        match audio.sidecar_transcript() {
            Some(t) if t.trim().is_empty() => Err(ProviderError::EmptySpeech),
            Some(t) => Ok(t.trim().to_string()),
            None => Ok(sha256_hex(audio.bytes())[..16].to_string()),
        }
    }
}

/// Stand-in for deployments with no speech input.
#[derive(Debug, Clone, Copy, Default)]
pub struct DisabledTranscriber;

#[async_trait]
impl Transcriber for DisabledTranscriber {
    async fn transcribe(&self, _audio: &AudioBlob) -> Result<String, ProviderError> {
        Err(ProviderError::Disabled)
    }

    fn is_enabled(&self) -> bool {
        false
    }
}

/// `As <name>: regarding "<first 40 chars of user_text>" — <first sentence
/// of disease understanding>`
pub fn offline_reply(display_name: &str, user_text: &str, disease_understanding: &str) -> String {
    let quoted: String = user_text.chars().take(40).collect();
    format!(
        "As {display_name}: regarding \"{quoted}\" — {}",
        first_sentence(disease_understanding)
    )
}

#[derive(Debug, Clone, Copy)]
pub struct OfflineDialogue {
    /// Characters of system text + replayed history + user text accepted
    /// before reporting a context overflow.
    pub context_limit_chars: usize,
}

impl Default for OfflineDialogue {
    fn default() -> Self {
        Self {
            context_limit_chars: 400_000,
        }
    }
}

#[async_trait]
impl DialogueModel for OfflineDialogue {
    async fn generate_reply(&self, req: DialogueRequest<'_>) -> Result<String, ProviderError> {
        if req.user_text.trim().is_empty() {
            return Err(ProviderError::InvalidInput("user_text is empty".into()));
        }
        req.params.validate()?;
        let used = req.prompt.system_text.chars().count()
            + req.history.iter().map(|h| h.text.chars().count()).sum::<usize>()
            + req.user_text.chars().count();
        if used > self.context_limit_chars {
            return Err(ProviderError::ContextOverflow);
        }
        let name = req
            .prompt
            .persona_name()
            .ok_or_else(|| ProviderError::InvalidInput("prompt has no persona name".into()))?;
        let understanding = req.prompt.section("Disease understanding").unwrap_or_default();
        Ok(offline_reply(name, req.user_text.trim(), understanding))
    }
}

/// A 440 Hz tone lasting [`MS_PER_WORD`] per whitespace-separated word.
#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineSynthesizer;

#[async_trait]
impl Synthesizer for OfflineSynthesizer {
    async fn synthesize(
        &self,
        text: &str,
        _voice: &VoiceModelRef,
        params: &VoiceParams,
    ) -> Result<AudioBlob, ProviderError> {
        params.validate().map_err(ProviderError::InvalidInput)?;
        let words = text.split_whitespace().count() as u64;
        if words == 0 {
            return Err(ProviderError::InvalidInput("text is empty".into()));
        }
        Ok(AudioBlob::from_samples(&sine_tone(MS_PER_WORD * words)))
    }
}

/// Produces the driving audio itself as the clip payload, bound to the base
/// video through the manifest.
#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineLipSync;

#[async_trait]
impl LipSync for OfflineLipSync {
    async fn render(&self, base: &BaseVideo, audio: &AudioBlob) -> Result<ClipBlob, ProviderError> {
        if audio.is_empty() {
            return Err(ProviderError::InvalidInput("audio is empty".into()));
        }
        Ok(ClipBlob {
            container: OFFLINE_CONTAINER.to_string(),
            bytes: audio.bytes().to_vec(),
            duration_ms: audio.duration_ms(),
            manifest: ClipManifest::for_audio(&base.base_video_id, audio),
        })
    }
}
