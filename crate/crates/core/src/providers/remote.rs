//! HTTP bindings. Every capability is one `POST <endpoint>` with a JSON body,
//! a bearer credential read from the configured environment variable at
//! call time, and a JSON reply. Envelopes are documented in
//! `docs/providers.md`.
//!
//! Error bodies from the vendor are never copied into our errors; only the
//! status code (and, for 422, a `code` field) is interpreted.

use async_trait::async_trait;
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{
    AudioBlob, CallPolicy, ClipBlob, ClipManifest, DialogueModel, DialogueRequest, LipSync,
    ProviderConfig, ProviderError, ProviderKind, Speaker, Synthesizer, Transcriber, VoiceParams,
};
use crate::assets::{BaseVideo, VoiceModelRef};

/// Largest accepted gap between the vendor's reported clip duration and the
/// driving audio.
const CLIP_DURATION_SLACK_MS: u64 = 100;

#[derive(Debug, Clone)]
pub struct HttpBinding {
    kind: ProviderKind,
    client: reqwest::Client,
    endpoint: String,
    credential_env: String,
    policy: CallPolicy,
}

impl HttpBinding {
    pub(super) fn new(config: &ProviderConfig) -> Result<Self, String> {
        let endpoint = config.endpoint.clone().ok_or("missing endpoint")?;
        reqwest::Url::parse(&endpoint).map_err(|e| format!("bad endpoint: {e}"))?;
        let client = reqwest::Client::builder()
            .build()
            .map_err(|e| format!("http client: {e}"))?;
        Ok(Self {
            kind: config.kind,
            client,
            endpoint,
            credential_env: config.credential_env.clone().ok_or("missing credential_env")?,
            policy: CallPolicy::from_config(config),
        })
    }

    async fn post(&self, body: &Value) -> Result<Value, ProviderError> {
        self.policy
            .run(|remaining| async move {
                let secret = std::env::var(&self.credential_env).map_err(|_| {
                    tracing::warn!(
                        provider = %self.kind,
                        env = %self.credential_env,
                        "credential environment variable is not set"
                    );
                    ProviderError::Auth
                })?;
                let resp = self
                    .client
                    .post(&self.endpoint)
                    .bearer_auth(secret)
                    .timeout(remaining)
                    .json(body)
                    .send()
                    .await
                    .map_err(|e| transport_error(&e))?;
                let status = resp.status().as_u16();
                if resp.status().is_success() {
                    return resp
                        .json::<Value>()
                        .await
                        .map_err(|_| ProviderError::BadResponse("body is not JSON".into()));
                }
                let code = if status == 422 || status == 404 {
                    resp.json::<ErrorEnvelope>().await.ok().and_then(|e| e.code)
                } else {
                    None
                };
                Err(self.status_error(status, code.as_deref()))
            })
            .await
    }

    fn status_error(&self, status: u16, code: Option<&str>) -> ProviderError {
        match (status, code) {
            (401 | 403, _) => ProviderError::Auth,
            (429, _) => ProviderError::RateLimited,
            (408 | 504, _) => ProviderError::Timeout,
            (413, _) => ProviderError::ContextOverflow,
            (422, Some("empty_speech")) => ProviderError::EmptySpeech,
            (422, Some("context_overflow")) => ProviderError::ContextOverflow,
            (404, Some("unknown_voice")) => ProviderError::UnknownVoice(String::new()),
            (404, Some("unknown_base_video")) => ProviderError::UnknownBaseVideo(String::new()),
            (s, _) if s >= 500 && self.kind == ProviderKind::Lipsync => {
                ProviderError::RenderFailure(format!("HTTP {s}"))
            }
            (s, _) => ProviderError::Upstream(s),
        }
    }
}

#[derive(Deserialize)]
struct ErrorEnvelope {
    code: Option<String>,
}

fn transport_error(e: &reqwest::Error) -> ProviderError {
    if e.is_timeout() {
        ProviderError::Timeout
    } else if e.is_connect() {
        ProviderError::Transport("connection failed".into())
    } else {
        ProviderError::Transport("request failed".into())
    }
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value, ProviderError> {
    v.get(name)
        .ok_or_else(|| ProviderError::BadResponse(format!("missing `{name}`")))
}

fn str_field<'a>(v: &'a Value, name: &str) -> Result<&'a str, ProviderError> {
    field(v, name)?
        .as_str()
        .ok_or_else(|| ProviderError::BadResponse(format!("`{name}` is not a string")))
}

fn b64_field(v: &Value, name: &str) -> Result<Vec<u8>, ProviderError> {
    B64.decode(str_field(v, name)?)
        .map_err(|_| ProviderError::BadResponse(format!("`{name}` is not base64")))
}

pub struct RemoteTranscriber(HttpBinding);

impl RemoteTranscriber {
    pub fn new(binding: HttpBinding) -> Self {
        Self(binding)
    }
}

#[async_trait]
impl Transcriber for RemoteTranscriber {
    async fn transcribe(&self, audio: &AudioBlob) -> Result<String, ProviderError> {
        if audio.is_empty() {
            return Err(ProviderError::InvalidInput("audio is empty".into()));
        }
        let body = json!({
            "format": "wav_pcm16_mono_16k",
            "audio_base64": B64.encode(audio.bytes()),
        });
        let resp = self.0.post(&body).await?;
        let text = str_field(&resp, "text")?.trim();
        if text.is_empty() {
            return Err(ProviderError::EmptySpeech);
        }
        Ok(text.to_string())
    }
}

pub struct RemoteDialogue(HttpBinding);

impl RemoteDialogue {
    pub fn new(binding: HttpBinding) -> Self {
        Self(binding)
    }
}

#[async_trait]
impl DialogueModel for RemoteDialogue {
    async fn generate_reply(&self, req: DialogueRequest<'_>) -> Result<String, ProviderError> {
        if req.user_text.trim().is_empty() {
            return Err(ProviderError::InvalidInput("user_text is empty".into()));
        }
        req.params.validate()?;
        let mut messages: Vec<Value> = req
            .history
            .iter()
            .map(|h| {
                let role = match h.speaker {
                    Speaker::Learner => "user",
                    Speaker::Patient => "assistant",
                };
                json!({ "role": role, "content": h.text })
            })
            .collect();
        messages.push(json!({ "role": "user", "content": req.user_text }));
        let body = json!({
            "system": req.prompt.system_text,
            "messages": messages,
            "temperature": req.params.temperature,
            "max_tokens": req.params.max_reply_tokens,
        });
        let resp = self.0.post(&body).await?;
        let text = str_field(&resp, "text")?.trim();
        if text.is_empty() {
            return Err(ProviderError::BadResponse("empty reply".into()));
        }
        Ok(text.to_string())
    }
}

pub struct RemoteSynthesizer(HttpBinding);

impl RemoteSynthesizer {
    pub fn new(binding: HttpBinding) -> Self {
        Self(binding)
    }
}

#[async_trait]
impl Synthesizer for RemoteSynthesizer {
    async fn synthesize(
        &self,
        text: &str,
        voice: &VoiceModelRef,
        params: &VoiceParams,
    ) -> Result<AudioBlob, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::InvalidInput("text is empty".into()));
        }
        params.validate().map_err(ProviderError::InvalidInput)?;
        let body = json!({
            "text": text,
            "voice": voice.handle,
            "stability": params.stability,
            "similarity": params.similarity,
            "style": params.style,
            "format": "wav_pcm16_mono_16k",
        });
        let resp = self.0.post(&body).await.map_err(|e| match e {
            ProviderError::UnknownVoice(_) => ProviderError::UnknownVoice(voice.voice_id.clone()),
            other => other,
        })?;
        AudioBlob::from_wav(b64_field(&resp, "audio_base64")?)
            .map_err(|e| ProviderError::BadResponse(e.to_string()))
    }
}

pub struct RemoteLipSync(HttpBinding);

impl RemoteLipSync {
    pub fn new(binding: HttpBinding) -> Self {
        Self(binding)
    }
}

#[async_trait]
impl LipSync for RemoteLipSync {
    async fn render(&self, base: &BaseVideo, audio: &AudioBlob) -> Result<ClipBlob, ProviderError> {
        if audio.is_empty() {
            return Err(ProviderError::InvalidInput("audio is empty".into()));
        }
        let body = json!({
            "base_video_id": base.base_video_id,
            "base_video_sha256": base.checksum,
            "audio_base64": B64.encode(audio.bytes()),
        });
        let resp = self.0.post(&body).await.map_err(|e| match e {
            ProviderError::UnknownBaseVideo(_) => {
                ProviderError::UnknownBaseVideo(base.base_video_id.clone())
            }
            other => other,
        })?;
        let container = str_field(&resp, "container")?.to_string();
        let bytes = b64_field(&resp, "clip_base64")?;
        if bytes.is_empty() {
            return Err(ProviderError::RenderFailure("empty clip".into()));
        }
        let reported = field(&resp, "duration_ms")?
            .as_u64()
            .ok_or_else(|| ProviderError::BadResponse("`duration_ms` is not an integer".into()))?;
        let expected = audio.duration_ms();
        if reported.abs_diff(expected) > CLIP_DURATION_SLACK_MS {
            return Err(ProviderError::RenderFailure(format!(
                "clip lasts {reported} ms, audio {expected} ms"
            )));
        }
        Ok(ClipBlob {
            container,
            bytes,
            duration_ms: expected,
            manifest: ClipManifest::for_audio(&base.base_video_id, audio),
        })
    }
}
