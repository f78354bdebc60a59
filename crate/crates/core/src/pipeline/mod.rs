//! One conversational turn: learner input in, rendered patient clip out.
//!
//! ```text
//! received → [transcribing] → thinking → synthesizing → rendering → ready
//!                                    any stage may end in → failed
//! ```
//!
//! `transcribing` only happens for audio input. Each provider call runs under
//! the job's cancellation token and is timed on the monotonic clock; the time
//! not spent inside a provider is reported as overhead.

mod events;
mod jobs;
mod report;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tokio::time::Instant;
use tokio_util::sync::CancellationToken;

use crate::assets::{AssetError, AssetStore, BaseVideo, CacheKey, VoiceModelRef};
use crate::persona::PromptBundle;
use crate::providers::{
    AudioBlob, DialogueParams, DialogueRequest, HistoryEntry, ProviderError, ProviderSet, Speaker,
    VoiceParams,
};

pub use events::{is_canonical_order, monotonic_ms, EventLog, EventSink, Stage, StageEvent};
pub use jobs::{CancelAck, JobRegistry, JobState, UnknownJob};
pub use report::{latency_report, percentile, EmptyInput, LatencyReport, StageStats};

/// Detail attached to `synthesizing`/`rendering` events served from cache.
pub const CACHE_DETAIL: &str = "cache";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TurnInput {
    Audio(AudioBlob),
    Text(String),
}

#[derive(Debug, Clone)]
pub struct PipelineJob {
    pub job_id: String,
    pub session_id: String,
    pub turn_index: u32,
    pub input: TurnInput,
    pub created_at: Instant,
}

impl PipelineJob {
    pub fn new(job_id: impl Into<String>, session_id: impl Into<String>, turn_index: u32, input: TurnInput) -> Self {
        Self {
            job_id: job_id.into(),
            session_id: session_id.into(),
            turn_index,
            input,
            created_at: Instant::now(),
        }
    }
}

/// Per-stage wall time of one turn, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub transcribe_ms: f64,
    pub dialogue_ms: f64,
    pub synthesize_ms: f64,
    pub render_ms: f64,
    /// Synthesis was skipped because the reply was already rendered.
    pub synthesize_skipped: bool,
    /// Render was served from the clip cache.
    pub render_skipped: bool,
    pub total_ms: f64,
    pub overhead_ms: f64,
}

impl StageTimings {
    pub fn stage_sum_ms(&self) -> f64 {
        self.transcribe_ms + self.dialogue_ms + self.synthesize_ms + self.render_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnResult {
    pub user_text: String,
    pub patient_text: String,
    pub clip_id: String,
    pub timings: StageTimings,
    pub cache_hit: bool,
}

/// Why a turn failed, as carried on the `failed` event and in transcripts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCause {
    pub code: String,
    pub message: String,
}

impl FailureCause {
    pub fn cancelled() -> Self {
        Self::from(ProviderError::Cancelled)
    }
}

impl From<ProviderError> for FailureCause {
    fn from(e: ProviderError) -> Self {
        Self {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<&AssetError> for FailureCause {
    fn from(e: &AssetError) -> Self {
        let code = match e {
            AssetError::UnknownAsset { .. } => "unknown_asset",
            AssetError::ChecksumMismatch { .. } => "asset_corrupt",
            AssetError::ManifestMismatch(_) => "render_failure",
            _ => "asset_store",
        };
        Self {
            code: code.to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnFailure {
    pub cause: FailureCause,
    /// The learner's text, when it got that far.
    pub user_text: Option<String>,
}

/// A completed exchange, replayed to the dialogue provider.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exchange {
    pub user_text: String,
    pub patient_text: String,
}

/// Flattens the last `window` exchanges into alternating history entries.
pub fn window_history(exchanges: &[Exchange], window: usize) -> Vec<HistoryEntry> {
    let start = exchanges.len().saturating_sub(window);
    exchanges[start..]
        .iter()
        .flat_map(|e| {
            [
                HistoryEntry {
                    speaker: Speaker::Learner,
                    text: e.user_text.clone(),
                },
                HistoryEntry {
                    speaker: Speaker::Patient,
                    text: e.patient_text.clone(),
                },
            ]
        })
        .collect()
}

/// Everything about the persona and conversation a turn needs.
#[derive(Debug, Clone, Copy)]
pub struct TurnContext<'a> {
    pub persona_id: &'a str,
    pub prompt: &'a PromptBundle,
    pub voice: &'a VoiceModelRef,
    pub voice_params: VoiceParams,
    pub base_video: &'a BaseVideo,
    pub history: &'a [Exchange],
    pub params: &'a DialogueParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineOptions {
    pub cache_enabled: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { cache_enabled: true }
    }
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    providers: ProviderSet,
    assets: Arc<AssetStore>,
    options: PipelineOptions,
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

impl Pipeline {
    pub fn new(providers: ProviderSet, assets: Arc<AssetStore>) -> Self {
        Self::with_options(providers, assets, PipelineOptions::default())
    }

    pub fn with_options(providers: ProviderSet, assets: Arc<AssetStore>, options: PipelineOptions) -> Self {
        Self {
            providers,
            assets,
            options,
        }
    }

    pub fn providers(&self) -> &ProviderSet {
        &self.providers
    }

    pub fn assets(&self) -> &Arc<AssetStore> {
        &self.assets
    }

    /// Exact-match lookup of a previously rendered reply.
    pub fn check_cache(&self, persona_id: &str, patient_text: &str, voice_params: VoiceParams) -> Option<String> {
        self.assets
            .lookup_cache(&CacheKey::new(persona_id, patient_text, voice_params))
    }

    pub async fn run_turn(
        &self,
        job: &PipelineJob,
        ctx: &TurnContext<'_>,
        sink: &dyn EventSink,
        cancel: &CancellationToken,
    ) -> Result<TurnResult, TurnFailure> {
        let emit = |stage: Stage, detail: Option<String>| {
            sink.emit(StageEvent {
                job_id: job.job_id.clone(),
                stage,
                at_ms: monotonic_ms(),
                detail,
            })
        };
        let mut user_text: Option<String> = None;
        let fail = |cause: FailureCause, user_text: Option<String>| {
            tracing::info!(job_id = %job.job_id, code = %cause.code, "turn failed");
            emit(Stage::Failed, Some(cause.code.clone()));
            TurnFailure { cause, user_text }
        };

        let start = Instant::now();
        emit(Stage::Received, None);
        let mut timings = StageTimings::default();

        let text = match &job.input {
            TurnInput::Text(t) => {
                let t = t.trim();
                if t.is_empty() {
                    return Err(fail(
                        ProviderError::InvalidInput("empty input".into()).into(),
                        None,
                    ));
                }
                t.to_string()
            }
            TurnInput::Audio(audio) => {
                emit(Stage::Transcribing, None);
                let t0 = Instant::now();
                let r = guarded(cancel, self.providers.transcriber.transcribe(audio)).await;
                timings.transcribe_ms = ms_since(t0);
                match r {
                    Ok(t) => t,
                    Err(e) => return Err(fail(e.into(), None)),
                }
            }
        };
        user_text.get_or_insert(text.clone());

        emit(Stage::Thinking, None);
        let history = window_history(ctx.history, ctx.params.history_window);
        let t0 = Instant::now();
        let reply = guarded(
            cancel,
            self.providers.dialogue.generate_reply(DialogueRequest {
                prompt: ctx.prompt,
                history: &history,
                user_text: &text,
                params: ctx.params,
            }),
        )
        .await;
        timings.dialogue_ms = ms_since(t0);
        let reply = match reply {
            Ok(r) => r,
            Err(e) => return Err(fail(e.into(), user_text)),
        };

        let key = CacheKey::new(ctx.persona_id, &reply, ctx.voice_params);
        let cached = if self.options.cache_enabled {
            self.assets.lookup_cache(&key)
        } else {
            None
        };

        let clip_id = if let Some(clip_id) = cached {
            emit(Stage::Synthesizing, Some(CACHE_DETAIL.into()));
            emit(Stage::Rendering, Some(CACHE_DETAIL.into()));
            timings.synthesize_skipped = true;
            timings.render_skipped = true;
            clip_id
        } else {
            emit(Stage::Synthesizing, None);
            let t0 = Instant::now();
            let audio = guarded(
                cancel,
                self.providers
                    .synthesizer
                    .synthesize(&reply, ctx.voice, &ctx.voice_params),
            )
            .await;
            timings.synthesize_ms = ms_since(t0);
            let audio = match audio {
                Ok(a) => a,
                Err(e) => return Err(fail(e.into(), user_text)),
            };

            emit(Stage::Rendering, None);
            let t0 = Instant::now();
            let clip = guarded(cancel, self.providers.lipsync.render(ctx.base_video, &audio)).await;
            timings.render_ms = ms_since(t0);
            let clip = match clip {
                Ok(c) => c,
                Err(e) => return Err(fail(e.into(), user_text)),
            };
            if cancel.is_cancelled() {
                return Err(fail(FailureCause::cancelled(), user_text));
            }
            match self.assets.store_clip(&clip, key) {
                Ok(record) => record.clip_id,
                Err(e) => return Err(fail((&e).into(), user_text)),
            }
        };

        timings.total_ms = ms_since(start);
        timings.overhead_ms = (timings.total_ms - timings.stage_sum_ms()).max(0.0);
        emit(Stage::Ready, Some(clip_id.clone()));
        Ok(TurnResult {
            user_text: text,
            patient_text: reply,
            clip_id,
            timings,
            cache_hit: timings.render_skipped,
        })
    }
}

async fn guarded<T>(
    cancel: &CancellationToken,
    call: impl std::future::Future<Output = Result<T, ProviderError>>,
) -> Result<T, ProviderError> {
    tokio::select! {
        biased;
        _ = cancel.cancelled() => Err(ProviderError::Cancelled),
        r = call => r,
    }
}

#[cfg(test)]
mod tests;
