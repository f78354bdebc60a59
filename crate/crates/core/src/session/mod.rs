//! Conversation lifecycle and the authoritative transcript.
//!
//! A session is `idle` until a turn is submitted, `processing` while that
//! turn's job runs, and `idle` again once the turn (successful or failed) has
//! been appended. A second submission during `processing` is rejected, not
//! queued. Closing cancels any running job, waits for its failed turn to be
//! recorded, then seals the session.
//!
//! Terminal frames (`ready`/`failed`) are published only after the turn is
//! committed, so an observer that sees `ready` can immediately read the
//! transcript or submit the next turn.

mod hub;
mod store;
mod types;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use rand::Rng;
use tokio::sync::Notify;

use crate::assets::{BaseVideo, VoiceModelRef};
use crate::persona::{assemble_prompt, PersonaRegistry, PromptBundle, RolePlayInstructions};
use crate::pipeline::{
    CancelAck, EventSink, Exchange, JobRegistry, JobState, Pipeline, PipelineJob,
    StageEvent, TurnContext, TurnInput,
};
use crate::providers::{DialogueParams, VoiceParams};

pub use hub::{EventFrame, Subscription};
pub use store::{IndexEntry, Record, SessionStore, StoreError, LOG_VERSION};
pub use types::{Session, SessionState, Turn, TurnStatus};
pub(crate) use types::unix_ms_now;

use hub::EventHub;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("unknown persona `{0}`")]
    UnknownPersona(String),
    #[error("persona `{persona_id}` cannot be used: {reason}")]
    InvalidPersona { persona_id: String, reason: String },
    #[error("unknown session")]
    UnknownSession,
    #[error("a turn is already in progress for this session")]
    SessionBusy,
    #[error("session is closed")]
    SessionClosed,
    #[error("input is empty")]
    EmptyInput,
    #[error("speech input is not available in this deployment")]
    ProviderDisabled,
    #[error("unknown job `{0}`")]
    UnknownJob(String),
    #[error("session storage failed: {0}")]
    Storage(String),
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::UnknownPersona(_) => "unknown_persona",
            SessionError::InvalidPersona { .. } => "invalid_persona",
            SessionError::UnknownSession => "unknown_session",
            SessionError::SessionBusy => "session_busy",
            SessionError::SessionClosed => "session_closed",
            SessionError::EmptyInput => "empty_input",
            SessionError::ProviderDisabled => "provider_disabled",
            SessionError::UnknownJob(_) => "unknown_job",
            SessionError::Storage(_) => "storage_error",
        }
    }
}

impl From<StoreError> for SessionError {
    fn from(e: StoreError) -> Self {
        SessionError::Storage(e.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SessionOptions {
    pub dialogue: DialogueParams,
}

struct Live {
    session: Session,
    prompt: Arc<PromptBundle>,
    voice: VoiceModelRef,
    voice_params: VoiceParams,
    base: BaseVideo,
    job: Option<String>,
    closing: bool,
}

struct Handle {
    hub: EventHub,
    live: Mutex<Live>,
    changed: Notify,
}

impl Handle {
    fn lock(&self) -> std::sync::MutexGuard<'_, Live> {
        self.live.lock().expect("session lock")
    }
}

pub struct SessionManager {
    personas: Arc<PersonaRegistry>,
    instructions: RolePlayInstructions,
    pipeline: Pipeline,
    jobs: JobRegistry,
    sessions: RwLock<HashMap<String, Arc<Handle>>>,
    store: Option<SessionStore>,
    options: SessionOptions,
}

impl std::fmt::Debug for SessionManager {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SessionManager")
            .field("sessions", &self.sessions.read().map(|s| s.len()).unwrap_or(0))
            .finish_non_exhaustive()
    }
}

fn random_hex_128() -> String {
    format!("{:032x}", rand::rng().random::<u128>())
}

impl SessionManager {
    pub fn new(
        personas: Arc<PersonaRegistry>,
        instructions: RolePlayInstructions,
        pipeline: Pipeline,
        store: Option<SessionStore>,
        options: SessionOptions,
    ) -> Arc<Self> {
        Arc::new(Self {
            personas,
            instructions,
            pipeline,
            jobs: JobRegistry::new(),
            sessions: RwLock::new(HashMap::new()),
            store,
            options,
        })
    }

    pub fn personas(&self) -> &Arc<PersonaRegistry> {
        &self.personas
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn store(&self) -> Option<&SessionStore> {
        self.store.as_ref()
    }

    pub fn text_only(&self) -> bool {
        self.pipeline.providers().text_only()
    }

    fn handle(&self, session_id: &str) -> Result<Arc<Handle>, SessionError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(session_id)
            .cloned()
            .ok_or(SessionError::UnknownSession)
    }

    fn persist(&self, snapshot: &Session, record: Record) {
        if let Some(store) = &self.store {
            if let Err(e) = store.append(snapshot, record) {
                tracing::error!(session_id = %snapshot.session_id, error = %e, "failed to persist session record");
            }
        }
    }

    /// Opens a session with the persona's registered voice defaults.
    pub fn create_session(&self, persona_id: &str) -> Result<Session, SessionError> {
        self.create_session_with(persona_id, None)
    }

    pub fn create_session_with(
        &self,
        persona_id: &str,
        voice_params: Option<VoiceParams>,
    ) -> Result<Session, SessionError> {
        let entry = self
            .personas
            .get(persona_id)
            .ok_or_else(|| SessionError::UnknownPersona(persona_id.to_string()))?;
        let invalid = |reason: String| SessionError::InvalidPersona {
            persona_id: persona_id.to_string(),
            reason,
        };
        if !entry.report.ok {
            let paths = entry.report.error_paths().join(", ");
            return Err(invalid(format!("profile fails validation ({paths})")));
        }
        let profile = &entry.profile;
        let assets = self.pipeline.assets();
        let base = assets
            .base_video(&profile.base_video_id)
            .map_err(|_| invalid(format!("base video `{}` is not registered", profile.base_video_id)))?;
        let voice = assets
            .voice(&profile.voice_id)
            .map_err(|_| invalid(format!("voice `{}` is not registered", profile.voice_id)))?;
        let voice_params = voice_params.unwrap_or(voice.defaults);
        voice_params
            .validate()
            .map_err(|m| invalid(format!("voice parameters: {m}")))?;
        let prompt = assemble_prompt(profile, &self.instructions).map_err(|e| invalid(e.to_string()))?;

        let session = Session {
            session_id: random_hex_128(),
            persona_id: persona_id.to_string(),
            state: SessionState::Idle,
            turns: Vec::new(),
            created_at_ms: types::unix_ms_now(),
            prompt_hash: prompt.content_hash.clone(),
        };
        if let Some(store) = &self.store {
            store.append(
                &session,
                Record::Created {
                    session_id: session.session_id.clone(),
                    persona_id: session.persona_id.clone(),
                    prompt_hash: session.prompt_hash.clone(),
                    created_at_ms: session.created_at_ms,
                },
            )?;
        }
        let handle = Arc::new(Handle {
            hub: EventHub::new(&session.session_id),
            live: Mutex::new(Live {
                session: session.clone(),
                prompt: Arc::new(prompt),
                voice,
                voice_params,
                base,
                job: None,
                closing: false,
            }),
            changed: Notify::new(),
        });
        self.sessions
            .write()
            .expect("session map lock")
            .insert(session.session_id.clone(), handle);
        tracing::info!(session_id = %session.session_id, persona_id, "session created");
        Ok(session)
    }

    /// Starts a turn and returns its job id. Progress is published as
    /// [`EventFrame`]s; the finished turn lands in the transcript.
    pub fn submit_turn(self: &Arc<Self>, session_id: &str, input: TurnInput) -> Result<String, SessionError> {
        let handle = self.handle(session_id)?;
        let input = match input {
            TurnInput::Text(t) if t.trim().is_empty() => return Err(SessionError::EmptyInput),
            TurnInput::Text(t) => TurnInput::Text(t.trim().to_string()),
            TurnInput::Audio(a) if a.is_empty() => return Err(SessionError::EmptyInput),
            TurnInput::Audio(_) if self.text_only() => return Err(SessionError::ProviderDisabled),
            audio => audio,
        };

        let job_id = random_hex_128();
        let (job, owned) = {
            let mut live = handle.lock();
            if live.closing || live.session.state == SessionState::Closed {
                return Err(SessionError::SessionClosed);
            }
            if live.job.is_some() {
                return Err(SessionError::SessionBusy);
            }
            let turn_index = live.session.turns.len() as u32;
            live.job = Some(job_id.clone());
            live.session.state = SessionState::Processing;
            self.persist(
                &live.session,
                Record::State {
                    state: SessionState::Processing,
                    job_id: Some(job_id.clone()),
                },
            );
            let history: Vec<Exchange> = live
                .session
                .turns
                .iter()
                .filter_map(|t| match (&t.status, &t.user_text, &t.patient_text) {
                    (TurnStatus::Ok, Some(u), Some(p)) => Some(Exchange {
                        user_text: u.clone(),
                        patient_text: p.clone(),
                    }),
                    _ => None,
                })
                .collect();
            (
                PipelineJob::new(job_id.clone(), session_id, turn_index, input),
                OwnedContext {
                    persona_id: live.session.persona_id.clone(),
                    prompt: live.prompt.clone(),
                    voice: live.voice.clone(),
                    voice_params: live.voice_params,
                    base: live.base.clone(),
                    history,
                },
            )
        };
        let token = self.jobs.start(&job_id);
        let this = self.clone();
        tokio::spawn(async move { this.run_job(handle, job, owned, token).await });
        Ok(job_id)
    }

    async fn run_job(
        &self,
        handle: Arc<Handle>,
        job: PipelineJob,
        owned: OwnedContext,
        token: tokio_util::sync::CancellationToken,
    ) {
        let ctx = TurnContext {
            persona_id: &owned.persona_id,
            prompt: &owned.prompt,
            voice: &owned.voice,
            voice_params: owned.voice_params,
            base_video: &owned.base,
            history: &owned.history,
            params: &self.options.dialogue,
        };
        let sink = HoldTerminal {
            hub: &handle.hub,
            turn_index: job.turn_index,
            held: Mutex::new(None),
        };
        let outcome = self.pipeline.run_turn(&job, &ctx, &sink, &token).await;
        let terminal = sink.held.lock().expect("sink lock").take();

        let (turn, clip_id, cause) = match outcome {
            Ok(r) => (
                Turn {
                    index: job.turn_index,
                    job_id: job.job_id.clone(),
                    user_text: Some(r.user_text),
                    patient_text: Some(r.patient_text),
                    clip_id: Some(r.clip_id.clone()),
                    timings: Some(r.timings),
                    cache_hit: r.cache_hit,
                    status: TurnStatus::Ok,
                },
                Some(r.clip_id),
                None,
            ),
            Err(f) => (
                Turn {
                    index: job.turn_index,
                    job_id: job.job_id.clone(),
                    user_text: f.user_text.or_else(|| match &job.input {
                        TurnInput::Text(t) => Some(t.clone()),
                        TurnInput::Audio(_) => None,
                    }),
                    patient_text: None,
                    clip_id: None,
                    timings: None,
                    cache_hit: false,
                    status: TurnStatus::Failed {
                        cause: f.cause.clone(),
                    },
                },
                None,
                Some(f.cause),
            ),
        };
        let state = if turn.is_ok() { JobState::Ready } else { JobState::Failed };

        {
            let mut live = handle.lock();
            live.session.turns.push(turn.clone());
            self.persist(&live.session, Record::Turn { turn });
            live.session.state = SessionState::Idle;
            live.job = None;
            self.persist(
                &live.session,
                Record::State {
                    state: SessionState::Idle,
                    job_id: None,
                },
            );
            self.jobs.finish(&job.job_id, state);
            // published under the session lock so the next turn's frames
            // cannot overtake it
            if let Some(ev) = terminal {
                handle.hub.publish(job.turn_index, ev, clip_id, cause);
            }
        }
        handle.changed.notify_waiters();
    }

    /// Waits until the job's turn is in the transcript and returns it.
    pub async fn wait_for_turn(&self, session_id: &str, job_id: &str) -> Result<Turn, SessionError> {
        let handle = self.handle(session_id)?;
        loop {
            let notified = handle.changed.notified();
            tokio::pin!(notified);
            notified.as_mut().enable();
            {
                let live = handle.lock();
                if let Some(t) = live.session.turns.iter().rev().find(|t| t.job_id == job_id) {
                    return Ok(t.clone());
                }
                if live.job.as_deref() != Some(job_id) {
                    return Err(SessionError::UnknownJob(job_id.to_string()));
                }
            }
            notified.await;
        }
    }

    /// Snapshot of a live session, or of a persisted one from an earlier run.
    pub fn get_session(&self, session_id: &str) -> Result<Session, SessionError> {
        match self.handle(session_id) {
            Ok(h) => Ok(h.lock().session.clone()),
            Err(e) => match &self.store {
                Some(store) if store.index().contains_key(session_id) => {
                    store.load(session_id).map_err(SessionError::from)
                }
                _ => Err(e),
            },
        }
    }

    pub fn get_transcript(&self, session_id: &str) -> Result<Vec<Turn>, SessionError> {
        self.get_session(session_id).map(|s| s.turns)
    }

    /// Base video the session's persona idles on.
    pub fn base_video(&self, session_id: &str) -> Result<BaseVideo, SessionError> {
        Ok(self.handle(session_id)?.lock().base.clone())
    }

    /// True when `clip_id` was produced by one of this session's turns.
    pub fn owns_clip(&self, session_id: &str, clip_id: &str) -> bool {
        self.get_session(session_id)
            .map(|s| s.turns.iter().any(|t| t.clip_id.as_deref() == Some(clip_id)))
            .unwrap_or(false)
    }

    /// Closes the session. Idempotent. A running job is cancelled and its
    /// failed turn recorded before the session is sealed.
    pub async fn close_session(&self, session_id: &str) -> Result<Session, SessionError> {
        let handle = self.handle(session_id)?;
        loop {
            let notified = handle.changed.notified();
            tokio::pin!(notified);
            notified.as_mut().enable();
            {
                let mut live = handle.lock();
                if live.session.state == SessionState::Closed {
                    return Ok(live.session.clone());
                }
                match live.job.clone() {
                    Some(job_id) => {
                        live.closing = true;
                        let _ = self.jobs.cancel(&job_id);
                    }
                    None => {
                        live.session.state = SessionState::Closed;
                        self.persist(&live.session, Record::Closed);
                        handle.hub.close();
                        tracing::info!(session_id, turns = live.session.turns.len(), "session closed");
                        let snapshot = live.session.clone();
                        drop(live);
                        handle.changed.notify_waiters();
                        return Ok(snapshot);
                    }
                }
            }
            notified.await;
        }
    }

    /// Cancels one of this session's jobs. Finished jobs acknowledge
    /// without effect.
    pub fn cancel_job(&self, session_id: &str, job_id: &str) -> Result<CancelAck, SessionError> {
        let handle = self.handle(session_id)?;
        {
            let live = handle.lock();
            let known = live.job.as_deref() == Some(job_id)
                || live.session.turns.iter().any(|t| t.job_id == job_id);
            if !known {
                return Err(SessionError::UnknownJob(job_id.to_string()));
            }
        }
        self.jobs
            .cancel(job_id)
            .map_err(|e| SessionError::UnknownJob(e.0))
    }

    /// Frames after sequence number `after` plus a live feed.
    pub fn subscribe(&self, session_id: &str, after: u64) -> Result<Subscription, SessionError> {
        Ok(self.handle(session_id)?.hub.subscribe(after))
    }

    pub fn frames(&self, session_id: &str) -> Result<Vec<EventFrame>, SessionError> {
        Ok(self.handle(session_id)?.hub.frames())
    }
}

struct OwnedContext {
    persona_id: String,
    prompt: Arc<PromptBundle>,
    voice: VoiceModelRef,
    voice_params: VoiceParams,
    base: BaseVideo,
    history: Vec<Exchange>,
}

/// Forwards progress events to the hub right away and holds back the
/// terminal one until the turn is committed.
struct HoldTerminal<'a> {
    hub: &'a EventHub,
    turn_index: u32,
    held: Mutex<Option<StageEvent>>,
}

impl EventSink for HoldTerminal<'_> {
    fn emit(&self, event: StageEvent) {
        if event.stage.is_terminal() {
            *self.held.lock().expect("sink lock") = Some(event);
        } else {
            self.hub.publish(self.turn_index, event, None, None);
        }
    }
}
