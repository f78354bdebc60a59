//! HTTP and WebSocket interface. Routes:
//!
//! ```text
//! GET    /api/deployment
//! GET    /api/personas
//! POST   /api/sessions                      {persona_id, voice?}
//! GET    /api/sessions/{id}
//! DELETE /api/sessions/{id}
//! GET    /api/sessions/{id}/transcript
//! POST   /api/sessions/{id}/turns           JSON {text} | multipart `audio`
//! POST   /api/sessions/{id}/jobs/{job}/cancel
//! WS     /api/sessions/{id}/events?after=N
//! GET    /media/clips/{clip_id}?token=<session_id>
//! GET    /media/base/{base_video_id}
//! ```
//!
//! Request and response bodies are described in `docs/wire-protocol.md`.

mod config;
mod error;
mod media;
mod ws;

use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::assets::AssetStore;
use crate::persona::{fixtures, PersonaRegistry, RolePlayInstructions};
use crate::pipeline::{CancelAck, Pipeline, PipelineOptions, TurnInput};
use crate::providers::{AudioBlob, ProviderSet, VoiceParams};
use crate::session::{SessionManager, SessionOptions, SessionStore};

pub use config::{AppConfig, AppConfigError, PersonaSection, PipelineSection, ServerSection, StorageSection};
pub use error::{ApiError, ERROR_CODES};
pub use ws::{WireFrame, CLOSE_UNKNOWN_SESSION};

/// Largest accepted audio upload.
pub const MAX_AUDIO_BYTES: usize = 2 * 1024 * 1024;
/// Longest accepted audio upload.
pub const MAX_AUDIO_MS: u64 = 60_000;
/// Room for multipart framing and a transcript field on top of the audio.
const BODY_LIMIT: usize = MAX_AUDIO_BYTES + 64 * 1024;

/// Header carrying the session token for media requests; the `token` query
/// parameter works too.
pub const TOKEN_HEADER: &str = "x-session-token";

#[derive(Clone)]
pub struct AppState {
    pub sessions: Arc<SessionManager>,
    pub assets: Arc<AssetStore>,
}

#[derive(Debug, thiserror::Error)]
pub enum BootstrapError {
    #[error(transparent)]
    Config(#[from] AppConfigError),
    #[error("asset store: {0}")]
    Assets(#[from] crate::assets::AssetError),
    #[error("personas: {0}")]
    Personas(#[from] crate::persona::PersonaError),
    #[error("session store: {0}")]
    Sessions(#[from] crate::session::StoreError),
    #[error("providers: {0}")]
    Providers(#[from] crate::providers::ConfigError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Builds the shared state from configuration: asset store, personas,
/// providers, pipeline and session manager.
pub fn bootstrap(config: &AppConfig) -> Result<AppState, BootstrapError> {
    config.validate()?;
    let assets = Arc::new(AssetStore::open_with_budget(
        &config.storage.assets_root,
        config.storage.clip_budget_bytes,
    )?);
    let personas = match &config.personas.dir {
        Some(dir) => PersonaRegistry::load_dir(dir)?,
        None => PersonaRegistry::with_profiles(fixtures::all()),
    };
    let instructions = match &config.personas.instructions {
        Some(path) => RolePlayInstructions::parse(&std::fs::read_to_string(path)?)?,
        None => RolePlayInstructions::default_set(),
    };
    if config.personas.install_placeholders {
        for summary in personas.summaries() {
            if let Some(entry) = personas.get(&summary.id) {
                fixtures::install_placeholder_assets(&assets, &entry.profile)?;
            }
        }
    }
    let providers = ProviderSet::from_config(&config.providers)?;
    let pipeline = Pipeline::with_options(
        providers,
        assets.clone(),
        PipelineOptions {
            cache_enabled: config.pipeline.cache_enabled,
        },
    );
    let store = SessionStore::open(&config.storage.sessions_dir)?;
    if let Some(days) = config.storage.retention_days {
        let cutoff = crate::session::unix_ms_now().saturating_sub(u64::from(days) * 86_400_000);
        let pruned = store.prune_closed_before(cutoff)?;
        tracing::info!(pruned, days, "applied session retention");
    }
    let sessions = SessionManager::new(
        Arc::new(personas),
        instructions,
        pipeline,
        Some(store),
        SessionOptions {
            dialogue: config.pipeline.dialogue,
        },
    );
    Ok(AppState { sessions, assets })
}

fn cors(origins: &[String]) -> CorsLayer {
    let list: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
    CorsLayer::new()
        .allow_origin(AllowOrigin::list(list))
        .allow_methods([
            axum::http::Method::GET,
            axum::http::Method::POST,
            axum::http::Method::DELETE,
        ])
        .allow_headers([header::CONTENT_TYPE, header::RANGE, header::HeaderName::from_static(TOKEN_HEADER)])
}

pub fn router(state: AppState, server: &ServerSection) -> Router {
    let api = Router::new()
        .route("/api/deployment", get(deployment))
        .route("/api/personas", get(list_personas))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session).delete(close_session))
        .route("/api/sessions/{id}/transcript", get(get_transcript))
        .route("/api/sessions/{id}/turns", post(submit_turn))
        .route("/api/sessions/{id}/jobs/{job_id}/cancel", post(cancel_job))
        .route("/api/sessions/{id}/events", get(ws::events))
        .route("/media/clips/{clip_id}", get(media::clip))
        .route("/media/base/{base_video_id}", get(media::base_video))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state);
    let app = match &server.static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::not_found("no such route") }),
    };
    app.layer(cors(&server.cors_origins))
}

/// Runs the server until `shutdown` resolves.
pub async fn serve(config: AppConfig, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), BootstrapError> {
    let state = bootstrap(&config)?;
    let app = router(state, &config.server);
    let listener = tokio::net::TcpListener::bind(&config.server.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "gateway listening");
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    Ok(())
}

async fn deployment(State(st): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({
        "text_only": st.sessions.text_only(),
        "max_audio_ms": MAX_AUDIO_MS,
        "max_audio_bytes": MAX_AUDIO_BYTES,
        "version": env!("CARGO_PKG_VERSION"),
    }))
}

async fn list_personas(State(st): State<AppState>) -> Response {
    Json(st.sessions.personas().summaries()).into_response()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    persona_id: String,
    #[serde(default)]
    voice: Option<VoiceParams>,
}

fn session_urls(session_id: &str, base_video_id: &str) -> serde_json::Value {
    json!({
        "idle_video_url": format!("/media/base/{base_video_id}"),
        "events_url": format!("/api/sessions/{session_id}/events"),
        "transcript_url": format!("/api/sessions/{session_id}/transcript"),
    })
}

fn json_body<T: serde::de::DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

async fn create_session(State(st): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = json_body(&body)?;
    let session = st.sessions.create_session_with(&req.persona_id, req.voice)?;
    let base = st.sessions.base_video(&session.session_id)?;
    let mut out = serde_json::to_value(&session).map_err(|_| ApiError::internal())?;
    merge(&mut out, session_urls(&session.session_id, &base.base_video_id));
    out["text_only"] = json!(st.sessions.text_only());
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

fn merge(into: &mut serde_json::Value, from: serde_json::Value) {
    if let (Some(a), serde_json::Value::Object(b)) = (into.as_object_mut(), from) {
        a.extend(b);
    }
}

async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = st.sessions.get_session(&id)?;
    let mut out = serde_json::to_value(&session).map_err(|_| ApiError::internal())?;
    if let Ok(base) = st.sessions.base_video(&id) {
        merge(&mut out, session_urls(&id, &base.base_video_id));
    }
    Ok(Json(out).into_response())
}

async fn close_session(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(st.sessions.close_session(&id).await?).into_response())
}

async fn get_transcript(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let turns = st.sessions.get_transcript(&id)?;
    Ok(Json(json!({ "session_id": id, "turns": turns })).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TextTurn {
    text: String,
}

async fn submit_turn(
    State(st): State<AppState>,
    Path(id): Path<String>,
    req: Request,
) -> Result<Response, ApiError> {
    let content_type = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
        .to_ascii_lowercase();
    let input = if content_type.starts_with("application/json") {
        let body = axum::body::to_bytes(req.into_body(), BODY_LIMIT)
            .await
            .map_err(|_| ApiError::too_large("request body too large"))?;
        let turn: TextTurn = json_body(&body)?;
        TurnInput::Text(turn.text)
    } else if content_type.starts_with("multipart/form-data") {
        // refuse audio before reading it when speech input is off
        st.sessions.get_session(&id)?;
        if st.sessions.text_only() {
            return Err(crate::session::SessionError::ProviderDisabled.into());
        }
        let multipart = Multipart::from_request(req, &())
            .await
            .map_err(|e| ApiError::bad_request(format!("invalid multipart body: {e}")))?;
        TurnInput::Audio(read_audio(multipart).await?)
    } else {
        return Err(ApiError::unsupported(
            "send application/json {\"text\"} or multipart/form-data with an `audio` field",
        ));
    };
    let turn_index = st.sessions.get_session(&id)?.turns.len();
    let job_id = st.sessions.submit_turn(&id, input)?;
    Ok((
        StatusCode::ACCEPTED,
        Json(json!({ "job_id": job_id, "turn_index": turn_index })),
    )
        .into_response())
}

async fn read_audio(mut multipart: Multipart) -> Result<AudioBlob, ApiError> {
    let mut audio: Option<Bytes> = None;
    let mut transcript: Option<String> = None;
    loop {
        let field = match multipart.next_field().await {
            Ok(Some(f)) => f,
            Ok(None) => break,
            Err(e) if e.status() == StatusCode::PAYLOAD_TOO_LARGE => {
                return Err(ApiError::too_large("audio larger than 2 MiB"))
            }
            Err(e) => return Err(ApiError::bad_request(format!("invalid multipart body: {e}"))),
        };
        match field.name() {
            Some("audio") => {
                let bytes = field.bytes().await.map_err(|e| {
                    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
                        ApiError::too_large("audio larger than 2 MiB")
                    } else {
                        ApiError::bad_request(format!("invalid audio field: {e}"))
                    }
                })?;
                audio = Some(bytes);
            }
            Some("transcript") => {
                transcript = Some(
                    field
                        .text()
                        .await
                        .map_err(|e| ApiError::bad_request(format!("invalid transcript field: {e}")))?,
                );
            }
            _ => {}
        }
    }
    let bytes = audio.ok_or_else(|| ApiError::bad_request("multipart body needs an `audio` field"))?;
    if bytes.len() > MAX_AUDIO_BYTES {
        return Err(ApiError::too_large("audio larger than 2 MiB"));
    }
    let blob = AudioBlob::from_wav(bytes.to_vec()).map_err(|e| ApiError::unsupported(e.to_string()))?;
    if blob.duration_ms() > MAX_AUDIO_MS {
        return Err(ApiError::too_large("audio longer than 60 s"));
    }
    Ok(match transcript {
        Some(t) => blob.with_transcript(t),
        None => blob,
    })
}

async fn cancel_job(
    State(st): State<AppState>,
    Path((id, job_id)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let ack = st.sessions.cancel_job(&id, &job_id)?;
    let state = match ack {
        CancelAck::Cancelled => "cancelled",
        CancelAck::AlreadyFinished => "already_finished",
    };
    Ok(Json(json!({ "job_id": job_id, "acknowledged": true, "state": state })).into_response())
}
