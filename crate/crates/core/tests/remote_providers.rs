//! HTTP bindings against a scripted local vendor.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde_json::{json, Value};
use synthpatient::assets::{BaseVideo, VoiceModelRef};
use synthpatient::persona::{assemble_prompt, fixtures, RolePlayInstructions};
use synthpatient::providers::*;

#[derive(Clone)]
struct Reply {
    status: u16,
    body: Value,
    delay_ms: u64,
}

fn ok(body: Value) -> Reply {
    Reply { status: 200, body, delay_ms: 0 }
}

fn status(code: u16, body: Value) -> Reply {
    Reply { status: code, body, delay_ms: 0 }
}

#[derive(Default)]
struct Script {
    replies: Mutex<VecDeque<Reply>>,
    seen: Mutex<Vec<(Option<String>, Value)>>,
}

async fn vendor(State(s): State<Arc<Script>>, headers: HeaderMap, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    let auth = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .map(str::to_string);
    s.seen.lock().unwrap().push((auth, body));
    let reply = s.replies.lock().unwrap().pop_front().expect("unscripted call");
    if reply.delay_ms > 0 {
        tokio::time::sleep(Duration::from_millis(reply.delay_ms)).await;
    }
    (StatusCode::from_u16(reply.status).unwrap(), Json(reply.body))
}

async fn mock(replies: Vec<Reply>) -> (String, Arc<Script>) {
    let script = Arc::new(Script {
        replies: Mutex::new(replies.into()),
        seen: Mutex::default(),
    });
    let app = Router::new().route("/", post(vendor)).with_state(script.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (url, script)
}

fn set(kind: ProviderKind, url: &str, env: &str, tweak: impl FnOnce(&mut ProviderConfig)) -> ProviderSet {
    let mut cfg = ProvidersConfig::default();
    let mut c = ProviderConfig::remote(kind, url, env);
    tweak(&mut c);
    match kind {
        ProviderKind::Transcriber => cfg.transcriber = c,
        ProviderKind::Dialogue => cfg.dialogue = c,
        ProviderKind::Synthesizer => cfg.synthesizer = c,
        ProviderKind::Lipsync => cfg.lipsync = c,
    }
    ProviderSet::from_config(&cfg).unwrap()
}

const SECRET: &str = "sk-test-SENTINEL-9f8e7d";

fn voice() -> VoiceModelRef {
    VoiceModelRef {
        voice_id: "maria-voice-v1".into(),
        handle: "vendor-voice-123".into(),
        defaults: VoiceParams::default(),
    }
}

fn base() -> BaseVideo {
    BaseVideo {
        base_video_id: "maria-base-01".into(),
        checksum: "ab".repeat(32),
        duration_ms: 2000,
        loopable: true,
        container: "mp4".into(),
        size: 10,
    }
}

#[tokio::test]
async fn transcriber_sends_bearer_and_base64() {
    std::env::set_var("SP_TEST_STT_KEY", SECRET);
    let (url, script) = mock(vec![ok(json!({ "text": "  I feel tired.  " }))]).await;
    let p = set(ProviderKind::Transcriber, &url, "SP_TEST_STT_KEY", |_| {});
    let audio = AudioBlob::from_samples(&sine_tone(100));
    assert_eq!(p.transcriber.transcribe(&audio).await.unwrap(), "I feel tired.");
    let seen = script.seen.lock().unwrap();
    assert_eq!(seen[0].0.as_deref(), Some(format!("Bearer {SECRET}").as_str()));
    assert_eq!(seen[0].1["format"], "wav_pcm16_mono_16k");
    assert_eq!(B64.decode(seen[0].1["audio_base64"].as_str().unwrap()).unwrap(), audio.bytes());
}

#[tokio::test]
async fn missing_credential_is_auth_error_without_request() {
    let (url, script) = mock(vec![]).await;
    let p = set(ProviderKind::Transcriber, &url, "SP_TEST_NEVER_SET", |_| {});
    let err = p.transcriber.transcribe(&AudioBlob::from_samples(&sine_tone(50))).await.unwrap_err();
    assert_eq!(err, ProviderError::Auth);
    assert!(script.seen.lock().unwrap().is_empty());
}

#[tokio::test]
async fn status_mapping() {
    std::env::set_var("SP_TEST_MAP_KEY", SECRET);
    let cases = [
        (status(401, json!({})), "provider_auth"),
        (status(422, json!({ "code": "empty_speech" })), "empty_speech"),
        (status(413, json!({})), "context_overflow"),
        (status(500, json!({ "detail": format!("trace with {SECRET}") })), "provider_error"),
        (ok(json!({ "text": "" })), "empty_speech"),
        (ok(json!({ "nope": 1 })), "provider_bad_response"),
    ];
    for (reply, code) in cases {
        let (url, _) = mock(vec![reply]).await;
        let p = set(ProviderKind::Transcriber, &url, "SP_TEST_MAP_KEY", |c| c.max_retries = 0);
        let err = p.transcriber.transcribe(&AudioBlob::from_samples(&sine_tone(50))).await.unwrap_err();
        assert_eq!(err.code(), code);
        assert!(!err.to_string().contains(SECRET));
        assert!(!format!("{err:?}").contains(SECRET));
    }
}

#[tokio::test]
async fn rate_limit_is_retried_then_succeeds() {
    std::env::set_var("SP_TEST_RETRY_KEY", SECRET);
    let (url, script) = mock(vec![
        status(429, json!({})),
        status(429, json!({})),
        ok(json!({ "text": "finally" })),
    ])
    .await;
    let p = set(ProviderKind::Transcriber, &url, "SP_TEST_RETRY_KEY", |c| c.max_retries = 2);
    let started = Instant::now();
    let text = p.transcriber.transcribe(&AudioBlob::from_samples(&sine_tone(50))).await.unwrap();
    assert_eq!(text, "finally");
    assert_eq!(script.seen.lock().unwrap().len(), 3);
    // backoffs of 500 ms and 1000 ms, each jittered down to at least half
    assert!(started.elapsed() >= Duration::from_millis(750));
}

#[tokio::test]
async fn auth_failure_not_retried() {
    std::env::set_var("SP_TEST_NORETRY_KEY", SECRET);
    let (url, script) = mock(vec![status(403, json!({})), ok(json!({ "text": "x" }))]).await;
    let p = set(ProviderKind::Transcriber, &url, "SP_TEST_NORETRY_KEY", |c| c.max_retries = 3);
    let err = p.transcriber.transcribe(&AudioBlob::from_samples(&sine_tone(50))).await.unwrap_err();
    assert_eq!(err, ProviderError::Auth);
    assert_eq!(script.seen.lock().unwrap().len(), 1);
}

#[tokio::test]
async fn slow_vendor_times_out() {
    std::env::set_var("SP_TEST_SLOW_KEY", SECRET);
    let (url, _) = mock(vec![Reply { status: 200, body: json!({ "text": "late" }), delay_ms: 3_000 }]).await;
    let p = set(ProviderKind::Transcriber, &url, "SP_TEST_SLOW_KEY", |c| {
        c.timeout_ms = 300;
        c.max_retries = 0;
    });
    let started = Instant::now();
    let err = p.transcriber.transcribe(&AudioBlob::from_samples(&sine_tone(50))).await.unwrap_err();
    assert_eq!(err, ProviderError::Timeout);
    assert!(started.elapsed() < Duration::from_millis(1_500));
}

#[tokio::test]
async fn dialogue_replays_history_with_roles() {
    std::env::set_var("SP_TEST_LLM_KEY", SECRET);
    let (url, script) = mock(vec![ok(json!({ "text": "I just want to get stronger." }))]).await;
    let p = set(ProviderKind::Dialogue, &url, "SP_TEST_LLM_KEY", |_| {});
    let prompt = assemble_prompt(&fixtures::maria(), &RolePlayInstructions::default_set()).unwrap();
    let history = [
        HistoryEntry { speaker: Speaker::Learner, text: "Hi Maria.".into() },
        HistoryEntry { speaker: Speaker::Patient, text: "Hello doctor.".into() },
    ];
    let params = DialogueParams::default();
    let reply = p
        .dialogue
        .generate_reply(DialogueRequest {
            prompt: &prompt,
            history: &history,
            user_text: "What are your goals?",
            params: &params,
        })
        .await
        .unwrap();
    assert_eq!(reply, "I just want to get stronger.");
    let body = &script.seen.lock().unwrap()[0].1;
    assert_eq!(body["system"], prompt.system_text.as_str());
    assert_eq!(
        body["messages"],
        json!([
            { "role": "user", "content": "Hi Maria." },
            { "role": "assistant", "content": "Hello doctor." },
            { "role": "user", "content": "What are your goals?" },
        ])
    );
    assert_eq!(body["temperature"], 0.8);
    assert_eq!(body["max_tokens"], 300);
}

#[tokio::test]
async fn synthesizer_round_trip_and_unknown_voice() {
    std::env::set_var("SP_TEST_TTS_KEY", SECRET);
    let audio = AudioBlob::from_samples(&sine_tone(750));
    let (url, script) = mock(vec![
        ok(json!({ "audio_base64": B64.encode(audio.bytes()) })),
        status(404, json!({ "code": "unknown_voice" })),
    ])
    .await;
    let p = set(ProviderKind::Synthesizer, &url, "SP_TEST_TTS_KEY", |_| {});
    let params = VoiceParams { stability: 0.4, similarity: 0.9, style: 0.1 };
    let got = p.synthesizer.synthesize("Hello there.", &voice(), &params).await.unwrap();
    assert_eq!(got, audio);
    let body = script.seen.lock().unwrap()[0].1.clone();
    assert_eq!(body["voice"], "vendor-voice-123");
    assert_eq!(body["stability"], 0.4);
    let err = p.synthesizer.synthesize("Hello.", &voice(), &params).await.unwrap_err();
    assert_eq!(err, ProviderError::UnknownVoice("maria-voice-v1".into()));
}

#[tokio::test]
async fn lipsync_checks_duration() {
    std::env::set_var("SP_TEST_LIP_KEY", SECRET);
    let audio = AudioBlob::from_samples(&sine_tone(1_000));
    let clip = B64.encode(b"fake mp4 bytes");
    let (url, script) = mock(vec![
        ok(json!({ "container": "mp4", "clip_base64": clip, "duration_ms": 1_040 })),
        ok(json!({ "container": "mp4", "clip_base64": clip, "duration_ms": 1_500 })),
        status(502, json!({})),
        status(404, json!({ "code": "unknown_base_video" })),
    ])
    .await;
    let p = set(ProviderKind::Lipsync, &url, "SP_TEST_LIP_KEY", |c| c.max_retries = 0);
    let out = p.lipsync.render(&base(), &audio).await.unwrap();
    assert_eq!(out.container, "mp4");
    assert_eq!(out.duration_ms, 1_000);
    assert_eq!(out.manifest, ClipManifest::for_audio("maria-base-01", &audio));
    assert_eq!(script.seen.lock().unwrap()[0].1["base_video_sha256"], "ab".repeat(32));

    assert_eq!(p.lipsync.render(&base(), &audio).await.unwrap_err().code(), "render_failure");
    assert_eq!(p.lipsync.render(&base(), &audio).await.unwrap_err().code(), "render_failure");
    assert_eq!(
        p.lipsync.render(&base(), &audio).await.unwrap_err(),
        ProviderError::UnknownBaseVideo("maria-base-01".into())
    );
}

#[test]
fn serialized_config_holds_no_secret() {
    std::env::set_var("SP_TEST_CFG_KEY", SECRET);
    let c = ProviderConfig::remote(ProviderKind::Dialogue, "https://llm.example/v1", "SP_TEST_CFG_KEY");
    let text = toml::to_string(&c).unwrap();
    assert!(text.contains("SP_TEST_CFG_KEY"));
    assert!(!text.contains(SECRET));
    assert!(!format!("{:?}", ProviderSet::from_config(&ProvidersConfig { dialogue: c, ..Default::default() }).unwrap()).contains(SECRET));
}
