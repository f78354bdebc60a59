#![allow(dead_code)]

use std::net::SocketAddr;

use synthpatient::gateway::{self, AppConfig, AppState};
use synthpatient::providers::{DelayRange, ProviderConfig, ProviderKind};

pub struct Server {
    pub base: String,
    pub addr: SocketAddr,
    pub state: AppState,
    pub dir: tempfile::TempDir,
    pub http: reqwest::Client,
}

impl Server {
    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    pub fn ws_url(&self, path: &str) -> String {
        format!("ws://{}{}", self.addr, path)
    }

    pub async fn create_session(&self, persona_id: &str) -> String {
        let r = self
            .http
            .post(self.url("/api/sessions"))
            .json(&serde_json::json!({ "persona_id": persona_id }))
            .send()
            .await
            .unwrap();
        assert_eq!(r.status(), 201);
        let v: serde_json::Value = r.json().await.unwrap();
        v["session_id"].as_str().unwrap().to_string()
    }

    pub async fn text_turn(&self, session_id: &str, text: &str) -> reqwest::Response {
        self.http
            .post(self.url(&format!("/api/sessions/{session_id}/turns")))
            .json(&serde_json::json!({ "text": text }))
            .send()
            .await
            .unwrap()
    }

    /// Submits a text turn and waits for it to be committed.
    pub async fn complete_turn(&self, session_id: &str, text: &str) -> serde_json::Value {
        let r = self.text_turn(session_id, text).await;
        assert_eq!(r.status(), 202);
        let v: serde_json::Value = r.json().await.unwrap();
        let job = v["job_id"].as_str().unwrap();
        let turn = self.state.sessions.wait_for_turn(session_id, job).await.unwrap();
        serde_json::to_value(turn).unwrap()
    }
}

pub fn offline_config(dir: &std::path::Path) -> AppConfig {
    let mut c = AppConfig::default();
    c.server.bind = "127.0.0.1:0".into();
    c.storage.assets_root = dir.join("store");
    c.storage.sessions_dir = dir.join("sessions");
    c
}

pub fn slow_render(config: &mut AppConfig, lo: u64, hi: u64) {
    config.providers.lipsync = ProviderConfig::simulated(ProviderKind::Lipsync, DelayRange { lo, hi });
}

pub async fn start(configure: impl FnOnce(&mut AppConfig)) -> Server {
    let dir = tempfile::tempdir().unwrap();
    let mut config = offline_config(dir.path());
    configure(&mut config);
    let state = gateway::bootstrap(&config).unwrap();
    let app = gateway::router(state.clone(), &config.server);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    Server {
        base: format!("http://{addr}"),
        addr,
        state,
        dir,
        http: reqwest::Client::new(),
    }
}

/// Every error body must carry a documented code.
pub async fn error_code(r: reqwest::Response) -> (u16, String) {
    let status = r.status().as_u16();
    let v: serde_json::Value = r.json().await.unwrap();
    let code = v["error"]["code"].as_str().unwrap().to_string();
    assert!(gateway::ERROR_CODES.contains(&code.as_str()), "undocumented code {code}");
    assert!(v["error"]["message"].is_string());
    (status, code)
}

pub fn wav_bytes(ms: u64) -> Vec<u8> {
    use synthpatient::providers::{sine_tone, AudioBlob};
    AudioBlob::from_samples(&sine_tone(ms)).into_bytes()
}
