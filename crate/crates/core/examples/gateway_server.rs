//! Start the HTTP gateway with offline providers, hold one conversation over
//! HTTP and shut down.
//!
//! ```text
//! cargo run --example gateway_server
//! ```
//!
//! Pass `--stay` to keep the server running on 127.0.0.1:8080 for a browser
//! client.

use std::time::Duration;

use serde_json::{json, Value};
use synthpatient::gateway::{self, AppConfig};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stay = std::env::args().any(|a| a == "--stay");
    let dir = tempfile::tempdir()?;
    let mut config = AppConfig::default();
    config.storage.assets_root = dir.path().join("store");
    config.storage.sessions_dir = dir.path().join("sessions");

    if stay {
        println!("listening on {}", config.server.bind);
        gateway::serve(config, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        return Ok(());
    }

    let state = gateway::bootstrap(&config)?;
    let app = gateway::router(state, &config.server);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    let server = tokio::spawn(async move { axum::serve(listener, app).await });

    let http = reqwest::Client::new();
    let personas: Value = http.get(format!("{base}/api/personas")).send().await?.json().await?;
    println!("personas: {}", personas);

    let session: Value = http
        .post(format!("{base}/api/sessions"))
        .json(&json!({ "persona_id": "maria-gonzalez" }))
        .send()
        .await?
        .json()
        .await?;
    let id = session["session_id"].as_str().unwrap_or_default().to_string();
    println!("session {id}, idle video at {}", session["idle_video_url"]);

    let accepted: Value = http
        .post(format!("{base}/api/sessions/{id}/turns"))
        .json(&json!({ "text": "What has your oncologist told you so far?" }))
        .send()
        .await?
        .json()
        .await?;
    println!("accepted job {}", accepted["job_id"]);

    // poll the transcript; a browser would follow the event socket instead
    for _ in 0..50 {
        let t: Value = http
            .get(format!("{base}/api/sessions/{id}/transcript"))
            .send()
            .await?
            .json()
            .await?;
        if let Some(turn) = t["turns"].get(0) {
            println!("patient: {}", turn["patient_text"]);
            println!("clip:    {}", turn["clip_id"]);
            break;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }

    let closed = http.delete(format!("{base}/api/sessions/{id}")).send().await?;
    println!("closed: {}", closed.status());
    server.abort();
    Ok(())
}
