//! Event stream. Each text message is one JSON [`WireFrame`]. Clients that
//! reconnect pass `?after=<last seq seen>` and receive every later frame, in
//! order and without gaps, before live frames resume. The server closes with
//! code 1000 once the session is closed and all frames are delivered, and
//! with [`CLOSE_UNKNOWN_SESSION`] if the session does not exist.

use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::response::Response;
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast::error::RecvError;

use super::AppState;
use crate::session::{EventFrame, SessionManager};

pub const CLOSE_UNKNOWN_SESSION: u16 = 4404;

/// An event frame as sent on the wire, with the clip URL spelled out on
/// `ready` frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireFrame {
    #[serde(flatten)]
    pub frame: EventFrame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_url: Option<String>,
}

impl WireFrame {
    fn new(frame: EventFrame) -> Self {
        let clip_url = frame
            .clip_id
            .as_ref()
            .map(|c| format!("/media/clips/{c}?token={}", frame.session_id));
        Self { frame, clip_url }
    }
}

#[derive(Deserialize)]
pub(super) struct Resume {
    #[serde(default)]
    after: u64,
}

pub(super) async fn events(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(resume): Query<Resume>,
    upgrade: WebSocketUpgrade,
) -> Response {
    upgrade.on_upgrade(move |socket| stream(socket, st.sessions, id, resume.after))
}

async fn close(mut socket: WebSocket, code: u16, reason: &'static str) {
    let _ = socket
        .send(Message::Close(Some(CloseFrame {
            code,
            reason: reason.into(),
        })))
        .await;
}

async fn send(socket: &mut WebSocket, frame: EventFrame) -> bool {
    let text = serde_json::to_string(&WireFrame::new(frame)).expect("frame serializes");
    socket.send(Message::Text(text.into())).await.is_ok()
}

async fn stream(mut socket: WebSocket, sessions: std::sync::Arc<SessionManager>, id: String, after: u64) {
    let mut last = after;
    loop {
        let sub = match sessions.subscribe(&id, last) {
            Ok(s) => s,
            Err(_) => return close(socket, CLOSE_UNKNOWN_SESSION, "unknown_session").await,
        };
        for frame in sub.backlog {
            last = frame.seq;
            if !send(&mut socket, frame).await {
                return;
            }
        }
        let Some(mut live) = sub.live else {
            return close(socket, 1000, "session_closed").await;
        };
        loop {
            tokio::select! {
                msg = live.recv() => match msg {
                    Ok(frame) if frame.seq <= last => {}
                    Ok(frame) => {
                        last = frame.seq;
                        if !send(&mut socket, frame).await {
                            return;
                        }
                    }
                    // fell behind the live feed: resubscribe from the buffer
                    Err(RecvError::Lagged(_)) => break,
                    Err(RecvError::Closed) => break,
                },
                incoming = socket.recv() => match incoming {
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                    Some(Ok(_)) => {}
                },
            }
        }
    }
}
