use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use crate::pipeline::{FailureCause, Stage, StageEvent};

/// A stage event as published to observers of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventFrame {
    pub session_id: String,
    /// Strictly increasing per session, starting at 1.
    pub seq: u64,
    pub job_id: String,
    pub turn_index: u32,
    pub stage: Stage,
    pub at_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Set on `ready`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_id: Option<String>,
    /// Set on `failed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<FailureCause>,
}

/// Frames already published, plus a live feed of later ones.
pub struct Subscription {
    pub backlog: Vec<EventFrame>,
    /// `None` once the session is closed and no more frames can arrive.
    pub live: Option<broadcast::Receiver<EventFrame>>,
}

struct HubState {
    frames: Vec<EventFrame>,
    tx: Option<broadcast::Sender<EventFrame>>,
}

/// Per-session fan-out with a replay buffer so observers can resume from a
/// sequence number after reconnecting.
pub(crate) struct EventHub {
    session_id: String,
    state: Mutex<HubState>,
}

const LIVE_CAPACITY: usize = 256;

impl EventHub {
    pub fn new(session_id: &str) -> Self {
        let (tx, _) = broadcast::channel(LIVE_CAPACITY);
        Self {
            session_id: session_id.to_string(),
            state: Mutex::new(HubState {
                frames: Vec::new(),
                tx: Some(tx),
            }),
        }
    }

    pub fn publish(&self, turn_index: u32, event: StageEvent, clip_id: Option<String>, cause: Option<FailureCause>) {
        let mut st = self.state.lock().expect("hub lock");
        let frame = EventFrame {
            session_id: self.session_id.clone(),
            seq: st.frames.len() as u64 + 1,
            job_id: event.job_id,
            turn_index,
            stage: event.stage,
            at_ms: event.at_ms,
            detail: event.detail,
            clip_id,
            cause,
        };
        st.frames.push(frame.clone());
        if let Some(tx) = &st.tx {
            // no receivers is fine
            let _ = tx.send(frame);
        }
    }

    /// Frames with `seq > after`, and a receiver for everything newer.
    /// Taken under one lock so nothing falls between backlog and live feed.
    pub fn subscribe(&self, after: u64) -> Subscription {
        let st = self.state.lock().expect("hub lock");
        let skip = (after as usize).min(st.frames.len());
        Subscription {
            backlog: st.frames[skip..].to_vec(),
            live: st.tx.as_ref().map(|tx| tx.subscribe()),
        }
    }

    pub fn frames(&self) -> Vec<EventFrame> {
        self.state.lock().expect("hub lock").frames.clone()
    }

    /// Ends every live feed.
    pub fn close(&self) {
        self.state.lock().expect("hub lock").tx = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(stage: Stage) -> StageEvent {
        StageEvent {
            job_id: "j".into(),
            stage,
            at_ms: 0.0,
            detail: None,
        }
    }

    #[tokio::test]
    async fn resume_replays_after_cursor_then_goes_live() {
        let hub = EventHub::new("s");
        hub.publish(0, ev(Stage::Received), None, None);
        hub.publish(0, ev(Stage::Thinking), None, None);
        let mut sub = hub.subscribe(1);
        assert_eq!(sub.backlog.len(), 1);
        assert_eq!(sub.backlog[0].seq, 2);
        hub.publish(0, ev(Stage::Synthesizing), None, None);
        let live = sub.live.as_mut().unwrap().recv().await.unwrap();
        assert_eq!((live.seq, live.stage), (3, Stage::Synthesizing));

        hub.close();
        assert!(sub.live.unwrap().recv().await.is_err());
        let after_close = hub.subscribe(0);
        assert_eq!(after_close.backlog.len(), 3);
        assert!(after_close.live.is_none());
        assert_eq!(hub.subscribe(99).backlog.len(), 0);
    }
}
