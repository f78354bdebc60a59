use serde::{Deserialize, Serialize};

use crate::pipeline::{FailureCause, StageTimings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Idle,
    Processing,
    Closed,
}

impl SessionState {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionState::Idle => "idle",
            SessionState::Processing => "processing",
            SessionState::Closed => "closed",
        }
    }

    /// The only transitions a session may take.
    pub fn can_become(self, next: SessionState) -> bool {
        use SessionState::*;
        matches!(
            (self, next),
            (Idle, Processing) | (Processing, Idle) | (Idle, Closed) | (Processing, Closed)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TurnStatus {
    Ok,
    Failed { cause: FailureCause },
}

/// One entry of the transcript. Successful turns carry every field; failed
/// ones carry the learner's text (when known) and the cause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub index: u32,
    pub job_id: String,
    pub user_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<StageTimings>,
    #[serde(default)]
    pub cache_hit: bool,
    #[serde(flatten)]
    pub status: TurnStatus,
}

impl Turn {
    pub fn is_ok(&self) -> bool {
        self.status == TurnStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub persona_id: String,
    pub state: SessionState,
    pub turns: Vec<Turn>,
    /// Wall-clock creation time, Unix milliseconds. Display only.
    pub created_at_ms: u64,
    /// Hash of the prompt pinned when the session was created.
    pub prompt_hash: String,
}

pub(crate) fn unix_ms_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turn_serializes_flat_status() {
        let t = Turn {
            index: 0,
            job_id: "j".into(),
            user_text: Some("hi".into()),
            patient_text: None,
            clip_id: None,
            timings: None,
            cache_hit: false,
            status: TurnStatus::Failed {
                cause: FailureCause {
                    code: "cancelled".into(),
                    message: "cancelled".into(),
                },
            },
        };
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["status"], "failed");
        assert_eq!(v["cause"]["code"], "cancelled");
        let back: Turn = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn transitions() {
        use SessionState::*;
        assert!(Idle.can_become(Processing));
        assert!(Processing.can_become(Closed));
        assert!(!Closed.can_become(Idle));
        assert!(!Idle.can_become(Idle));
    }
}
