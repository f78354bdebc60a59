use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use tokio::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Received,
    Transcribing,
    Thinking,
    Synthesizing,
    Rendering,
    Ready,
    Failed,
}

impl Stage {
    pub fn is_terminal(self) -> bool {
        matches!(self, Stage::Ready | Stage::Failed)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Received => "received",
            Stage::Transcribing => "transcribing",
            Stage::Thinking => "thinking",
            Stage::Synthesizing => "synthesizing",
            Stage::Rendering => "rendering",
            Stage::Ready => "ready",
            Stage::Failed => "failed",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Milliseconds on the monotonic clock since the first call in this
/// process. Only meaningful for ordering and differences.
pub fn monotonic_ms() -> f64 {
    static ORIGIN: OnceLock<std::time::Instant> = OnceLock::new();
    let origin = *ORIGIN.get_or_init(std::time::Instant::now);
    let now: std::time::Instant = Instant::now().into_std();
    now.saturating_duration_since(origin).as_secs_f64() * 1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEvent {
    pub job_id: String,
    pub stage: Stage,
    /// Monotonic timestamp, see [`monotonic_ms`].
    pub at_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

pub trait EventSink: Send + Sync {
    fn emit(&self, event: StageEvent);
}

impl<F: Fn(StageEvent) + Send + Sync> EventSink for F {
    fn emit(&self, event: StageEvent) {
        self(event)
    }
}

/// Collects events in memory.
#[derive(Debug, Default)]
pub struct EventLog(Mutex<Vec<StageEvent>>);

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> Vec<StageEvent> {
        self.0.lock().expect("event log lock").clone()
    }

    pub fn stages(&self) -> Vec<Stage> {
        self.events().iter().map(|e| e.stage).collect()
    }
}

impl EventSink for EventLog {
    fn emit(&self, event: StageEvent) {
        self.0.lock().expect("event log lock").push(event);
    }
}

/// True when `stages` is a legal event sequence for one job: the canonical
/// order with transcribing optional, at most one terminal event and nothing
/// after it. A `failed` event may cut the sequence short.
pub fn is_canonical_order(stages: &[Stage]) -> bool {
    const ORDER: [Stage; 6] = [
        Stage::Received,
        Stage::Transcribing,
        Stage::Thinking,
        Stage::Synthesizing,
        Stage::Rendering,
        Stage::Ready,
    ];
    let Some((last, body)) = stages.split_last() else {
        return true;
    };
    let (body, tail_failed) = if *last == Stage::Failed {
        (body, true)
    } else {
        (stages, false)
    };
    let mut pos = 0;
    for (i, s) in body.iter().enumerate() {
        let Some(found) = ORDER[pos..].iter().position(|o| o == s) else {
            return false;
        };
        let idx = pos + found;
        // only transcribing may be skipped
        if ORDER[pos..idx].iter().any(|o| *o != Stage::Transcribing) {
            return false;
        }
        if i == 0 && *s != Stage::Received {
            return false;
        }
        pos = idx + 1;
    }
    if tail_failed {
        return !body.contains(&Stage::Ready);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::Stage::*;
    use super::*;

    #[test]
    fn canonical_orders() {
        assert!(is_canonical_order(&[Received, Thinking, Synthesizing, Rendering, Ready]));
        assert!(is_canonical_order(&[Received, Transcribing, Thinking, Synthesizing, Rendering, Ready]));
        assert!(is_canonical_order(&[Received, Thinking, Failed]));
        assert!(is_canonical_order(&[Received, Failed]));
        assert!(!is_canonical_order(&[Received, Synthesizing, Thinking, Rendering, Ready]));
        assert!(!is_canonical_order(&[Received, Thinking, Rendering, Ready]));
        assert!(!is_canonical_order(&[Received, Thinking, Synthesizing, Rendering, Ready, Failed]));
        assert!(!is_canonical_order(&[Thinking, Synthesizing, Rendering, Ready]));
        assert!(!is_canonical_order(&[Received, Received]));
    }

    #[test]
    fn monotonic_never_decreases() {
        let a = monotonic_ms();
        let b = monotonic_ms();
        assert!(b >= a);
    }
}
