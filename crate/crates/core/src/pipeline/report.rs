//! Latency summaries over a batch of finished turns.
//!
//! Percentiles use the nearest-rank definition: the p-th percentile of `n`
//! sorted values is the value at 1-based rank `ceil(p/100 · n)`. It always
//! returns an observed value, so a single turn reports p50 = p95 = max.

use serde::{Deserialize, Serialize};

use super::{Stage, TurnResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("latency report needs at least one turn")]
pub struct EmptyInput;

/// Nearest-rank percentile. `p` is clamped to `[0, 100]`; `p = 0` returns the
/// minimum.
pub fn percentile(values: &[f64], p: f64) -> Result<f64, EmptyInput> {
    if values.is_empty() {
        return Err(EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = ((p.clamp(0.0, 100.0) / 100.0) * n as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, n) - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
    pub mean_ms: f64,
}

impl StageStats {
    fn of(values: &[f64]) -> Result<Self, EmptyInput> {
        Ok(Self {
            p50_ms: percentile(values, 50.0)?,
            p95_ms: percentile(values, 95.0)?,
            max_ms: percentile(values, 100.0)?,
            mean_ms: values.iter().sum::<f64>() / values.len() as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub turns: usize,
    pub cache_hits: usize,
    pub transcribe: StageStats,
    pub dialogue: StageStats,
    pub synthesize: StageStats,
    pub render: StageStats,
    pub overhead: StageStats,
    pub total: StageStats,
    /// Sum of render time over sum of total time.
    pub render_share: f64,
    /// The provider stage with the largest mean duration.
    pub dominant_stage: Stage,
}

impl LatencyReport {
    /// Rows of (label, stats) in pipeline order, for tables.
    pub fn rows(&self) -> [(&'static str, &StageStats); 6] {
        [
            ("transcribe", &self.transcribe),
            ("dialogue", &self.dialogue),
            ("synthesize", &self.synthesize),
            ("render", &self.render),
            ("overhead", &self.overhead),
            ("total", &self.total),
        ]
    }
}

pub fn latency_report(results: &[TurnResult]) -> Result<LatencyReport, EmptyInput> {
    if results.is_empty() {
        return Err(EmptyInput);
    }
    let col = |f: fn(&TurnResult) -> f64| results.iter().map(f).collect::<Vec<_>>();
    let transcribe = StageStats::of(&col(|r| r.timings.transcribe_ms))?;
    let dialogue = StageStats::of(&col(|r| r.timings.dialogue_ms))?;
    let synthesize = StageStats::of(&col(|r| r.timings.synthesize_ms))?;
    let render = StageStats::of(&col(|r| r.timings.render_ms))?;
    let overhead = StageStats::of(&col(|r| r.timings.overhead_ms))?;
    let totals = col(|r| r.timings.total_ms);
    let total = StageStats::of(&totals)?;

    let total_sum: f64 = totals.iter().sum();
    let render_sum: f64 = results.iter().map(|r| r.timings.render_ms).sum();
    let render_share = if total_sum > 0.0 { render_sum / total_sum } else { 0.0 };

    // ties go to the later stage
    let dominant_stage = [
        (Stage::Transcribing, transcribe.mean_ms),
        (Stage::Thinking, dialogue.mean_ms),
        (Stage::Synthesizing, synthesize.mean_ms),
        (Stage::Rendering, render.mean_ms),
    ]
    .into_iter()
    .max_by(|a, b| a.1.total_cmp(&b.1))
    .map(|(s, _)| s)
    .expect("four candidates");

    Ok(LatencyReport {
        turns: results.len(),
        cache_hits: results.iter().filter(|r| r.cache_hit).count(),
        transcribe,
        dialogue,
        synthesize,
        render,
        overhead,
        total,
        render_share,
        dominant_stage,
    })
}
