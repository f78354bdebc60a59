use std::sync::Arc;
use std::time::Duration;

use super::*;
use crate::assets::AssetStore;
use crate::persona::{assemble_prompt, fixtures, RolePlayInstructions};
use crate::providers::{
    sine_tone, DelayRange, OfflineLipSync, ProviderConfig, ProviderKind, Simulated,
};
use Stage::*;

struct Fixture {
    _dir: tempfile::TempDir,
    assets: Arc<AssetStore>,
    prompt: PromptBundle,
    voice: VoiceModelRef,
    base: BaseVideo,
    params: DialogueParams,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let assets = Arc::new(AssetStore::open(dir.path()).unwrap());
        let maria = fixtures::maria();
        fixtures::install_placeholder_assets(&assets, &maria).unwrap();
        Self {
            prompt: assemble_prompt(&maria, &RolePlayInstructions::default_set()).unwrap(),
            voice: assets.voice(&maria.voice_id).unwrap(),
            base: assets.base_video(&maria.base_video_id).unwrap(),
            assets,
            _dir: dir,
            params: DialogueParams::default(),
        }
    }

    fn ctx<'a>(&'a self, history: &'a [Exchange], voice_params: VoiceParams) -> TurnContext<'a> {
        TurnContext {
            persona_id: "maria-gonzalez",
            prompt: &self.prompt,
            voice: &self.voice,
            voice_params,
            base_video: &self.base,
            history,
            params: &self.params,
        }
    }

    fn pipeline(&self, providers: ProviderSet) -> Pipeline {
        Pipeline::new(providers, self.assets.clone())
    }
}

fn text_job(id: &str, text: &str) -> PipelineJob {
    PipelineJob::new(id, "s1", 0, TurnInput::Text(text.into()))
}

async fn run(
    p: &Pipeline,
    job: &PipelineJob,
    ctx: &TurnContext<'_>,
) -> (Result<TurnResult, TurnFailure>, Vec<StageEvent>) {
    let log = EventLog::new();
    let r = p.run_turn(job, ctx, &log, &CancellationToken::new()).await;
    (r, log.events())
}

#[tokio::test]
async fn text_turn_skips_transcribing() {
    let f = Fixture::new();
    let p = f.pipeline(ProviderSet::offline());
    let (r, events) = run(&p, &text_job("j1", "How are you feeling?"), &f.ctx(&[], VoiceParams::default())).await;
    let r = r.unwrap();
    let stages: Vec<_> = events.iter().map(|e| e.stage).collect();
    assert_eq!(stages, [Received, Thinking, Synthesizing, Rendering, Ready]);
    assert!(events.windows(2).all(|w| w[0].at_ms <= w[1].at_ms));
    assert_eq!(events.last().unwrap().detail.as_deref(), Some(r.clip_id.as_str()));
    assert!(r.patient_text.starts_with("As Maria Gonzalez:"));
    assert!(!r.cache_hit);
    assert!(f.assets.clip(&r.clip_id).is_ok());
    let t = r.timings;
    assert!(t.total_ms >= t.stage_sum_ms());
    assert!(t.overhead_ms >= 0.0);
}

#[tokio::test]
async fn audio_turn_transcribes_first() {
    let f = Fixture::new();
    let p = f.pipeline(ProviderSet::offline());
    let audio = AudioBlob::from_samples(&sine_tone(500)).with_transcript("Do you have any pain?");
    let job = PipelineJob::new("j1", "s1", 0, TurnInput::Audio(audio));
    let (r, events) = run(&p, &job, &f.ctx(&[], VoiceParams::default())).await;
    let stages: Vec<_> = events.iter().map(|e| e.stage).collect();
    assert_eq!(stages, [Received, Transcribing, Thinking, Synthesizing, Rendering, Ready]);
    assert_eq!(r.unwrap().user_text, "Do you have any pain?");
}

#[tokio::test]
async fn repeated_reply_served_from_cache() {
    let f = Fixture::new();
    let p = f.pipeline(ProviderSet::offline());
    let ctx = f.ctx(&[], VoiceParams::default());
    let (first, _) = run(&p, &text_job("j1", "What worries you most?"), &ctx).await;
    let first = first.unwrap();
    assert_eq!(
        p.check_cache("maria-gonzalez", &first.patient_text, VoiceParams::default()),
        Some(first.clip_id.clone())
    );

    let (second, events) = run(&p, &text_job("j2", "What worries you most?"), &ctx).await;
    let second = second.unwrap();
    assert!(second.cache_hit);
    assert_eq!(second.clip_id, first.clip_id);
    assert_eq!(second.timings.render_ms, 0.0);
    assert_eq!(second.timings.synthesize_ms, 0.0);
    assert!(second.timings.render_skipped && second.timings.synthesize_skipped);
    let rendering = events.iter().find(|e| e.stage == Rendering).unwrap();
    assert_eq!(rendering.detail.as_deref(), Some(CACHE_DETAIL));

    // any voice component change is a different key
    for changed in [
        VoiceParams { stability: 0.6, ..Default::default() },
        VoiceParams { similarity: 0.7, ..Default::default() },
        VoiceParams { style: 0.1, ..Default::default() },
    ] {
        let (r, _) = run(&p, &text_job("j3", "What worries you most?"), &f.ctx(&[], changed)).await;
        assert!(!r.unwrap().cache_hit, "{changed:?}");
    }
}

#[tokio::test]
async fn cache_can_be_disabled() {
    let f = Fixture::new();
    let p = Pipeline::with_options(
        ProviderSet::offline(),
        f.assets.clone(),
        PipelineOptions { cache_enabled: false },
    );
    let ctx = f.ctx(&[], VoiceParams::default());
    let (a, _) = run(&p, &text_job("a", "Same words"), &ctx).await;
    let (b, _) = run(&p, &text_job("b", "Same words"), &ctx).await;
    let (a, b) = (a.unwrap(), b.unwrap());
    assert!(!b.cache_hit);
    assert_eq!(a.clip_id, b.clip_id);
}

#[tokio::test]
async fn blank_text_fails_without_stages() {
    let f = Fixture::new();
    let p = f.pipeline(ProviderSet::offline());
    let (r, events) = run(&p, &text_job("j", "   "), &f.ctx(&[], VoiceParams::default())).await;
    assert_eq!(r.unwrap_err().cause.code, "invalid_input");
    let stages: Vec<_> = events.iter().map(|e| e.stage).collect();
    assert_eq!(stages, [Received, Failed]);
}

#[tokio::test]
async fn silent_audio_fails_with_empty_speech() {
    let f = Fixture::new();
    let p = f.pipeline(ProviderSet::offline());
    let audio = AudioBlob::from_samples(&sine_tone(200)).with_transcript("  ");
    let job = PipelineJob::new("j", "s1", 0, TurnInput::Audio(audio));
    let (r, events) = run(&p, &job, &f.ctx(&[], VoiceParams::default())).await;
    assert_eq!(r.unwrap_err().cause.code, "empty_speech");
    assert_eq!(events.last().unwrap().stage, Failed);
    assert_eq!(f.assets.clip_bytes_total(), 0);
}

fn slow_render(lo: u64, hi: u64) -> ProviderSet {
    let mut cfg = ProviderConfig::simulated(ProviderKind::Lipsync, DelayRange { lo, hi });
    cfg.seed = Some(7);
    ProviderSet {
        lipsync: Arc::new(Simulated::new(OfflineLipSync, &cfg)),
        ..ProviderSet::offline()
    }
}

#[tokio::test(start_paused = true)]
async fn slow_render_dominates_turn() {
    let f = Fixture::new();
    let p = f.pipeline(slow_render(25_000, 25_000));
    let (r, _) = run(&p, &text_job("j", "Tell me about home."), &f.ctx(&[], VoiceParams::default())).await;
    let t = r.unwrap().timings;
    assert!(t.render_ms >= 25_000.0 && t.render_ms <= 25_050.0, "{t:?}");
    assert!(t.render_ms / t.total_ms >= 0.8);
}

#[tokio::test(start_paused = true)]
async fn cancel_during_rendering_stores_nothing() {
    let f = Fixture::new();
    let p = f.pipeline(slow_render(25_000, 25_000));
    let log = Arc::new(EventLog::new());
    let token = CancellationToken::new();
    let job = text_job("j", "Are you scared?");
    let ctx = f.ctx(&[], VoiceParams::default());

    let canceller = {
        let log = log.clone();
        let token = token.clone();
        async move {
            while !log.stages().contains(&Rendering) {
                tokio::time::sleep(Duration::from_millis(10)).await;
            }
            token.cancel();
        }
    };
    let (r, ()) = tokio::join!(p.run_turn(&job, &ctx, log.as_ref(), &token), canceller);
    let failure = r.unwrap_err();
    assert_eq!(failure.cause.code, "cancelled");
    assert_eq!(failure.user_text.as_deref(), Some("Are you scared?"));
    assert_eq!(log.stages(), [Received, Thinking, Synthesizing, Rendering, Failed]);
    assert_eq!(f.assets.clip_bytes_total(), 0);
}

#[test]
fn history_window_keeps_latest() {
    let ex: Vec<_> = (0..25)
        .map(|i| Exchange {
            user_text: format!("q{i}"),
            patient_text: format!("a{i}"),
        })
        .collect();
    let h = window_history(&ex, 20);
    assert_eq!(h.len(), 40);
    assert_eq!(h[0].text, "q5");
    assert_eq!(h[0].speaker, Speaker::Learner);
    assert_eq!(h[39].text, "a24");
    assert_eq!(h[39].speaker, Speaker::Patient);
    assert!(window_history(&ex[..3], 20).len() == 6);
}
