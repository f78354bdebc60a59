use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::json;

use super::{BenchArgs, Outcome};
use crate::assets::AssetStore;
use crate::persona::{assemble_prompt, fixtures, PersonaRegistry, RolePlayInstructions};
use crate::pipeline::{
    latency_report, EventLog, Pipeline, PipelineJob, PipelineOptions, TurnContext, TurnInput,
};
use crate::providers::{DialogueParams, OfflineLipSync, ProviderConfig, ProviderKind, ProviderSet, Simulated};

/// Runs `turns` sequential text turns with the clip cache off, so every turn
/// pays for synthesis and render.
pub(super) async fn run(args: BenchArgs) -> Outcome {
    let registry = PersonaRegistry::with_profiles(fixtures::all());
    let Some(entry) = registry.get(&args.persona) else {
        return Outcome::fail("unknown_persona", format!("unknown persona `{}`", args.persona));
    };
    let scratch = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Outcome::fail("io_error", e.to_string()),
    };
    let assets = match AssetStore::open(scratch.path()) {
        Ok(a) => Arc::new(a),
        Err(e) => return Outcome::fail("storage_error", e.to_string()),
    };
    if let Err(e) = fixtures::install_placeholder_assets(&assets, &entry.profile) {
        return Outcome::fail("storage_error", e.to_string());
    }
    let mut providers = ProviderSet::offline();
    if let Some(range) = args.render_delay_ms {
        let mut cfg = ProviderConfig::simulated(ProviderKind::Lipsync, range);
        cfg.seed = args.seed;
        providers.lipsync = Arc::new(Simulated::new(OfflineLipSync, &cfg));
    }
    let pipeline = Pipeline::with_options(providers, assets.clone(), PipelineOptions { cache_enabled: false });
    let prompt = match assemble_prompt(&entry.profile, &RolePlayInstructions::default_set()) {
        Ok(p) => p,
        Err(e) => return Outcome::fail("invalid_persona", e.to_string()),
    };
    let (voice, base) = match (assets.voice(&entry.profile.voice_id), assets.base_video(&entry.profile.base_video_id)) {
        (Ok(v), Ok(b)) => (v, b),
        _ => return Outcome::fail("invalid_persona", "persona assets missing"),
    };
    let params = DialogueParams::default();
    let ctx = TurnContext {
        persona_id: &entry.profile.id,
        prompt: &prompt,
        voice: &voice,
        voice_params: voice.defaults,
        base_video: &base,
        history: &[],
        params: &params,
    };

    let mut results = Vec::new();
    for i in 0..args.turns {
        let job = PipelineJob::new(
            format!("bench-{i}"),
            "bench",
            i,
            TurnInput::Text(format!("Bench question number {i}: how are you feeling today?")),
        );
        let log = EventLog::new();
        match pipeline
            .run_turn(&job, &ctx, &log, &tokio_util::sync::CancellationToken::new())
            .await
        {
            Ok(r) => results.push(r),
            Err(f) => return Outcome::fail(&f.cause.code, format!("turn {i}: {}", f.cause.message)),
        }
    }
    let report = latency_report(&results).expect("at least one turn");

    let mut human = format!("{:<11} {:>10} {:>10} {:>10} {:>10}\n", "stage", "p50 ms", "p95 ms", "max ms", "mean ms");
    for (label, s) in report.rows() {
        let _ = writeln!(
            human,
            "{label:<11} {:>10.1} {:>10.1} {:>10.1} {:>10.1}",
            s.p50_ms, s.p95_ms, s.max_ms, s.mean_ms
        );
    }
    let _ = writeln!(human, "\ndominant stage: {}", report.dominant_stage);
    let _ = writeln!(human, "render share:   {:.1}%", report.render_share * 100.0);
    let totals: Vec<String> = results.iter().map(|r| format!("{:.0}", r.timings.total_ms)).collect();
    let _ = writeln!(human, "turn totals:    {} ms", totals.join(", "));

    let per_turn: Vec<_> = results.iter().map(|r| r.timings).collect();
    Outcome::ok(
        json!({
            "report": report,
            "turns": per_turn,
            "render_delay_ms": args.render_delay_ms,
        }),
        human,
    )
}
