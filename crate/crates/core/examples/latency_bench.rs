//! Measure per-stage latency with a simulated lip-sync delay and print the
//! percentile report.
//!
//! ```text
//! cargo run --example latency_bench -- 8 300:500
//! ```
//!
//! Arguments are the number of turns and the render delay range in
//! milliseconds. `synthpatient bench` does the same from the command line.

use std::sync::Arc;

use synthpatient::assets::AssetStore;
use synthpatient::persona::{assemble_prompt, fixtures, RolePlayInstructions};
use synthpatient::pipeline::{latency_report, EventLog, Pipeline, PipelineJob, PipelineOptions, TurnContext, TurnInput};
use synthpatient::providers::{
    DelayRange, DialogueParams, OfflineLipSync, ProviderConfig, ProviderKind, ProviderSet, Simulated,
};
use tokio_util::sync::CancellationToken;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let turns: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(6);
    let delay: DelayRange = args.next().unwrap_or_else(|| "200:400".into()).parse()?;

    let dir = tempfile::tempdir()?;
    let assets = Arc::new(AssetStore::open(dir.path())?);
    let profile = fixtures::maria();
    fixtures::install_placeholder_assets(&assets, &profile)?;

    let mut providers = ProviderSet::offline();
    let mut cfg = ProviderConfig::simulated(ProviderKind::Lipsync, delay);
    cfg.seed = Some(42);
    providers.lipsync = Arc::new(Simulated::new(OfflineLipSync, &cfg));
    // every turn pays for a render
    let pipeline = Pipeline::with_options(providers, assets.clone(), PipelineOptions { cache_enabled: false });

    let prompt = assemble_prompt(&profile, &RolePlayInstructions::default_set())?;
    let voice = assets.voice(&profile.voice_id)?;
    let base = assets.base_video(&profile.base_video_id)?;
    let params = DialogueParams::default();
    let ctx = TurnContext {
        persona_id: &profile.id,
        prompt: &prompt,
        voice: &voice,
        voice_params: voice.defaults,
        base_video: &base,
        history: &[],
        params: &params,
    };

    let mut results = Vec::new();
    for i in 0..turns {
        let job = PipelineJob::new(format!("j{i}"), "bench", i, TurnInput::Text(format!("Question {i}?")));
        let r = pipeline
            .run_turn(&job, &ctx, &EventLog::new(), &CancellationToken::new())
            .await
            .map_err(|f| f.cause.message)?;
        println!("turn {i}: {:.0} ms", r.timings.total_ms);
        results.push(r);
    }

    let report = latency_report(&results)?;
    println!("\n{:<11} {:>9} {:>9} {:>9}", "stage", "p50", "p95", "max");
    for (label, s) in report.rows() {
        println!("{label:<11} {:>9.1} {:>9.1} {:>9.1}", s.p50_ms, s.p95_ms, s.max_ms);
    }
    println!("\ndominant: {}  render share: {:.1}%", report.dominant_stage, report.render_share * 100.0);
    Ok(())
}
