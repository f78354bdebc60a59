//! Run a single text turn through the pipeline with offline providers and
//! print every stage event as it happens.
//!
//! ```text
//! cargo run --example offline_turn -- "Do you know why you're here today?"
//! ```

use std::sync::Arc;

use synthpatient::assets::AssetStore;
use synthpatient::persona::{assemble_prompt, fixtures, RolePlayInstructions};
use synthpatient::pipeline::{Pipeline, PipelineJob, StageEvent, TurnContext, TurnInput};
use synthpatient::providers::{DialogueParams, ProviderSet};
use tokio_util::sync::CancellationToken;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let question = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "Do you know why you're here today?".into());

    let dir = tempfile::tempdir()?;
    let assets = Arc::new(AssetStore::open(dir.path())?);
    let profile = fixtures::aiko();
    fixtures::install_placeholder_assets(&assets, &profile)?;

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

    let pipeline = Pipeline::new(ProviderSet::offline(), assets.clone());
    let job = PipelineJob::new("job-1", "example", 0, TurnInput::Text(question));
    let print = |e: StageEvent| println!("{:>10.1} ms  {}", e.at_ms, e.stage);
    let result = pipeline
        .run_turn(&job, &ctx, &print, &CancellationToken::new())
        .await
        .map_err(|f| f.cause.message)?;

    println!("\nlearner: {}", result.user_text);
    println!("patient: {}", result.patient_text);
    let (clip, bytes) = assets.read_clip(&result.clip_id)?;
    println!("clip:    {} ({} bytes, {} ms)", clip.clip_id, bytes.len(), clip.manifest.duration_ms);
    println!("timings: {:?}", result.timings);
    Ok(())
}
