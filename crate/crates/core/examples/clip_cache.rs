//! Ask the same question twice in one session and watch the second reply
//! come straight from the clip cache. A session with different voice
//! settings misses.
//!
//! ```text
//! cargo run --example clip_cache
//! ```

use std::sync::Arc;

use synthpatient::assets::AssetStore;
use synthpatient::persona::{fixtures, PersonaRegistry, RolePlayInstructions};
use synthpatient::pipeline::{Pipeline, TurnInput};
use synthpatient::providers::{ProviderSet, VoiceParams};
use synthpatient::session::{SessionManager, SessionOptions};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let assets = Arc::new(AssetStore::open(dir.path())?);
    let profile = fixtures::james();
    fixtures::install_placeholder_assets(&assets, &profile)?;

    let manager = SessionManager::new(
        Arc::new(PersonaRegistry::with_profiles([profile.clone()])),
        RolePlayInstructions::default_set(),
        Pipeline::new(ProviderSet::offline(), assets),
        None,
        SessionOptions::default(),
    );

    let question = "How is your breathing at night?";
    let warmer = VoiceParams {
        style: 0.8,
        ..VoiceParams::default()
    };
    for (label, params) in [("default voice", None), ("default voice", None), ("more expressive", Some(warmer))] {
        let session = manager.create_session_with(&profile.id, params)?;
        let id = &session.session_id;
        let job = manager.submit_turn(id, TurnInput::Text(question.into()))?;
        let turn = manager.wait_for_turn(id, &job).await?;
        let t = turn.timings.unwrap_or_default();
        println!(
            "{label:<16} cache_hit={:<5} render={:>6.1} ms skipped={:<5} clip={}",
            turn.cache_hit,
            t.render_ms,
            t.render_skipped,
            turn.clip_id.as_deref().unwrap_or("-"),
        );
    }
    Ok(())
}
