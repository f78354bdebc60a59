//! Sample personas bundled with the crate, used by the offline demo, the
//! latency bench, examples and tests.

use super::{parse_profile, PatientProfile};

pub const MARIA_JSON: &str = include_str!("../../fixtures/personas/maria-gonzalez.json");
pub const JAMES_JSON: &str = include_str!("../../fixtures/personas/james-okafor.json");
pub const AIKO_JSON: &str = include_str!("../../fixtures/personas/aiko-tanaka.json");

/// Maria Gonzalez with `belief_system` removed.
pub const MISSING_BELIEF_SYSTEM_JSON: &str =
    include_str!("../../fixtures/invalid/missing-belief-system.json");

/// Five learner utterances for a goals-of-care conversation.
pub const GOALS_OF_CARE_SCRIPT: &str = include_str!("../../fixtures/scripts/goals-of-care.txt");

fn parse(doc: &str) -> PatientProfile {
    parse_profile(doc.as_bytes())
        .expect("bundled persona parses")
        .profile
}

pub fn maria() -> PatientProfile {
    parse(MARIA_JSON)
}

pub fn james() -> PatientProfile {
    parse(JAMES_JSON)
}

pub fn aiko() -> PatientProfile {
    parse(AIKO_JSON)
}

pub fn all() -> Vec<PatientProfile> {
    vec![maria(), james(), aiko()]
}

/// Length of the silent placeholder registered as a persona's base video.
pub const PLACEHOLDER_BASE_MS: u64 = 2_000;

/// Registers stand-in assets for `profile` so it can run against offline or
/// simulated providers: two seconds of silence as its base video and a voice
/// whose handle is `offline:<voice_id>`. Assets already registered under
/// those ids are left alone.
pub fn install_placeholder_assets(
    store: &crate::assets::AssetStore,
    profile: &PatientProfile,
) -> Result<(), crate::assets::AssetError> {
    use crate::providers::{AudioBlob, VoiceParams, OFFLINE_CONTAINER, SAMPLES_PER_MS};

    if store.base_video(&profile.base_video_id).is_err() {
        let silence = vec![0i16; (PLACEHOLDER_BASE_MS * u64::from(SAMPLES_PER_MS)) as usize];
        store.register_base_video(
            Some(&profile.base_video_id),
            AudioBlob::from_samples(&silence).bytes(),
            PLACEHOLDER_BASE_MS,
            true,
            OFFLINE_CONTAINER,
        )?;
    }
    if store.voice(&profile.voice_id).is_err() {
        store.register_voice(&crate::assets::VoiceModelRef {
            voice_id: profile.voice_id.clone(),
            handle: format!("offline:{}", profile.voice_id),
            defaults: VoiceParams::default(),
        })?;
    }
    Ok(())
}
