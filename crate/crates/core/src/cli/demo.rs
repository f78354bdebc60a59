use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Value};
use tokio::time::Instant;

use super::{DemoArgs, Outcome};
use crate::assets::AssetStore;
use crate::gateway::AppConfig;
use crate::persona::{fixtures, PersonaRegistry, RolePlayInstructions};
use crate::pipeline::{Pipeline, Stage, StageTimings, TurnInput};
use crate::providers::ProviderSet;
use crate::session::{SessionManager, SessionOptions, SessionStore, Turn, TurnStatus};

/// Non-blank lines of a script, trimmed.
pub(super) fn script_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

pub(super) fn timings_table(rows: &[(u32, StageTimings)]) -> String {
    let mut out = format!(
        "{:>4} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}\n",
        "turn", "transcribe", "dialogue", "synthesize", "render", "overhead", "total"
    );
    for (i, t) in rows {
        let render = if t.render_skipped {
            "cached".to_string()
        } else {
            format!("{:.1}", t.render_ms)
        };
        let _ = writeln!(
            out,
            "{:>4} {:>11.1} {:>11.1} {:>11.1} {:>11} {:>11.1} {:>11.1}",
            i, t.transcribe_ms, t.dialogue_ms, t.synthesize_ms, render, t.overhead_ms, t.total_ms
        );
    }
    out
}

pub(super) async fn run(args: DemoArgs) -> Outcome {
    let script = match std::fs::read_to_string(&args.script) {
        Ok(s) => s,
        Err(e) => return Outcome::usage("io_error", format!("{}: {e}", args.script.display())),
    };
    let lines = script_lines(&script);
    if lines.is_empty() {
        return Outcome::fail("empty_input", "script has no utterances");
    }

    let providers = if args.offline {
        ProviderSet::offline()
    } else {
        let config = match &args.config {
            Some(p) => match AppConfig::load(p) {
                Ok(c) => c,
                Err(e) => return Outcome::usage("invalid_config", e.to_string()),
            },
            None => AppConfig::default(),
        };
        match ProviderSet::from_config(&config.providers) {
            Ok(p) => p,
            Err(e) => return Outcome::usage("invalid_config", e.to_string()),
        }
    };

    let registry = match &args.personas_dir {
        Some(dir) => match PersonaRegistry::load_dir(dir) {
            Ok(r) => r,
            Err(e) => return Outcome::usage("io_error", e.to_string()),
        },
        None => PersonaRegistry::with_profiles(fixtures::all()),
    };

    let scratch = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Outcome::fail("io_error", e.to_string()),
    };
    let store_root = args.store.clone().unwrap_or_else(|| scratch.path().join("store"));
    let assets = match AssetStore::open(&store_root) {
        Ok(a) => Arc::new(a),
        Err(e) => return Outcome::fail("storage_error", e.to_string()),
    };
    if !args.no_placeholders {
        if let Some(entry) = registry.get(&args.persona) {
            if entry.report.ok {
                if let Err(e) = fixtures::install_placeholder_assets(&assets, &entry.profile) {
                    return Outcome::fail("storage_error", e.to_string());
                }
            }
        }
    }
    let sessions_store = match SessionStore::open(scratch.path().join("sessions")) {
        Ok(s) => s,
        Err(e) => return Outcome::fail("storage_error", e.to_string()),
    };
    let manager = SessionManager::new(
        Arc::new(registry),
        RolePlayInstructions::default_set(),
        Pipeline::new(providers, assets),
        Some(sessions_store),
        SessionOptions::default(),
    );

    let started = Instant::now();
    let session = match manager.create_session(&args.persona) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(e.code(), e.to_string()),
    };
    let id = session.session_id.clone();

    let mut turns: Vec<Turn> = Vec::new();
    let mut failure = None;
    for line in &lines {
        let job = match manager.submit_turn(&id, TurnInput::Text(line.clone())) {
            Ok(j) => j,
            Err(e) => {
                failure = Some((e.code().to_string(), e.to_string()));
                break;
            }
        };
        let turn = match manager.wait_for_turn(&id, &job).await {
            Ok(t) => t,
            Err(e) => {
                failure = Some((e.code().to_string(), e.to_string()));
                break;
            }
        };
        let failed = match &turn.status {
            TurnStatus::Failed { cause } => Some((cause.code.clone(), format!("turn {}: {}", turn.index, cause.message))),
            TurnStatus::Ok => None,
        };
        turns.push(turn);
        if failed.is_some() {
            failure = failed;
            break;
        }
    }
    let wall_ms = started.elapsed().as_secs_f64() * 1000.0;
    let frames = manager.frames(&id).unwrap_or_default();
    let _ = manager.close_session(&id).await;

    let mut human = String::new();
    let mut json_turns = Vec::new();
    for t in &turns {
        let _ = writeln!(human, "[{}] Learner: {}", t.index, t.user_text.as_deref().unwrap_or(""));
        match &t.status {
            TurnStatus::Ok => {
                let _ = writeln!(human, "    {}", t.patient_text.as_deref().unwrap_or(""));
                let _ = writeln!(
                    human,
                    "    clip {}{}",
                    t.clip_id.as_deref().unwrap_or(""),
                    if t.cache_hit { " (cached)" } else { "" }
                );
            }
            TurnStatus::Failed { cause } => {
                let _ = writeln!(human, "    failed: {}", cause.code);
            }
        }
        let events: Vec<Stage> = frames
            .iter()
            .filter(|f| f.job_id == t.job_id)
            .map(|f| f.stage)
            .collect();
        let mut v = serde_json::to_value(t).expect("turn serializes");
        v["events"] = json!(events);
        json_turns.push(v);
    }
    let rows: Vec<(u32, StageTimings)> = turns
        .iter()
        .filter_map(|t| t.timings.map(|tm| (t.index, tm)))
        .collect();
    human.push('\n');
    human.push_str(&timings_table(&rows));
    let _ = writeln!(human, "\n{} turns in {:.0} ms", turns.len(), wall_ms);

    let data: Value = json!({
        "persona_id": args.persona,
        "session_id": id,
        "turns": json_turns,
        "wall_ms": wall_ms,
    });
    match failure {
        None => Outcome::ok(data, human),
        Some((code, message)) => Outcome::fail(&code, message).with_data(data, human),
    }
}
