use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;

use super::Outcome;
use crate::assets::{AssetKind, AssetMetadata, AssetStore};

fn open(store: &Path) -> Result<AssetStore, Outcome> {
    AssetStore::open(store).map_err(|e| Outcome::fail("storage_error", e.to_string()))
}

pub(super) fn fsck(store: &Path) -> Outcome {
    if !store.is_dir() {
        return Outcome::usage("io_error", format!("{} is not a directory", store.display()));
    }
    let store = match open(store) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let report = store.fsck();
    let mut human = String::new();
    for p in &report.problems {
        let _ = writeln!(human, "{} {}: {}", p.kind, p.id, p.problem);
    }
    let _ = writeln!(human, "{} assets checked, {} problems", report.checked, report.problems.len());
    let data = serde_json::to_value(&report).expect("report serializes");
    if report.is_clean() {
        Outcome::ok(data, human)
    } else {
        let ids: Vec<_> = report.problems.iter().map(|p| p.id.as_str()).collect();
        Outcome::fail("asset_corrupt", format!("damaged: {}", ids.join(", "))).with_data(data, human)
    }
}

pub(super) fn register(
    kind: AssetKind,
    file: &Path,
    store: &Path,
    id: Option<String>,
    duration_ms: Option<u64>,
    loopable: bool,
    container: Option<String>,
) -> Outcome {
    let metadata = match kind {
        AssetKind::BaseVideo => match duration_ms {
            Some(duration_ms) => AssetMetadata::BaseVideo {
                id,
                duration_ms,
                loopable,
                container,
            },
            None => return Outcome::usage("bad_request", "base videos need --duration-ms"),
        },
        AssetKind::Voice => AssetMetadata::Voice,
        AssetKind::Clip => return Outcome::usage("bad_request", "clips are produced by the pipeline"),
    };
    let store = match open(store) {
        Ok(s) => s,
        Err(o) => return o,
    };
    match store.register_asset(kind, file, metadata) {
        Ok(id) => Outcome::ok(json!({ "kind": kind, "id": id }), format!("{id}\n")),
        Err(e) => Outcome::fail("register_failed", e.to_string()),
    }
}
