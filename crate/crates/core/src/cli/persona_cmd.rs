use std::path::Path;

use serde_json::json;

use super::Outcome;
use crate::persona::{assemble_prompt, parse_profile, validate_profile, PersonaError, RolePlayInstructions};

fn read(file: &Path) -> Result<Vec<u8>, Outcome> {
    std::fs::read(file).map_err(|e| Outcome::usage("io_error", format!("{}: {e}", file.display())))
}

fn parse_failure(e: PersonaError) -> Outcome {
    let field = match &e {
        PersonaError::Parse { field: Some(f), .. } => json!(f),
        _ => json!(null),
    };
    Outcome::usage("parse_error", e.to_string()).with_data(json!({ "field": field }), "")
}

pub(super) fn validate(file: &Path) -> Outcome {
    let bytes = match read(file) {
        Ok(b) => b,
        Err(o) => return o,
    };
    let loaded = match parse_profile(&bytes) {
        Ok(l) => l,
        Err(e) => return parse_failure(e),
    };
    let mut report = validate_profile(&loaded.profile);
    report.issues.extend(loaded.warnings);
    let human: String = report.issues.iter().map(|i| format!("{i}\n")).collect();
    let data = serde_json::to_value(&report).expect("report serializes");
    if report.ok {
        Outcome::ok(data, human)
    } else {
        let paths = report.error_paths().join(", ");
        Outcome {
            exit: 1,
            data,
            human,
            error: Some(("invalid_persona".into(), format!("profile fails validation: {paths}"))),
        }
    }
}

pub(super) fn render_prompt(file: &Path, hash_only: bool, instructions: Option<&Path>) -> Outcome {
    let bytes = match read(file) {
        Ok(b) => b,
        Err(o) => return o,
    };
    let instructions = match instructions {
        None => RolePlayInstructions::default_set(),
        Some(p) => match std::fs::read_to_string(p).map_err(PersonaError::from).and_then(|t| RolePlayInstructions::parse(&t)) {
            Ok(i) => i,
            Err(e) => return Outcome::usage("invalid_instructions", e.to_string()),
        },
    };
    let loaded = match parse_profile(&bytes) {
        Ok(l) => l,
        Err(e) => return parse_failure(e),
    };
    match assemble_prompt(&loaded.profile, &instructions) {
        Ok(bundle) => {
            let human = if hash_only {
                format!("{}\n", bundle.content_hash)
            } else {
                bundle.system_text.clone()
            };
            Outcome::ok(serde_json::to_value(&bundle).expect("bundle serializes"), human)
        }
        Err(e) => Outcome::fail("invalid_persona", e.to_string()),
    }
}
