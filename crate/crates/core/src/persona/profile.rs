//! Patient profile model, validation, and the JSON persona file format.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PersonaError;

/// Upper bound, in bytes, for any single free-text field.
pub const MAX_FIELD_BYTES: usize = 8 * 1024;

/// Top-level keys recognised in a persona document. Anything else is kept
/// out of the profile and reported as a warning.
pub const PROFILE_KEYS: &[&str] = &[
    "id",
    "display_name",
    "demographics",
    "scenario",
    "medical_history",
    "disease_onset",
    "healthcare_experience",
    "belief_system",
    "disease_understanding",
    "personality_traits",
    "voice_id",
    "base_video_id",
];

const DEMOGRAPHIC_KEYS: &[&str] = &["age", "pronouns", "occupation"];

const MAX_AGE: u32 = 130;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demographics {
    #[serde(default)]
    pub age: u32,
    #[serde(default)]
    pub pronouns: String,
    #[serde(default)]
    pub occupation: String,
}

/// A declarative synthetic patient: who they are, what they believe and
/// how they talk. Rendered into the dialogue system prompt.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientProfile {
    #[serde(default)]
    pub id: String,
    #[serde(default)]
    pub display_name: String,
    #[serde(default)]
    pub demographics: Demographics,
    #[serde(default)]
    pub scenario: String,
    #[serde(default)]
    pub medical_history: String,
    #[serde(default)]
    pub disease_onset: String,
    #[serde(default)]
    pub healthcare_experience: String,
    #[serde(default)]
    pub belief_system: String,
    #[serde(default)]
    pub disease_understanding: String,
    #[serde(default)]
    pub personality_traits: Vec<String>,
    #[serde(default)]
    pub voice_id: String,
    #[serde(default)]
    pub base_video_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub field_path: String,
    pub message: String,
    pub severity: Severity,
}

impl Issue {
    pub fn error(field_path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field_path: field_path.into(),
            message: message.into(),
            severity: Severity::Error,
        }
    }

    pub fn warning(field_path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field_path: field_path.into(),
            message: message.into(),
            severity: Severity::Warning,
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.severity, self.field_path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn from_issues(issues: Vec<Issue>) -> Self {
        let ok = !issues.iter().any(|i| i.severity == Severity::Error);
        Self { ok, issues }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    /// Field paths of every error, in report order.
    pub fn error_paths(&self) -> Vec<String> {
        self.errors().map(|i| i.field_path.clone()).collect()
    }
}

/// `[a-z0-9-]{1,64}`
pub fn is_valid_slug(s: &str) -> bool {
    (1..=64).contains(&s.len())
        && s.bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

/// Checks every profile rule and reports one issue per violation.
/// Asset resolution is not checked here; that happens when a session is
/// created against a concrete asset store.
pub fn validate_profile(profile: &PatientProfile) -> ValidationReport {
    let mut issues = Vec::new();

    if !is_valid_slug(&profile.id) {
        issues.push(Issue::error("id", "must match [a-z0-9-]{1,64}"));
    }
    if profile.display_name.trim().is_empty() {
        issues.push(Issue::error("display_name", "must not be empty"));
    }
    if profile.demographics.age > MAX_AGE {
        issues.push(Issue::error(
            "demographics.age",
            format!("must be at most {MAX_AGE}"),
        ));
    }

    let required = [
        ("scenario", &profile.scenario),
        ("belief_system", &profile.belief_system),
        ("disease_understanding", &profile.disease_understanding),
    ];
    for (path, value) in required {
        if value.trim().is_empty() {
            issues.push(Issue::error(path, "must not be empty"));
        }
    }
    if profile.personality_traits.is_empty() {
        issues.push(Issue::error("personality_traits", "must list at least one trait"));
    }
    for (i, trait_) in profile.personality_traits.iter().enumerate() {
        if trait_.trim().is_empty() {
            issues.push(Issue::error(
                format!("personality_traits[{i}]"),
                "must not be empty",
            ));
        } else if trait_.contains('\n') {
            issues.push(Issue::error(
                format!("personality_traits[{i}]"),
                "must be a single line",
            ));
        }
    }

    for (path, value) in profile.free_text_fields() {
        if value.len() > MAX_FIELD_BYTES {
            issues.push(Issue::error(
                path,
                format!("exceeds {MAX_FIELD_BYTES} bytes"),
            ));
        }
    }

    if profile.voice_id.trim().is_empty() {
        issues.push(Issue::error("voice_id", "must reference a registered voice"));
    }
    if profile.base_video_id.trim().is_empty() {
        issues.push(Issue::error(
            "base_video_id",
            "must reference a registered base video",
        ));
    }

    ValidationReport::from_issues(issues)
}

impl PatientProfile {
    fn free_text_fields(&self) -> [(&'static str, &str); 9] {
        [
            ("display_name", self.display_name.as_str()),
            ("scenario", self.scenario.as_str()),
            ("medical_history", self.medical_history.as_str()),
            ("disease_onset", self.disease_onset.as_str()),
            ("healthcare_experience", self.healthcare_experience.as_str()),
            ("belief_system", self.belief_system.as_str()),
            ("disease_understanding", self.disease_understanding.as_str()),
            ("demographics.pronouns", self.demographics.pronouns.as_str()),
            ("demographics.occupation", self.demographics.occupation.as_str()),
        ]
    }

    /// Serializes to the persona file format (pretty JSON, keys in schema order).
    pub fn to_document(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("profile serializes");
        out.push('\n');
        out
    }
}

/// A parsed persona document plus any non-fatal findings from parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProfile {
    pub profile: PatientProfile,
    pub warnings: Vec<Issue>,
}

/// Parses a persona document without enforcing profile invariants.
/// Unknown keys are tolerated and reported as warnings.
pub fn parse_profile(document: &[u8]) -> Result<LoadedProfile, PersonaError> {
    let text = std::str::from_utf8(document).map_err(|e| PersonaError::Parse {
        line: 0,
        column: 0,
        field: None,
        message: format!("document is not UTF-8: {e}"),
    })?;
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| PersonaError::from_json(&e, None))?;
    let object = value.as_object().ok_or_else(|| PersonaError::Parse {
        line: 1,
        column: 1,
        field: None,
        message: "persona document must be a JSON object".into(),
    })?;

    let known: BTreeSet<&str> = PROFILE_KEYS.iter().copied().collect();
    let mut warnings = Vec::new();
    for key in object.keys() {
        if !known.contains(key.as_str()) {
            warnings.push(Issue::warning(key.clone(), "unknown field ignored"));
        }
    }
    if let Some(demo) = object.get("demographics").and_then(|d| d.as_object()) {
        for key in demo.keys() {
            if !DEMOGRAPHIC_KEYS.contains(&key.as_str()) {
                warnings.push(Issue::warning(
                    format!("demographics.{key}"),
                    "unknown field ignored",
                ));
            }
        }
    }

    // Field-level type errors carry a path; re-run through serde_json's
    // deserializer per key so the diagnostic can name the offending field.
    let mut profile = PatientProfile::default();
    for key in PROFILE_KEYS {
        let Some(v) = object.get(*key) else { continue };
        let res = match *key {
            "id" => from_field(v, key).map(|x| profile.id = x),
            "display_name" => from_field(v, key).map(|x| profile.display_name = x),
            "demographics" => from_field(v, key).map(|x| profile.demographics = x),
            "scenario" => from_field(v, key).map(|x| profile.scenario = x),
            "medical_history" => from_field(v, key).map(|x| profile.medical_history = x),
            "disease_onset" => from_field(v, key).map(|x| profile.disease_onset = x),
            "healthcare_experience" => {
                from_field(v, key).map(|x| profile.healthcare_experience = x)
            }
            "belief_system" => from_field(v, key).map(|x| profile.belief_system = x),
            "disease_understanding" => {
                from_field(v, key).map(|x| profile.disease_understanding = x)
            }
            "personality_traits" => from_field(v, key).map(|x| profile.personality_traits = x),
            "voice_id" => from_field(v, key).map(|x| profile.voice_id = x),
            "base_video_id" => from_field(v, key).map(|x| profile.base_video_id = x),
            _ => unreachable!("key list and match arms diverged"),
        };
        res.map_err(|message| PersonaError::Parse {
            line: locate_key(text, key),
            column: 0,
            field: Some((*key).to_string()),
            message,
        })?;
    }

    Ok(LoadedProfile { profile, warnings })
}

fn from_field<T: serde::de::DeserializeOwned>(v: &serde_json::Value, key: &str) -> Result<T, String> {
    T::deserialize(v).map_err(|e| format!("field `{key}`: {e}"))
}

/// Best-effort 1-based line of `"key"` in the source document.
fn locate_key(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
        .unwrap_or(0)
}

/// Parses and validates a persona document.
pub fn load_profile(document: &[u8]) -> Result<LoadedProfile, PersonaError> {
    let loaded = parse_profile(document)?;
    let report = validate_profile(&loaded.profile);
    if !report.ok {
        return Err(PersonaError::Validation(report));
    }
    Ok(loaded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persona::fixtures;

    #[test]
    fn fixture_profile_is_valid() {
        let report = validate_profile(&fixtures::maria());
        assert!(report.ok);
        assert!(report.issues.is_empty());
    }

    #[test]
    fn empty_belief_system_is_one_error() {
        let mut p = fixtures::maria();
        p.belief_system.clear();
        let report = validate_profile(&p);
        assert!(!report.ok);
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.issues[0].field_path, "belief_system");
        assert_eq!(report.issues[0].severity, Severity::Error);
    }

    #[test]
    fn slug_rule_rejects_punctuation_and_case() {
        // "Mr. Jones!" has uppercase, '.', ' ' and '!' - none allowed.
        let mut p = fixtures::maria();
        p.id = "Mr. Jones!".into();
        let report = validate_profile(&p);
        assert!(!report.ok);
        assert_eq!(report.error_paths(), vec!["id"]);

        assert!(is_valid_slug("maria-gonzalez"));
        assert!(is_valid_slug(&"a".repeat(64)));
        assert!(!is_valid_slug(&"a".repeat(65)));
        assert!(!is_valid_slug(""));
        assert!(!is_valid_slug("maria_gonzalez"));
    }

    #[test]
    fn issue_count_matches_violations() {
        let p = PatientProfile::default();
        let report = validate_profile(&p);
        let paths = report.error_paths();
        assert_eq!(
            paths,
            vec![
                "id",
                "display_name",
                "scenario",
                "belief_system",
                "disease_understanding",
                "personality_traits",
                "voice_id",
                "base_video_id"
            ]
        );
    }

    #[test]
    fn oversized_field_rejected() {
        let mut p = fixtures::maria();
        p.medical_history = "x".repeat(MAX_FIELD_BYTES + 1);
        assert_eq!(validate_profile(&p).error_paths(), vec!["medical_history"]);
        p.medical_history = "x".repeat(MAX_FIELD_BYTES);
        assert!(validate_profile(&p).ok);
    }

    #[test]
    fn fixture_document_loads_equal() {
        let loaded = load_profile(fixtures::MARIA_JSON.as_bytes()).unwrap();
        assert_eq!(loaded.profile, fixtures::maria());
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn missing_scenario_names_field() {
        let mut v: serde_json::Value = serde_json::from_str(fixtures::MARIA_JSON).unwrap();
        v.as_object_mut().unwrap().remove("scenario");
        let err = load_profile(v.to_string().as_bytes()).unwrap_err();
        match err {
            PersonaError::Validation(report) => {
                assert_eq!(report.error_paths(), vec!["scenario"])
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_a_warning() {
        let mut v: serde_json::Value = serde_json::from_str(fixtures::MARIA_JSON).unwrap();
        v.as_object_mut()
            .unwrap()
            .insert("lived_experience".into(), "interviews pending".into());
        let loaded = load_profile(v.to_string().as_bytes()).unwrap();
        assert_eq!(loaded.profile, fixtures::maria());
        assert_eq!(
            loaded.warnings,
            vec![Issue::warning("lived_experience", "unknown field ignored")]
        );
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_profile(b"{\n  \"id\": \"x\",\n  oops\n}").unwrap_err();
        match err {
            PersonaError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_type_names_field() {
        let doc = "{\n  \"id\": \"x\",\n  \"personality_traits\": \"stoic\"\n}";
        match parse_profile(doc.as_bytes()).unwrap_err() {
            PersonaError::Parse { line, field, .. } => {
                assert_eq!(field.as_deref(), Some("personality_traits"));
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
