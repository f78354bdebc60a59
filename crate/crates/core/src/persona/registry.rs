use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::{first_sentence, parse_profile, validate_profile, PatientProfile, PersonaError, ValidationReport};

const TEASER_MAX_CHARS: usize = 160;

#[derive(Debug, Clone)]
pub struct PersonaEntry {
    pub profile: PatientProfile,
    pub report: ValidationReport,
    pub source: Option<PathBuf>,
}

/// What learners may see about a persona before the encounter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaSummary {
    pub id: String,
    pub display_name: String,
    pub scenario_teaser: String,
}

impl PersonaSummary {
    pub fn of(profile: &PatientProfile) -> Self {
        let sentence = first_sentence(&profile.scenario);
        let scenario_teaser = if sentence.chars().count() > TEASER_MAX_CHARS {
            let cut: String = sentence.chars().take(TEASER_MAX_CHARS - 1).collect();
            format!("{}…", cut.trim_end())
        } else {
            sentence.to_string()
        };
        Self {
            id: profile.id.clone(),
            display_name: profile.display_name.clone(),
            scenario_teaser,
        }
    }
}

/// In-memory set of personas. Invalid personas are kept (so callers can be
/// told why they cannot be used) but never listed.
#[derive(Debug, Default)]
pub struct PersonaRegistry {
    entries: RwLock<BTreeMap<String, Arc<PersonaEntry>>>,
}

impl PersonaRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_profiles(profiles: impl IntoIterator<Item = PatientProfile>) -> Self {
        let reg = Self::new();
        for p in profiles {
            reg.upsert(p);
        }
        reg
    }

    /// Loads every `*.json` file in `dir`. Unparseable files are skipped with
    /// a warning; parseable but invalid ones are kept and flagged.
    pub fn load_dir(dir: &Path) -> Result<Self, PersonaError> {
        let reg = Self::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let bytes = std::fs::read(&path)?;
            match parse_profile(&bytes) {
                Ok(loaded) => {
                    for w in &loaded.warnings {
                        tracing::warn!(file = %path.display(), "persona: {w}");
                    }
                    let entry = reg.insert(loaded.profile, Some(path.clone()));
                    if !entry.report.ok {
                        tracing::warn!(
                            file = %path.display(),
                            fields = %entry.report.error_paths().join(","),
                            "persona failed validation; excluded from listing"
                        );
                    }
                }
                Err(e) => tracing::warn!(file = %path.display(), "persona skipped: {e}"),
            }
        }
        Ok(reg)
    }

    pub fn upsert(&self, profile: PatientProfile) -> Arc<PersonaEntry> {
        self.insert(profile, None)
    }

    fn insert(&self, profile: PatientProfile, source: Option<PathBuf>) -> Arc<PersonaEntry> {
        let report = validate_profile(&profile);
        let entry = Arc::new(PersonaEntry {
            profile,
            report,
            source,
        });
        self.entries
            .write()
            .expect("persona registry lock")
            .insert(entry.profile.id.clone(), entry.clone());
        entry
    }

    pub fn get(&self, id: &str) -> Option<Arc<PersonaEntry>> {
        self.entries.read().expect("persona registry lock").get(id).cloned()
    }

    /// Summaries of valid personas, ordered by id.
    pub fn summaries(&self) -> Vec<PersonaSummary> {
        self.entries
            .read()
            .expect("persona registry lock")
            .values()
            .filter(|e| e.report.ok)
            .map(|e| PersonaSummary::of(&e.profile))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("persona registry lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persona::fixtures;

    #[test]
    fn listing_excludes_invalid() {
        let mut bad = fixtures::james();
        bad.belief_system.clear();
        let reg = PersonaRegistry::with_profiles([fixtures::maria(), bad, fixtures::aiko()]);
        let ids: Vec<_> = reg.summaries().into_iter().map(|s| s.id).collect();
        assert_eq!(ids, vec!["aiko-tanaka", "maria-gonzalez"]);
        assert!(!reg.get("james-okafor").unwrap().report.ok);
    }

    #[test]
    fn summary_hides_profile_detail() {
        let s = PersonaSummary::of(&fixtures::maria());
        let json = serde_json::to_string(&s).unwrap();
        assert!(!json.contains("Catholic"));
        assert!(!json.contains("chemo"));
        assert!(s.scenario_teaser.starts_with("Hospital day four"));
        assert!(s.scenario_teaser.ends_with('.'));
    }

    #[test]
    fn empty_registry_lists_nothing() {
        assert!(PersonaRegistry::new().summaries().is_empty());
    }

    #[test]
    fn loads_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.json"), fixtures::MARIA_JSON).unwrap();
        std::fs::write(dir.path().join("b.json"), fixtures::MISSING_BELIEF_SYSTEM_JSON).unwrap();
        std::fs::write(dir.path().join("c.json"), "{ not json").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let reg = PersonaRegistry::load_dir(dir.path()).unwrap();
        assert_eq!(reg.len(), 2);
        assert_eq!(reg.summaries().len(), 1);
        let bad = reg.get("maria-incomplete").unwrap();
        assert_eq!(bad.report.error_paths(), vec!["belief_system"]);
    }
}
