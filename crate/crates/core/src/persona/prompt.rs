//! Prompt assembly.
//!
//! Layout of `system_text`:
//!
//! ```text
//! <instruction body>
//!
//! Guardrails:
//! - <directive>
//!
//! === PATIENT PROFILE ===
//! You are <display_name>.
//!
//! [Scenario]
//! ...
//! [Demographics]
//! Age: 67
//! ```
//!
//! Sections appear in [`SECTION_ORDER`]. Sections whose field is empty are
//! omitted. The guardrail block is omitted when there are no guardrails.

use serde::{Deserialize, Serialize};

use super::{validate_profile, PatientProfile, PersonaError, RolePlayInstructions};
use crate::digest::sha256_hex;

pub const PROFILE_MARKER: &str = "=== PATIENT PROFILE ===";

/// Canonical section order of the rendered profile.
pub const SECTION_ORDER: [&str; 8] = [
    "Scenario",
    "Medical history",
    "Disease onset",
    "Healthcare experience",
    "Belief system",
    "Disease understanding",
    "Personality traits",
    "Demographics",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_text: String,
    pub profile_id: String,
    pub instructions_version: String,
    pub content_hash: String,
}

impl PromptBundle {
    pub fn verify_hash(&self) -> bool {
        sha256_hex(self.system_text.as_bytes()) == self.content_hash
    }

    fn profile_part(&self) -> &str {
        match self.system_text.rfind(PROFILE_MARKER) {
            Some(i) => &self.system_text[i + PROFILE_MARKER.len()..],
            None => "",
        }
    }

    /// The persona name from the `You are <name>.` line.
    pub fn persona_name(&self) -> Option<&str> {
        let line = self.profile_part().lines().find(|l| l.starts_with("You are "))?;
        line.strip_prefix("You are ")?.strip_suffix('.')
    }

    /// Body text of one rendered section, by label.
    pub fn section(&self, label: &str) -> Option<&str> {
        let part = self.profile_part();
        let mut cursor = 0;
        let mut spans: Vec<(&str, usize, usize)> = Vec::new();
        for name in SECTION_ORDER {
            let header = format!("\n[{name}]\n");
            if let Some(pos) = part[cursor..].find(&header) {
                let start = cursor + pos;
                spans.push((name, start, start + header.len()));
                cursor = start + header.len();
            }
        }
        let idx = spans.iter().position(|(n, _, _)| *n == label)?;
        let body_start = spans[idx].2;
        let body_end = spans.get(idx + 1).map(|s| s.1).unwrap_or(part.len());
        Some(part[body_start..body_end].trim_end_matches('\n'))
    }
}

/// Combines shared instructions with a validated profile. Pure and
/// deterministic: equal inputs give byte-equal output.
pub fn assemble_prompt(
    profile: &PatientProfile,
    instructions: &RolePlayInstructions,
) -> Result<PromptBundle, PersonaError> {
    let report = validate_profile(profile);
    if !report.ok {
        return Err(PersonaError::InvalidProfile(report));
    }
    instructions.check()?;

    let mut out = String::new();
    out.push_str(instructions.body.trim_end());
    out.push_str("\n\n");
    if !instructions.guardrails.is_empty() {
        out.push_str("Guardrails:\n");
        for g in &instructions.guardrails {
            out.push_str("- ");
            out.push_str(g);
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str(PROFILE_MARKER);
    out.push('\n');
    out.push_str("You are ");
    out.push_str(&profile.display_name);
    out.push_str(".\n");

    let texts = [
        &profile.scenario,
        &profile.medical_history,
        &profile.disease_onset,
        &profile.healthcare_experience,
        &profile.belief_system,
        &profile.disease_understanding,
    ];
    for (label, text) in SECTION_ORDER.iter().zip(texts) {
        if text.is_empty() {
            continue;
        }
        push_section(&mut out, label, text);
    }

    let traits: String = profile
        .personality_traits
        .iter()
        .map(|t| format!("- {t}\n"))
        .collect();
    push_section(&mut out, SECTION_ORDER[6], traits.trim_end());

    let d = &profile.demographics;
    let mut demo = format!("Age: {}", d.age);
    if !d.pronouns.is_empty() {
        demo.push_str("\nPronouns: ");
        demo.push_str(&d.pronouns);
    }
    if !d.occupation.is_empty() {
        demo.push_str("\nOccupation: ");
        demo.push_str(&d.occupation);
    }
    push_section(&mut out, SECTION_ORDER[7], &demo);

    let content_hash = sha256_hex(out.as_bytes());
    Ok(PromptBundle {
        system_text: out,
        profile_id: profile.id.clone(),
        instructions_version: instructions.version.clone(),
        content_hash,
    })
}

fn push_section(out: &mut String, label: &str, body: &str) {
    out.push('\n');
    out.push('[');
    out.push_str(label);
    out.push_str("]\n");
    out.push_str(body);
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persona::fixtures;
    use proptest::prelude::*;

    fn bundle() -> PromptBundle {
        assemble_prompt(&fixtures::maria(), &RolePlayInstructions::default_set()).unwrap()
    }

    #[test]
    fn sections_in_canonical_order() {
        let b = bundle();
        let positions: Vec<usize> = SECTION_ORDER
            .iter()
            .map(|l| b.system_text.find(&format!("[{l}]")).expect(l))
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
        let marker = b.system_text.find(PROFILE_MARKER).unwrap();
        let guard = b.system_text.find("Guardrails:").unwrap();
        assert!(guard < marker && marker < positions[0]);
    }

    #[test]
    fn rendering_is_deterministic() {
        let a = bundle();
        let b = bundle();
        assert_eq!(a.system_text, b.system_text);
        assert_eq!(a.content_hash, b.content_hash);
        assert!(a.verify_hash());
    }

    #[test]
    fn traits_appear_verbatim() {
        let mut p = fixtures::maria();
        p.personality_traits = vec!["stoic".into(), "skeptical of doctors".into()];
        let b = assemble_prompt(&p, &RolePlayInstructions::default_set()).unwrap();
        assert!(b.system_text.contains("stoic"));
        assert!(b.system_text.contains("skeptical of doctors"));
    }

    #[test]
    fn invalid_profile_refused() {
        let mut p = fixtures::maria();
        p.scenario.clear();
        let err = assemble_prompt(&p, &RolePlayInstructions::default_set()).unwrap_err();
        assert!(matches!(err, PersonaError::InvalidProfile(_)));
    }

    #[test]
    fn sections_read_back() {
        let b = bundle();
        let p = fixtures::maria();
        assert_eq!(b.persona_name(), Some(p.display_name.as_str()));
        assert_eq!(
            b.section("Disease understanding"),
            Some(p.disease_understanding.as_str())
        );
        assert_eq!(b.section("Scenario"), Some(p.scenario.as_str()));
    }

    fn word() -> impl Strategy<Value = String> {
        "[a-z]{3,12}( [a-z]{3,12}){0,6}"
    }

    proptest! {
        // Each field gets a unique tag prefix so one field's text can never be
        // a substring of another's or of the fixed scaffolding.
        #[test]
        fn every_field_appears_exactly_once(
            texts in proptest::collection::vec(word(), 9),
            traits in proptest::collection::vec(word(), 1..4),
        ) {
            let tag = |i: usize, t: &str| format!("Q{i}Z {t}");
            let mut p = fixtures::maria();
            p.display_name = tag(0, &texts[0]);
            p.scenario = tag(1, &texts[1]);
            p.medical_history = tag(2, &texts[2]);
            p.disease_onset = tag(3, &texts[3]);
            p.healthcare_experience = tag(4, &texts[4]);
            p.belief_system = tag(5, &texts[5]);
            p.disease_understanding = tag(6, &texts[6]);
            p.demographics.pronouns = tag(7, &texts[7]);
            p.demographics.occupation = tag(8, &texts[8]);
            p.personality_traits = traits
                .iter()
                .enumerate()
                .map(|(i, t)| tag(20 + i, t))
                .collect();
            let b = assemble_prompt(&p, &RolePlayInstructions::default_set()).unwrap();
            let fields = [
                &p.display_name, &p.scenario, &p.medical_history, &p.disease_onset,
                &p.healthcare_experience, &p.belief_system, &p.disease_understanding,
                &p.demographics.pronouns, &p.demographics.occupation,
            ];
            for f in fields.into_iter().chain(p.personality_traits.iter()) {
                prop_assert_eq!(b.system_text.matches(f.as_str()).count(), 1, "{}", f);
            }
            let again = assemble_prompt(&p, &RolePlayInstructions::default_set()).unwrap();
            prop_assert_eq!(&b.system_text, &again.system_text);
            prop_assert_eq!(b.section("Disease understanding"), Some(p.disease_understanding.as_str()));
        }
    }
}
