//! Synthetic patient profiles and the prompt bundle handed to the dialogue
//! provider.

mod instructions;
mod profile;
mod prompt;
mod registry;

pub mod fixtures;

use thiserror::Error;

pub use instructions::RolePlayInstructions;
pub use profile::{
    is_valid_slug, load_profile, parse_profile, validate_profile, Demographics, Issue,
    LoadedProfile, PatientProfile, Severity, ValidationReport, MAX_FIELD_BYTES, PROFILE_KEYS,
};
pub use prompt::{assemble_prompt, PromptBundle, PROFILE_MARKER, SECTION_ORDER};
pub use registry::{PersonaEntry, PersonaRegistry, PersonaSummary};

#[derive(Debug, Error)]
pub enum PersonaError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        field: Option<String>,
        message: String,
    },
    #[error("profile failed validation: {}", .0.error_paths().join(", "))]
    Validation(ValidationReport),
    #[error("cannot assemble prompt from invalid profile: {}", .0.error_paths().join(", "))]
    InvalidProfile(ValidationReport),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl PersonaError {
    fn from_json(e: &serde_json::Error, field: Option<String>) -> Self {
        PersonaError::Parse {
            line: e.line(),
            column: e.column(),
            field,
            message: e.to_string(),
        }
    }

    /// The validation report behind a validation-type failure.
    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            PersonaError::Validation(r) | PersonaError::InvalidProfile(r) => Some(r),
            _ => None,
        }
    }
}

/// First sentence of `text`: everything up to and including the first
/// `.`, `!` or `?` that is followed by whitespace or the end of the text.
/// Returns the whole (trimmed) text when there is no such terminator.
pub fn first_sentence(text: &str) -> &str {
    let text = text.trim();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            match chars.peek() {
                None => return text,
                Some((_, next)) if next.is_whitespace() => return &text[..i + c.len_utf8()],
                _ => {}
            }
        }
    }
    text
}
