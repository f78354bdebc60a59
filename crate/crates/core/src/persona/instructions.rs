//! Shared role-play instruction sets.
//!
//! Instruction sets live in versioned text files:
//!
//! ```text
//! version: default-v1
//! ---
//! <free text body, any number of lines>
//! ---
//! guardrails:
//! - Stay in character as the patient.
//! - ...
//! ```
//!
//! The guardrail block is optional.

use serde::{Deserialize, Serialize};

use super::PersonaError;

const DEFAULT_TEXT: &str = include_str!("../../instructions/default-v1.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolePlayInstructions {
    pub version: String,
    pub body: String,
    pub guardrails: Vec<String>,
}

impl RolePlayInstructions {
    /// The instruction set bundled with the crate.
    pub fn default_set() -> Self {
        Self::parse(DEFAULT_TEXT).expect("bundled instructions parse")
    }

    pub fn parse(text: &str) -> Result<Self, PersonaError> {
        let bad = |line: usize, message: &str| PersonaError::Parse {
            line,
            column: 0,
            field: None,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate().peekable();

        let (_, first) = lines.next().ok_or_else(|| bad(1, "empty instruction file"))?;
        let version = first
            .strip_prefix("version:")
            .ok_or_else(|| bad(1, "first line must be `version: <id>`"))?
            .trim()
            .to_string();
        match lines.next() {
            Some((_, "---")) => {}
            Some((i, _)) => return Err(bad(i + 1, "expected `---` after version line")),
            None => return Err(bad(2, "missing instruction body")),
        }

        let mut body = Vec::new();
        let mut closed = false;
        for (_, line) in lines.by_ref() {
            if line == "---" {
                closed = true;
                break;
            }
            body.push(line);
        }

        let mut guardrails = Vec::new();
        if closed {
            match lines.next() {
                Some((_, l)) if l.trim() == "guardrails:" => {}
                Some((i, _)) => return Err(bad(i + 1, "expected `guardrails:`")),
                None => {}
            }
            for (i, line) in lines {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let item = line
                    .strip_prefix("- ")
                    .ok_or_else(|| bad(i + 1, "guardrails must be `- ` list items"))?;
                guardrails.push(item.trim().to_string());
            }
        }

        let instructions = Self {
            version,
            body: body.join("\n").trim().to_string(),
            guardrails,
        };
        instructions.check()?;
        Ok(instructions)
    }

    pub fn check(&self) -> Result<(), PersonaError> {
        let missing = |what: &str| PersonaError::Parse {
            line: 0,
            column: 0,
            field: Some(what.to_string()),
            message: format!("instruction {what} must not be empty"),
        };
        if self.version.trim().is_empty() {
            return Err(missing("version"));
        }
        if self.body.trim().is_empty() {
            return Err(missing("body"));
        }
        Ok(())
    }
}
