use serde::{Deserialize, Serialize};

use super::ProviderError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DialogueParams {
    pub temperature: f64,
    pub max_reply_tokens: u32,
    /// Completed turns replayed to the dialogue provider.
    pub history_window: usize,
}

impl Default for DialogueParams {
    fn default() -> Self {
        Self {
            temperature: 0.8,
            max_reply_tokens: 300,
            history_window: 20,
        }
    }
}

impl DialogueParams {
    pub fn validate(&self) -> Result<(), ProviderError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ProviderError::InvalidInput(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_reply_tokens == 0 {
            return Err(ProviderError::InvalidInput(
                "max_reply_tokens must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Voice rendering controls, each in `[0, 1]`. Adapters map these onto
/// whatever scale the vendor uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoiceParams {
    pub stability: f64,
    pub similarity: f64,
    pub style: f64,
}

impl Default for VoiceParams {
    fn default() -> Self {
        Self {
            stability: 0.5,
            similarity: 0.75,
            style: 0.0,
        }
    }
}

impl VoiceParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("stability", self.stability),
            ("similarity", self.similarity),
            ("style", self.style),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} = {v} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Exact textual form used in cache keys. `f64`'s `Display` is
    /// round-trip exact, so distinct values never share a key.
    pub fn key_fragment(&self) -> String {
        format!("{}/{}/{}", self.stability, self.similarity, self.style)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dialogue_defaults() {
        let p = DialogueParams::default();
        assert_eq!(p.temperature, 0.8);
        assert_eq!(p.history_window, 20);
        assert!(p.validate().is_ok());
        assert!(DialogueParams { temperature: 2.1, ..p }.validate().is_err());
        assert!(DialogueParams { temperature: -0.1, ..p }.validate().is_err());
    }

    #[test]
    fn voice_ranges() {
        assert!(VoiceParams::default().validate().is_ok());
        let bad = VoiceParams { style: 1.5, ..Default::default() };
        assert!(bad.validate().unwrap_err().contains("style"));
    }

    #[test]
    fn key_fragment_distinguishes_tiny_changes() {
        let a = VoiceParams::default();
        let b = VoiceParams { stability: 0.5 + f64::EPSILON, ..a };
        assert_ne!(a.key_fragment(), b.key_fragment());
    }
}
