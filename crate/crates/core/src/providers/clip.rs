use serde::{Deserialize, Serialize};

use super::AudioBlob;
use crate::digest::sha256_hex;

/// Container tag of clips produced by the offline lip-sync binding: the
/// driving audio as a WAV file.
pub const OFFLINE_CONTAINER: &str = "wav";

/// Binds a rendered clip to the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipManifest {
    pub base_video_id: String,
    pub audio_sha256: String,
    pub duration_ms: u64,
}

impl ClipManifest {
    pub fn for_audio(base_video_id: &str, audio: &AudioBlob) -> Self {
        Self {
            base_video_id: base_video_id.to_string(),
            audio_sha256: audio.sha256(),
            duration_ms: audio.duration_ms(),
        }
    }

    /// Compact JSON, keys in declaration order:
    /// `{"base_video_id":…,"audio_sha256":…,"duration_ms":…}`.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    pub fn clip_id(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClipBlob {
    pub container: String,
    pub bytes: Vec<u8>,
    pub duration_ms: u64,
    pub manifest: ClipManifest,
}

impl ClipBlob {
    pub fn clip_id(&self) -> String {
        self.manifest.clip_id()
    }

    pub fn content_type(&self) -> &'static str {
        content_type_for(&self.container)
    }
}

pub fn content_type_for(container: &str) -> &'static str {
    match container {
        "wav" => "audio/wav",
        "mp4" => "video/mp4",
        "webm" => "video/webm",
        "mov" => "video/quicktime",
        _ => "application/octet-stream",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_id_matches_independent_digest() {
        let m = ClipManifest {
            base_video_id: "maria-base-01".into(),
            audio_sha256: "0".repeat(64),
            duration_ms: 1500,
        };
        assert_eq!(
            m.canonical_json(),
            format!(
                "{{\"base_video_id\":\"maria-base-01\",\"audio_sha256\":\"{}\",\"duration_ms\":1500}}",
                "0".repeat(64)
            )
        );
        // python3 -c 'import hashlib,json;print(hashlib.sha256(json.dumps({"base_video_id":"maria-base-01","audio_sha256":"0"*64,"duration_ms":1500},separators=(",",":")).encode()).hexdigest())'
        assert_eq!(m.clip_id(), CLIP_ID_ORACLE);
    }

    const CLIP_ID_ORACLE: &str = "0acad6d8ff282534ea49ed6489b512a7977d117c91fa6d8c4c53f786473ffcb3";
}
