//! Server configuration, read from a TOML file. Every section is optional;
//! the defaults run a fully offline server on localhost with the bundled
//! personas. Credentials never appear here, only the names of the
//! environment variables that hold them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::providers::{ConfigError, DialogueParams, ProvidersConfig};

#[derive(Debug, thiserror::Error)]
pub enum AppConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Provider(#[from] ConfigError),
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub bind: String,
    /// Origins allowed to call the API from a browser.
    pub cors_origins: Vec<String>,
    /// Directory of built console files served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerSection {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            cors_origins: vec![
                "http://localhost:8080".into(),
                "http://127.0.0.1:8080".into(),
                "http://localhost:5173".into(),
            ],
            static_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StorageSection {
    pub assets_root: PathBuf,
    pub sessions_dir: PathBuf,
    pub clip_budget_bytes: u64,
    /// Closed sessions older than this are deleted at startup. Unset keeps
    /// everything.
    pub retention_days: Option<u32>,
}

impl Default for StorageSection {
    fn default() -> Self {
        Self {
            assets_root: "synthpatient-data/store".into(),
            sessions_dir: "synthpatient-data/sessions".into(),
            clip_budget_bytes: crate::assets::DEFAULT_CLIP_BUDGET_BYTES,
            retention_days: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PersonaSection {
    /// Directory of profile documents. Unset uses the bundled personas.
    pub dir: Option<PathBuf>,
    /// Role-play instruction file. Unset uses the bundled default set.
    pub instructions: Option<PathBuf>,
    /// Register silent stand-in base videos and voices for personas whose
    /// assets are missing, so offline and simulated modes work out of the box.
    pub install_placeholders: bool,
}

impl Default for PersonaSection {
    fn default() -> Self {
        Self {
            dir: None,
            instructions: None,
            install_placeholders: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub cache_enabled: bool,
    pub dialogue: DialogueParams,
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self {
            cache_enabled: true,
            dialogue: DialogueParams::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub server: ServerSection,
    pub storage: StorageSection,
    pub personas: PersonaSection,
    pub pipeline: PipelineSection,
    pub providers: ProvidersConfig,
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self, AppConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| AppConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let config: AppConfig = toml::from_str(&text).map_err(|e| AppConfigError::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Resolves relative paths against `base` (normally the config file's
    /// directory).
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.storage.assets_root);
        fix(&mut self.storage.sessions_dir);
        for p in [
            &mut self.personas.dir,
            &mut self.personas.instructions,
            &mut self.server.static_dir,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), AppConfigError> {
        self.providers.validate()?;
        self.pipeline
            .dialogue
            .validate()
            .map_err(|e| AppConfigError::Invalid(format!("pipeline.dialogue: {e}")))?;
        self.server
            .bind
            .parse::<std::net::SocketAddr>()
            .map_err(|_| AppConfigError::Invalid(format!("server.bind `{}` is not host:port", self.server.bind)))?;
        if self.storage.clip_budget_bytes == 0 {
            return Err(AppConfigError::Invalid("storage.clip_budget_bytes must be positive".into()));
        }
        Ok(())
    }
}
