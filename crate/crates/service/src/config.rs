use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use titl_core::{SearchMode, TokenizerConfig};

use crate::error::ServiceError;

/// Service settings. Every key of the TOML config file maps to one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceConfig {
    pub bind: String,
    pub index_path: PathBuf,
    pub model_path: PathBuf,
    pub default_k: usize,
    pub default_mode: String,
    pub default_alpha: f64,
    pub session_ttl_secs: u64,
    pub snapshot_path: Option<PathBuf>,
    /// Allowed browser origins; `"*"` allows any origin, empty disables CORS.
    pub cors_origins: Vec<String>,
    pub lowercase: bool,
    pub strip_punctuation: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1:8077".into(),
            index_path: PathBuf::from("index.bin"),
            model_path: PathBuf::from("model.bin"),
            default_k: 5,
            default_mode: "embedding".into(),
            default_alpha: 0.5,
            session_ttl_secs: 24 * 60 * 60,
            snapshot_path: None,
            cors_origins: vec!["http://localhost:3000".into()],
            lowercase: false,
            strip_punctuation: false,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ServiceError> {
        let config: ServiceConfig =
            toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        let addr = self.socket_addr()?;
        if addr.port() == 0 {
            return Err(ServiceError::Config("bind: port must be in [1, 65535]".into()));
        }
        if self.default_k == 0 {
            return Err(ServiceError::Config("default_k: must be at least 1".into()));
        }
        if self.session_ttl_secs == 0 {
            return Err(ServiceError::Config("session_ttl_secs: must be positive".into()));
        }
        self.default_search_mode()?;
        Ok(())
    }

    pub fn socket_addr(&self) -> Result<SocketAddr, ServiceError> {
        self.bind
            .parse()
            .map_err(|e| ServiceError::Config(format!("bind: {:?} is not host:port ({e})", self.bind)))
    }

    pub fn default_search_mode(&self) -> Result<SearchMode, ServiceError> {
        SearchMode::parse(&self.default_mode, Some(self.default_alpha))
            .map_err(|e| ServiceError::Config(format!("default_mode/default_alpha: {e}")))
    }

    pub fn session_ttl(&self) -> Duration {
        Duration::from_secs(self.session_ttl_secs)
    }

    pub fn tokenizer(&self) -> TokenizerConfig {
        TokenizerConfig {
            lowercase: self.lowercase,
            strip_punctuation: self.strip_punctuation,
        }
    }
}
