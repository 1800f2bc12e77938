// SPDX-License-Identifier: Apache-2.0

//! Generative text providers.
//!
//! Two implementations share one trait: [`MockProvider`], a deterministic
//! offline responder used by default and in every test, and [`LiveProvider`],
//! a chat-completion client over HTTPS. Callers never branch on which one is
//! active; both return the same [`ProviderResult`] shape.

mod live;
mod mock;

use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ConfigError;
use crate::footprint::{ModelProfile, QueryUsage};

pub use live::LiveProvider;
pub use mock::{MockProvider, ResponseClass};

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("no API key found in environment variable {0}")]
    MissingApiKey(String),
    #[error("provider rejected credentials (HTTP {0})")]
    Auth(u16),
    #[error("provider request timed out after {0:.1} s")]
    Timeout(f64),
    #[error("network error: {0}")]
    Network(String),
    #[error("provider returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed provider response: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    #[default]
    Mock,
    Live,
}

impl std::str::FromStr for ProviderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(ProviderMode::Mock),
            "live" => Ok(ProviderMode::Live),
            other => Err(format!("unknown provider mode '{other}' (expected mock or live)")),
        }
    }
}

impl std::fmt::Display for ProviderMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProviderMode::Mock => "mock",
            ProviderMode::Live => "live",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub mode: ProviderMode,
    pub mock_seed: u64,
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_s: f64,
    /// Passed through verbatim into the chat-completion request body
    /// (temperature, top_p, ...).
    #[serde(default)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(ConfigError::Invalid("provider.timeout_s must be > 0".into()));
        }
        Ok(())
    }

    pub fn api_key(&self) -> Option<String> {
        std::env::var(&self.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderRequest {
    pub prompt_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_hint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_output_tokens: Option<u64>,
}

impl ProviderRequest {
    pub fn new(prompt_text: impl Into<String>) -> Result<Self, ProviderError> {
        let prompt_text = prompt_text.into();
        if prompt_text.trim().is_empty() {
            return Err(ProviderError::EmptyPrompt);
        }
        Ok(Self {
            prompt_text,
            system_hint: None,
            max_output_tokens: None,
        })
    }

    pub fn with_system_hint(mut self, hint: impl Into<String>) -> Self {
        self.system_hint = Some(hint.into());
        self
    }

    pub fn with_max_output_tokens(mut self, n: u64) -> Self {
        self.max_output_tokens = Some(n);
        self
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.prompt_text.trim().is_empty() {
            Err(ProviderError::EmptyPrompt)
        } else {
            Ok(())
        }
    }
}

/// A refusal is still a completed inference and still has a footprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionOutcome {
    Completed,
    Refused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderResult {
    pub response_text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub measured_latency_s: f64,
    pub provider_name: String,
    pub outcome: CompletionOutcome,
}

impl ProviderResult {
    pub fn usage(&self) -> QueryUsage {
        QueryUsage::new(self.input_tokens, self.output_tokens).with_latency(self.measured_latency_s)
    }

    pub fn is_refusal(&self) -> bool {
        self.outcome == CompletionOutcome::Refused
    }
}

#[async_trait]
pub trait CompletionProvider: Send + Sync {
    fn name(&self) -> &str;

    async fn complete(&self, request: &ProviderRequest) -> Result<ProviderResult, ProviderError>;
}

/// Token estimate used when a provider omits usage metadata: one token per
/// four characters, rounded up.
pub fn count_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

/// Builds the provider for `mode`. Live mode fails fast when no key is set.
pub fn build_provider(
    config: &ProviderConfig,
    mode: ProviderMode,
    profile: &ModelProfile,
) -> Result<Arc<dyn CompletionProvider>, ProviderError> {
    match mode {
        ProviderMode::Mock => Ok(Arc::new(MockProvider::new(config.mock_seed, profile.clone()))),
        ProviderMode::Live => Ok(Arc::new(LiveProvider::from_config(config)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_rule() {
        assert_eq!(count_tokens(""), 0);
        assert_eq!(count_tokens("tomatoes"), 2);
        assert_eq!(count_tokens(&"a".repeat(401)), 101);
        assert_eq!(count_tokens("abc"), 1);
    }

    #[test]
    fn empty_prompt_rejected() {
        assert!(matches!(ProviderRequest::new("   \n"), Err(ProviderError::EmptyPrompt)));
        assert!(ProviderRequest::new(" hi ").is_ok());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("mock".parse::<ProviderMode>().unwrap(), ProviderMode::Mock);
        assert_eq!("live".parse::<ProviderMode>().unwrap(), ProviderMode::Live);
        assert!("remote".parse::<ProviderMode>().is_err());
    }
}
