//! Decision agents: a remote chat-completion client and deterministic
//! scripted policies, plus a bounded worker pool for issuing requests.

mod client;
mod pool;
mod scripted;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bargaining::{BargainingBoard, Player};

pub use client::{complete_chat, ChatClient};
pub use pool::run_bounded;
pub use scripted::{scripted_respond, ScriptedPolicy, BOARD_LABELS};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent config: {0}")]
    Config(String),
    #[error("transport failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("provider returned status {status}: {body}")]
    Provider { status: u16, body: String },
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("scripted policy: {0}")]
    Policy(String),
    #[error("audit log: {0}")]
    Audit(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReasoningEffort {
    #[default]
    None,
    Low,
    Medium,
    High,
}

impl ReasoningEffort {
    pub fn as_str(self) -> &'static str {
        match self {
            ReasoningEffort::None => "none",
            ReasoningEffort::Low => "low",
            ReasoningEffort::Medium => "medium",
            ReasoningEffort::High => "high",
        }
    }
}

fn default_max_retries() -> u32 {
    3
}

fn default_timeout_ms() -> u64 {
    120_000
}

fn default_parallelism() -> usize {
    1
}

fn default_backoff_ms() -> u64 {
    500
}

/// Connection and sampling settings for one remote model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub endpoint_url: String,
    pub model_name: String,
    /// `None` leaves the provider default in place.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub reasoning_effort: ReasoningEffort,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout_ms")]
    pub request_timeout_ms: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Backoff before the first retry; doubles on each further retry.
    #[serde(default = "default_backoff_ms")]
    pub initial_backoff_ms: u64,
    /// Name of the environment variable holding a bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    /// JSON-lines file receiving every request/response pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_log: Option<PathBuf>,
}

impl AgentConfig {
    pub fn new(endpoint_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            model_name: model_name.into(),
            temperature: None,
            reasoning_effort: ReasoningEffort::None,
            max_retries: default_max_retries(),
            request_timeout_ms: default_timeout_ms(),
            parallelism: default_parallelism(),
            initial_backoff_ms: default_backoff_ms(),
            api_key_env: None,
            audit_log: None,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.endpoint_url.trim().is_empty() {
            return Err(AgentError::Config("empty endpoint_url".into()));
        }
        if self.model_name.trim().is_empty() {
            return Err(AgentError::Config("empty model_name".into()));
        }
        if self.parallelism == 0 {
            return Err(AgentError::Config("parallelism must be at least 1".into()));
        }
        if let Some(t) = self.temperature {
            if !(t.is_finite() && t >= 0.0) {
                return Err(AgentError::Config(format!("temperature {t} is not >= 0")));
            }
        }
        Ok(())
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_millis(self.request_timeout_ms)
    }
}

/// What the agent is answering about.
#[derive(Debug, Clone, Copy)]
pub enum PromptContext<'a> {
    /// Option labels in displayed order.
    Options(&'a [String]),
    Board {
        board: &'a BargainingBoard,
        me: Player,
    },
}

/// Either a remote model or a scripted policy behind one call.
#[derive(Debug)]
pub enum Agent {
    Remote(ChatClient),
    Scripted(ScriptedPolicy),
}

impl Agent {
    pub fn respond(
        &self,
        prompt: &str,
        context: PromptContext<'_>,
        seed: u64,
    ) -> Result<String, AgentError> {
        match self {
            Agent::Remote(client) => client.complete_chat(prompt),
            Agent::Scripted(policy) => scripted_respond(context, policy, seed),
        }
    }

    pub fn is_remote(&self) -> bool {
        matches!(self, Agent::Remote(_))
    }

    pub fn parallelism(&self) -> usize {
        match self {
            Agent::Remote(client) => client.config().parallelism,
            Agent::Scripted(_) => 1,
        }
    }
}
