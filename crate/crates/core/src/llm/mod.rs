//! Language-model bridge for the three naming/judging/navigation functions.
//!
//! Each function is a primed chat session: a mission description plus worked
//! examples, resent whole on every call, followed by one request message. Replies
//! are expected to carry the answer inside `[[...]]`. The [`LlmBackend::Mock`]
//! variant answers from a fixed rule set and never touches the network.

mod mock;
mod parse;
mod prompts;
mod wire;

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::{CanonicalRule, MockRules};
pub use parse::{extract_bracketed, parse_cluster_reply, parse_selection, parse_verdict, SELECTION_SIMILARITY};
pub use prompts::{PromptSet, PromptTemplate};
#[cfg(feature = "wire")]
pub use wire::HttpTransport;
pub use wire::{reply_content, ChatRequest, ChatTransport, TransportError, WireBackend, WireSettings};

pub const ENV_LLM_URL: &str = "TEXTLAND_LLM_URL";
pub const ENV_LLM_KEY: &str = "TEXTLAND_LLM_KEY";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("language model backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("could not parse model reply: {0:?}")]
    UnparseableReply(String),
    #[error("reply names no candidate: {0:?}")]
    NoSelection(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("prompt template: {0}")]
    Template(String),
    #[error("backend config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

/// Priming messages plus model parameters for one function.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptSession {
    pub priming: Vec<ChatMessage>,
    pub model_id: String,
    pub temperature: f64,
}

impl PromptSession {
    /// The full message list for one call: priming followed by `request`.
    pub fn messages(&self, request: String) -> Vec<ChatMessage> {
        let mut msgs = self.priming.clone();
        msgs.push(ChatMessage::new(Role::User, request));
        msgs
    }
}

pub enum LlmBackend {
    Wire(WireBackend),
    Mock(MockRules),
}

impl std::fmt::Debug for LlmBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LlmBackend::Wire(w) => f.debug_tuple("Wire").field(&w.settings().model).finish(),
            LlmBackend::Mock(r) => f.debug_tuple("Mock").field(r).finish(),
        }
    }
}

impl LlmBackend {
    /// Picks the most meaningful spelling for a group of homologous strings.
    pub fn cluster_name(&self, members: &IndexMap<String, u64>) -> Result<String, LlmError> {
        if members.is_empty() {
            return Err(LlmError::EmptyInput("cluster members"));
        }
        match self {
            LlmBackend::Mock(rules) => Ok(rules.cluster_name(members)),
            LlmBackend::Wire(w) => {
                let listed = members
                    .iter()
                    .map(|(m, c)| format!("{m} x{c}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                let reply = w.ask(&w.prompts().cluster, &[("members", &listed)])?;
                let names: Vec<&str> = members.keys().map(String::as_str).collect();
                parse_cluster_reply(&reply, &names)
            }
        }
    }

    /// Whether `name` denotes a shop-like landmark.
    pub fn judge_landmark(&self, name: &str) -> Result<bool, LlmError> {
        if name.trim().is_empty() {
            return Err(LlmError::EmptyInput("landmark name"));
        }
        match self {
            LlmBackend::Mock(rules) => Ok(rules.judge_landmark(name)),
            LlmBackend::Wire(w) => {
                let reply = w.ask(&w.prompts().judge, &[("name", name)])?;
                parse_verdict(&reply)
            }
        }
    }

    /// Chooses one of `names` in answer to a free-form `query`. The result is
    /// always an exact element of `names`.
    pub fn select_landmark(&self, query: &str, names: &[String]) -> Result<String, LlmError> {
        if names.is_empty() {
            return Err(LlmError::EmptyInput("candidate names"));
        }
        if query.trim().is_empty() {
            return Err(LlmError::EmptyInput("query"));
        }
        if let [only] = names {
            return Ok(only.clone());
        }
        match self {
            LlmBackend::Mock(rules) => rules.select_landmark(query, names),
            LlmBackend::Wire(w) => {
                let listed = names.join(" ");
                let reply = w.ask(&w.prompts().navigate, &[("names", &listed), ("query", query.trim())])?;
                parse_selection(&reply, names)
            }
        }
    }
}

/// Backend configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum BackendConfig {
    Mock {
        #[serde(default)]
        rules: Option<MockRules>,
        /// Path to a rules file, relative to the config file.
        #[serde(default)]
        rules_path: Option<String>,
    },
    Wire(WireSettings),
}

impl BackendConfig {
    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))
    }

    /// Builds the backend. Relative paths resolve against `base_dir`;
    /// `TEXTLAND_LLM_URL` / `TEXTLAND_LLM_KEY` fill in a missing url / key.
    pub fn into_backend(self, base_dir: &Path) -> Result<LlmBackend, LlmError> {
        match self {
            BackendConfig::Mock { rules: Some(r), .. } => Ok(LlmBackend::Mock(r)),
            BackendConfig::Mock {
                rules: None,
                rules_path: Some(p),
            } => Ok(LlmBackend::Mock(MockRules::load(&base_dir.join(p))?)),
            BackendConfig::Mock { .. } => Err(LlmError::Config("mock backend needs `rules` or `rules_path`".into())),
            BackendConfig::Wire(mut settings) => {
                if settings.url.is_none() {
                    settings.url = std::env::var(ENV_LLM_URL).ok();
                }
                if settings.api_key.is_none() {
                    settings.api_key = std::env::var(ENV_LLM_KEY).ok();
                }
                let prompts = match &settings.prompts_dir {
                    Some(dir) => PromptSet::load_dir(&base_dir.join(dir))?,
                    None => PromptSet::builtin(),
                };
                WireBackend::http(settings, prompts).map(LlmBackend::Wire)
            }
        }
    }
}
