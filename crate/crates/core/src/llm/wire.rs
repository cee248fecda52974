//! OpenAI-compatible chat-completion transport.
//!
//! Every call is self-contained: the full priming is resent with the request, so
//! a retried call cannot leave a remote session in a half-primed state.

use serde::{Deserialize, Serialize};

use super::{ChatMessage, LlmError, PromptSession, PromptSet, PromptTemplate};

fn default_model() -> String {
    "gpt-3.5-turbo".to_owned()
}

fn default_timeout() -> f64 {
    30.0
}

fn default_retries() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireSettings {
    /// Full chat-completions endpoint URL.
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default)]
    pub api_key: Option<String>,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    /// Directory holding `cluster.txt`, `judge.txt`, `navigate.txt`.
    #[serde(default)]
    pub prompts_dir: Option<String>,
}

impl Default for WireSettings {
    fn default() -> Self {
        Self {
            url: None,
            api_key: None,
            model: default_model(),
            temperature: 0.0,
            timeout_s: default_timeout(),
            retries: default_retries(),
            prompts_dir: None,
        }
    }
}

/// Request body: `{model, temperature, messages: [{role, content}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<ChatMessage>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportError {
    pub message: String,
    pub retryable: bool,
}

pub trait ChatTransport: Send + Sync {
    /// Sends one request and returns the first choice's message content.
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError>;
}

/// Extracts `choices[0].message.content` from a chat-completion response body.
pub fn reply_content(body: &str) -> Result<String, TransportError> {
    #[derive(Deserialize)]
    struct Reply {
        choices: Vec<Choice>,
    }
    #[derive(Deserialize)]
    struct Choice {
        message: Message,
    }
    #[derive(Deserialize)]
    struct Message {
        content: Option<String>,
    }
    let malformed = |m: String| TransportError {
        message: m,
        retryable: false,
    };
    let reply: Reply = serde_json::from_str(body).map_err(|e| malformed(format!("malformed response: {e}")))?;
    reply
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| malformed("response has no message content".into()))
}

pub struct WireBackend {
    settings: WireSettings,
    prompts: PromptSet,
    transport: Box<dyn ChatTransport>,
}

impl WireBackend {
    pub fn with_transport(settings: WireSettings, prompts: PromptSet, transport: Box<dyn ChatTransport>) -> Self {
        Self {
            settings,
            prompts,
            transport,
        }
    }

    #[cfg(feature = "wire")]
    pub fn http(settings: WireSettings, prompts: PromptSet) -> Result<Self, LlmError> {
        let transport = HttpTransport::new(&settings)?;
        Ok(Self::with_transport(settings, prompts, Box::new(transport)))
    }

    #[cfg(not(feature = "wire"))]
    pub fn http(_settings: WireSettings, _prompts: PromptSet) -> Result<Self, LlmError> {
        Err(LlmError::Config("built without the `wire` feature".into()))
    }

    pub fn settings(&self) -> &WireSettings {
        &self.settings
    }

    pub fn prompts(&self) -> &PromptSet {
        &self.prompts
    }

    pub fn session(&self, template: &PromptTemplate) -> PromptSession {
        PromptSession {
            priming: template.priming.clone(),
            model_id: self.settings.model.clone(),
            temperature: self.settings.temperature,
        }
    }

    /// Sends the primed request, retrying retryable failures up to `retries` times.
    pub fn ask(&self, template: &PromptTemplate, values: &[(&str, &str)]) -> Result<String, LlmError> {
        let session = self.session(template);
        let request = ChatRequest {
            model: session.model_id.clone(),
            temperature: session.temperature,
            messages: session.messages(template.render(values)),
        };
        let mut last = String::new();
        for _ in 0..=self.settings.retries {
            match self.transport.send(&request) {
                Ok(reply) => return Ok(reply),
                Err(e) if e.retryable => last = e.message,
                Err(e) => return Err(LlmError::BackendUnavailable(e.message)),
            }
        }
        Err(LlmError::BackendUnavailable(last))
    }
}

#[cfg(feature = "wire")]
pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
}

#[cfg(feature = "wire")]
impl HttpTransport {
    pub fn new(settings: &WireSettings) -> Result<Self, LlmError> {
        let url = settings
            .url
            .clone()
            .ok_or_else(|| LlmError::Config(format!("no endpoint url (set `url` or {})", super::ENV_LLM_URL)))?;
        if !(settings.timeout_s > 0.0) {
            return Err(LlmError::Config("timeout_s must be positive".into()));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(std::time::Duration::from_secs_f64(settings.timeout_s)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            agent,
            url,
            api_key: settings.api_key.clone(),
        })
    }
}

#[cfg(feature = "wire")]
impl ChatTransport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(request).map_err(|e| TransportError {
            message: e.to_string(),
            retryable: true,
        })?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| TransportError {
            message: e.to_string(),
            retryable: true,
        })?;
        if !(200..300).contains(&status) {
            return Err(TransportError {
                message: format!("HTTP {status}: {body}"),
                retryable: status == 429 || status >= 500,
            });
        }
        reply_content(&body)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::*;
    use crate::llm::{LlmBackend, Role};

    /// Replays canned results and records every request.
    struct Scripted {
        replies: Mutex<Vec<Result<String, TransportError>>>,
        seen: Mutex<Vec<ChatRequest>>,
    }

    impl Scripted {
        fn new(mut replies: Vec<Result<String, TransportError>>) -> Self {
            replies.reverse();
            Self {
                replies: Mutex::new(replies),
                seen: Mutex::new(Vec::new()),
            }
        }
    }

    impl ChatTransport for std::sync::Arc<Scripted> {
        fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
            self.seen.lock().unwrap().push(request.clone());
            self.replies.lock().unwrap().pop().expect("script exhausted")
        }
    }

    fn backend(replies: Vec<Result<String, TransportError>>) -> (LlmBackend, std::sync::Arc<Scripted>) {
        let script = std::sync::Arc::new(Scripted::new(replies));
        let wire = WireBackend::with_transport(WireSettings::default(), PromptSet::builtin(), Box::new(script.clone()));
        (LlmBackend::Wire(wire), script)
    }

    fn timeout() -> Result<String, TransportError> {
        Err(TransportError { message: "timed out".into(), retryable: true })
    }

    #[test]
    fn request_carries_full_priming_each_time() {
        let (b, script) = backend(vec![Ok("[[1]]".into()), Ok("[[0]]".into())]);
        assert!(b.judge_landmark("KFC").unwrap());
        assert!(!b.judge_landmark("DANGER").unwrap());
        let seen = script.seen.lock().unwrap();
        assert_eq!(seen[0].messages.len(), seen[1].messages.len());
        assert_eq!(seen[0].messages[0].role, Role::System);
        assert_eq!(seen[0].temperature, 0.0);
        let last = seen[1].messages.last().unwrap();
        assert_eq!(last.role, Role::User);
        assert!(last.content.contains("[[DANGER]]"));
    }

    #[test]
    fn retries_resend_identical_requests() {
        let (b, script) = backend(vec![timeout(), timeout(), Ok("go to [[HUAWER]]".into())]);
        let names: Vec<String> = ["ALIENWARE", "HUAWEI"].map(String::from).to_vec();
        assert_eq!(b.select_landmark("where can I buy a phone", &names).unwrap(), "HUAWEI");
        let seen = script.seen.lock().unwrap();
        assert_eq!(seen.len(), 3);
        assert!(seen.iter().all(|r| *r == seen[0]));
        assert!(seen[0].messages.last().unwrap().content.contains("[[ALIENWARE HUAWEI]]"));
    }

    #[test]
    fn gives_up_after_retries() {
        let (b, _) = backend(vec![timeout(), timeout(), timeout()]);
        assert!(matches!(b.judge_landmark("KFC"), Err(LlmError::BackendUnavailable(_))));
        let fatal = Err(TransportError { message: "HTTP 401".into(), retryable: false });
        let (b, script) = backend(vec![fatal]);
        assert!(matches!(b.judge_landmark("KFC"), Err(LlmError::BackendUnavailable(_))));
        assert_eq!(script.seen.lock().unwrap().len(), 1);
    }

    #[test]
    fn cluster_request_lists_counts() {
        let (b, script) = backend(vec![Ok("which is [[Don't Touch]]".into())]);
        let members = [("Don't-Touch", 3u64), ("Dont'tTouch", 1), ("Don'tlouch", 2)]
            .map(|(k, v)| (k.to_owned(), v))
            .into_iter()
            .collect();
        assert_eq!(b.cluster_name(&members).unwrap(), "Don't Touch");
        let seen = script.seen.lock().unwrap();
        assert!(seen[0].messages.last().unwrap().content.contains("Don't-Touch x3, Dont'tTouch x1, Don'tlouch x2"));
    }

    #[test]
    fn unparseable_verdict() {
        let (b, _) = backend(vec![Ok("I cannot tell.".into())]);
        assert!(matches!(b.judge_landmark("GUCCI"), Err(LlmError::UnparseableReply(_))));
    }

    #[test]
    fn reply_content_shapes() {
        assert_eq!(
            reply_content(r#"{"choices":[{"index":0,"message":{"role":"assistant","content":"[[KFC]]"}}]}"#).unwrap(),
            "[[KFC]]"
        );
        assert!(reply_content(r#"{"choices":[]}"#).is_err());
        assert!(reply_content("not json").is_err());
    }

    #[test]
    fn request_body_shape() {
        let req = ChatRequest {
            model: "m".into(),
            temperature: 0.0,
            messages: vec![ChatMessage::new(Role::System, "s"), ChatMessage::new(Role::User, "u")],
        };
        let v = serde_json::to_value(&req).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"model":"m","temperature":0.0,"messages":[{"role":"system","content":"s"},{"role":"user","content":"u"}]})
        );
    }
}
