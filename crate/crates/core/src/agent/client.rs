use std::fs::{File, OpenOptions};
use std::io::Write;
use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

use super::{AgentConfig, AgentError, ReasoningEffort};

const BODY_EXCERPT: usize = 512;

/// Blocking chat-completion client, shareable across threads.
#[derive(Debug)]
pub struct ChatClient {
    config: AgentConfig,
    http: ureq::Agent,
    api_key: Option<String>,
    audit: Option<Mutex<File>>,
}

#[derive(Serialize)]
struct AuditEntry<'a> {
    timestamp: String,
    model: &'a str,
    attempt: u32,
    prompt: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<u16>,
    #[serde(skip_serializing_if = "Option::is_none")]
    response: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

enum Attempt {
    Done(String),
    Retry(AgentError),
    Fail(AgentError),
}

impl ChatClient {
    pub fn new(config: AgentConfig) -> Result<Self, AgentError> {
        config.validate()?;
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                AgentError::Config(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let audit = match &config.audit_log {
            Some(path) => Some(Mutex::new(
                OpenOptions::new().create(true).append(true).open(path)?,
            )),
            None => None,
        };
        let http: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.request_timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            config,
            http,
            api_key,
            audit,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    /// The JSON body sent for `prompt`: a single user message.
    pub fn request_body(&self, prompt: &str) -> Value {
        let mut body = json!({
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(t) = self.config.temperature {
            body["temperature"] = json!(t);
        }
        if self.config.reasoning_effort != ReasoningEffort::None {
            body["reasoning_effort"] = json!(self.config.reasoning_effort.as_str());
        }
        body
    }

    /// Sends `prompt` as one stateless request and returns the assistant text
    /// verbatim. Transport failures, 429 and 5xx responses are retried with
    /// exponential backoff up to `max_retries` times.
    pub fn complete_chat(&self, prompt: &str) -> Result<String, AgentError> {
        let body = self.request_body(prompt);
        let mut backoff = Duration::from_millis(self.config.initial_backoff_ms);
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.attempt(&body, prompt, attempt)? {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) => {
                    if attempt > self.config.max_retries {
                        return Err(e);
                    }
                    tracing::warn!(attempt, error = %e, "retrying chat request");
                    std::thread::sleep(backoff);
                    backoff = backoff.saturating_mul(2);
                }
            }
        }
    }

    fn attempt(&self, body: &Value, prompt: &str, attempt: u32) -> Result<Attempt, AgentError> {
        let mut request = self.http.post(&self.config.endpoint_url);
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = match request.send_json(body) {
            Ok(r) => r,
            Err(e) => {
                let message = e.to_string();
                self.audit(attempt, prompt, None, None, Some(&message))?;
                return Ok(Attempt::Retry(AgentError::Transport {
                    attempts: attempt,
                    message,
                }));
            }
        };
        let status = response.status().as_u16();
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => {
                let message = e.to_string();
                self.audit(attempt, prompt, Some(status), None, Some(&message))?;
                return Ok(Attempt::Retry(AgentError::Transport {
                    attempts: attempt,
                    message,
                }));
            }
        };
        self.audit(attempt, prompt, Some(status), Some(&text), None)?;
        if !(200..300).contains(&status) {
            let err = AgentError::Provider {
                status,
                body: excerpt(&text),
            };
            return Ok(if status == 429 || status >= 500 {
                Attempt::Retry(err)
            } else {
                Attempt::Fail(err)
            });
        }
        Ok(match extract_content(&text) {
            Ok(content) => Attempt::Done(content),
            Err(e) => Attempt::Fail(e),
        })
    }

    fn audit(
        &self,
        attempt: u32,
        prompt: &str,
        status: Option<u16>,
        response: Option<&str>,
        error: Option<&str>,
    ) -> Result<(), AgentError> {
        let Some(file) = &self.audit else {
            return Ok(());
        };
        let entry = AuditEntry {
            timestamp: chrono::Utc::now().to_rfc3339(),
            model: &self.config.model_name,
            attempt,
            prompt,
            status,
            response,
            error,
        };
        let mut line = serde_json::to_string(&entry).expect("audit entry serializes");
        line.push('\n');
        let mut f = file.lock().unwrap_or_else(|p| p.into_inner());
        f.write_all(line.as_bytes())?;
        Ok(())
    }
}

/// One-off request with a fresh client.
pub fn complete_chat(prompt: &str, config: &AgentConfig) -> Result<String, AgentError> {
    ChatClient::new(config.clone())?.complete_chat(prompt)
}

fn excerpt(text: &str) -> String {
    match text.char_indices().nth(BODY_EXCERPT) {
        Some((i, _)) => format!("{}…", &text[..i]),
        None => text.to_string(),
    }
}

fn extract_content(text: &str) -> Result<String, AgentError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| AgentError::MalformedResponse(format!("{e}: {}", excerpt(text))))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| {
            AgentError::MalformedResponse(format!(
                "no choices[0].message.content in {}",
                excerpt(text)
            ))
        })
}
