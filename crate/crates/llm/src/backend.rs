//! Chat-completion backends: the OpenAI-compatible HTTP client, retry
//! policy, and a scripted backend for tests.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use crate::error::LlmError;

/// A backend that answers one prompt with one response body.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, LlmError>;
}

/// Retry counts and backoff base. Transport failures are retried with
/// exponential backoff; parse failures are retried only when
/// `parse_attempts` is raised above 1, since they are evidence about the
/// model rather than the network.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub transport_attempts: u32,
    pub parse_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            transport_attempts: 3,
            parse_attempts: 1,
            base_delay: Duration::from_millis(250),
        }
    }
}

impl RetryPolicy {
    /// No waiting between attempts; for tests.
    pub fn immediate(transport_attempts: u32, parse_attempts: u32) -> Self {
        Self {
            transport_attempts,
            parse_attempts,
            base_delay: Duration::ZERO,
        }
    }
}

/// Runs one completion, retrying retryable failures per the policy.
pub fn complete_with_retry(
    backend: &dyn ChatBackend,
    prompt: &str,
    policy: &RetryPolicy,
) -> Result<String, LlmError> {
    let attempts = policy.transport_attempts.max(1);
    let mut last = None;
    for attempt in 0..attempts {
        if attempt > 0 && !policy.base_delay.is_zero() {
            std::thread::sleep(policy.base_delay * 2u32.pow(attempt - 1));
        }
        match backend.complete(prompt) {
            Ok(response) => return Ok(response),
            Err(e) if e.is_retryable() => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(LlmError::RetriesExhausted {
        attempts,
        last: Box::new(last.expect("at least one attempt")),
    })
}

/// Connection settings for an OpenAI-compatible chat-completion endpoint.
/// The API key is read from `api_key_env` at request time and never stored.
#[derive(Debug, Clone)]
pub struct BackendConfig {
    pub base_url: String,
    pub model: String,
    pub temperature: Option<f64>,
    pub api_key_env: String,
    pub timeout: Duration,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".to_string(),
            model: "gpt-4o-mini".to_string(),
            temperature: None,
            api_key_env: "OPENAI_API_KEY".to_string(),
            timeout: Duration::from_secs(120),
        }
    }
}

pub struct OpenAiBackend {
    config: BackendConfig,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct ChatCompletion {
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

impl OpenAiBackend {
    pub fn new(config: BackendConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Self { config, agent }
    }

    fn endpoint(&self) -> String {
        format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        )
    }
}

impl ChatBackend for OpenAiBackend {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let key = std::env::var(&self.config.api_key_env)
            .map_err(|_| LlmError::MissingApiKey(self.config.api_key_env.clone()))?;
        let mut body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(t) = self.config.temperature {
            body["temperature"] = json!(t);
        }
        let url = self.endpoint();
        let mut response = self
            .agent
            .post(&url)
            .header("authorization", &format!("Bearer {key}"))
            .send_json(&body)
            .map_err(|e| LlmError::Transport {
                url: url.clone(),
                message: e.to_string(),
            })?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| LlmError::Transport {
                url,
                message: e.to_string(),
            })?;
        if !(200..300).contains(&status) {
            return Err(LlmError::Http { status, body: text });
        }
        let completion: ChatCompletion = serde_json::from_str(&text)
            .map_err(|_| LlmError::MalformedCompletion { body: text.clone() })?;
        completion
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or(LlmError::MalformedCompletion { body: text })
    }
}

/// One step of a scripted backend.
#[derive(Debug, Clone)]
pub enum ScriptStep {
    Reply(String),
    TransportError(String),
    HttpError(u16),
}

/// Replays a fixed list of steps; used for tests and cassette authoring.
pub struct ScriptedBackend {
    steps: Mutex<VecDeque<ScriptStep>>,
    calls: AtomicU32,
}

impl ScriptedBackend {
    pub fn new(steps: Vec<ScriptStep>) -> Self {
        Self {
            steps: Mutex::new(steps.into()),
            calls: AtomicU32::new(0),
        }
    }

    pub fn replying(responses: &[&str]) -> Self {
        Self::new(
            responses
                .iter()
                .map(|r| ScriptStep::Reply(r.to_string()))
                .collect(),
        )
    }

    pub fn calls(&self) -> u32 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, _prompt: &str) -> Result<String, LlmError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let step = self
            .steps
            .lock()
            .expect("script lock")
            .pop_front()
            .ok_or(LlmError::ScriptExhausted)?;
        match step {
            ScriptStep::Reply(text) => Ok(text),
            ScriptStep::TransportError(message) => Err(LlmError::Transport {
                url: "scripted".to_string(),
                message,
            }),
            ScriptStep::HttpError(status) => Err(LlmError::Http {
                status,
                body: "scripted failure".to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retry_recovers_from_transport_blips() {
        let backend = ScriptedBackend::new(vec![
            ScriptStep::TransportError("connection reset".into()),
            ScriptStep::HttpError(503),
            ScriptStep::Reply("[]".into()),
        ]);
        let policy = RetryPolicy::immediate(3, 1);
        assert_eq!(complete_with_retry(&backend, "x", &policy).unwrap(), "[]");
        assert_eq!(backend.calls(), 3);
    }

    #[test]
    fn retry_gives_up_after_the_budget() {
        let backend = ScriptedBackend::new(vec![
            ScriptStep::TransportError("a".into()),
            ScriptStep::TransportError("b".into()),
            ScriptStep::Reply("never reached".into()),
        ]);
        let policy = RetryPolicy::immediate(2, 1);
        assert!(matches!(
            complete_with_retry(&backend, "x", &policy),
            Err(LlmError::RetriesExhausted { attempts: 2, .. })
        ));
        assert_eq!(backend.calls(), 2);
    }

    #[test]
    fn non_retryable_errors_pass_through() {
        let backend = ScriptedBackend::new(vec![
            ScriptStep::HttpError(401),
            ScriptStep::Reply("never reached".into()),
        ]);
        let policy = RetryPolicy::immediate(3, 1);
        assert!(matches!(
            complete_with_retry(&backend, "x", &policy),
            Err(LlmError::Http { status: 401, .. })
        ));
        assert_eq!(backend.calls(), 1);
    }

    #[test]
    fn openai_backend_requires_the_key_env_var() {
        let backend = OpenAiBackend::new(BackendConfig {
            api_key_env: "CDI_TEST_KEY_THAT_IS_NOT_SET".to_string(),
            ..BackendConfig::default()
        });
        assert!(matches!(
            backend.complete("hello"),
            Err(LlmError::MissingApiKey(var)) if var == "CDI_TEST_KEY_THAT_IS_NOT_SET"
        ));
    }

    #[test]
    fn openai_backend_maps_connection_failures_to_transport() {
        // Port 1 on loopback refuses immediately; no network leaves the host.
        std::env::set_var("CDI_TEST_DUMMY_KEY", "not-a-real-key");
        let backend = OpenAiBackend::new(BackendConfig {
            base_url: "http://127.0.0.1:1/v1".to_string(),
            api_key_env: "CDI_TEST_DUMMY_KEY".to_string(),
            timeout: Duration::from_secs(2),
            ..BackendConfig::default()
        });
        let err = backend.complete("hello").unwrap_err();
        assert!(matches!(err, LlmError::Transport { .. }), "{err:?}");
        assert!(err.is_retryable());
    }
}
