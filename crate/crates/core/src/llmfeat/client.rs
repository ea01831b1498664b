use std::path::PathBuf;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{LlmError, LlmTranscript, PromptPair, TranscriptStore, Turn};

pub const DEFAULT_API_KEY_ENV: &str = "FEATURECRAFT_API_KEY";

/// A chat-completion endpoint: `POST url` with `{"model", "messages": [{"role", "content"}]}`,
/// answered by `{"choices": [{"message": {"content"}}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub url: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub offline: bool,
    pub timeout_secs: u64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            url: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            offline: false,
            timeout_secs: 120,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChatMessage,
}

fn send(
    client: &reqwest::blocking::Client,
    cfg: &EndpointConfig,
    key: &str,
    messages: &[ChatMessage],
) -> Result<String, LlmError> {
    let resp = client
        .post(&cfg.url)
        .bearer_auth(key)
        .json(&ChatRequest { model: &cfg.model, messages })
        .send()
        .map_err(|e| LlmError::Network(e.to_string()))?;
    let status = resp.status().as_u16();
    let body = resp.text().map_err(|e| LlmError::Network(e.to_string()))?;
    match status {
        200..=299 => {}
        401 | 403 => return Err(LlmError::Auth { status, body }),
        _ => return Err(LlmError::Status { status, body }),
    }
    let parsed: ChatResponse = serde_json::from_str(&body).map_err(|_| LlmError::BadResponse(body.clone()))?;
    parsed.choices.into_iter().next().map(|c| c.message.content).ok_or(LlmError::BadResponse(body))
}

/// Asks both questions in one conversation, the second carrying the first
/// exchange as context. The transcript is saved to `store` before returning,
/// including when the conversation stops on an error after the first request
/// was sent. The second question is never sent on its own.
pub fn request_recommendations(
    cfg: &EndpointConfig,
    prompts: &PromptPair,
    store: &TranscriptStore,
) -> Result<(LlmTranscript, PathBuf), LlmError> {
    if cfg.offline {
        return Err(LlmError::Offline);
    }
    let key = std::env::var(&cfg.api_key_env).map_err(|_| LlmError::MissingCredential(cfg.api_key_env.clone()))?;
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(cfg.timeout_secs))
        .build()
        .map_err(|e| LlmError::Network(e.to_string()))?;

    let mut transcript = LlmTranscript {
        dataset: prompts.dataset_name.clone(),
        endpoint: cfg.url.clone(),
        model: cfg.model.clone(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        turns: Vec::new(),
        error: None,
    };
    let mut messages = Vec::new();
    for prompt in [&prompts.prompt1, &prompts.prompt2] {
        messages.push(ChatMessage { role: "user".into(), content: prompt.clone() });
        match send(&client, cfg, &key, &messages) {
            Ok(reply) => {
                transcript.turns.push(Turn { request: prompt.clone(), response: reply.clone() });
                messages.push(ChatMessage { role: "assistant".into(), content: reply });
            }
            Err(e) => {
                transcript.error = Some(e.to_string());
                store.save(&transcript)?;
                return Err(e);
            }
        }
    }
    let path = store.save(&transcript)?;
    Ok((transcript, path))
}
