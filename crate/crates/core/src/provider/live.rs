// SPDX-License-Identifier: Apache-2.0

//! OpenAI-compatible `/chat/completions` client.

use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{
    count_tokens, CompletionOutcome, CompletionProvider, ProviderConfig, ProviderError,
    ProviderRequest, ProviderResult,
};

pub struct LiveProvider {
    base_url: String,
    model: String,
    api_key: String,
    timeout: Duration,
    extra: serde_json::Map<String, Value>,
    client: reqwest::Client,
    name: String,
}

#[derive(Deserialize)]
struct ChatResponse {
    #[serde(default)]
    choices: Vec<Choice>,
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Option<Message>,
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
    refusal: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    prompt_tokens: Option<u64>,
    completion_tokens: Option<u64>,
}

impl LiveProvider {
    pub fn new(
        base_url: impl Into<String>,
        model: impl Into<String>,
        api_key: impl Into<String>,
        timeout: Duration,
    ) -> Self {
        let model = model.into();
        Self {
            base_url: base_url.into().trim_end_matches('/').to_owned(),
            name: format!("live:{model}"),
            model,
            api_key: api_key.into(),
            timeout,
            extra: serde_json::Map::new(),
            client: reqwest::Client::new(),
        }
    }

    pub fn with_extra(mut self, extra: serde_json::Map<String, Value>) -> Self {
        self.extra = extra;
        self
    }

    /// Reads the key from the environment variable named in the config.
    pub fn from_config(config: &ProviderConfig) -> Result<Self, ProviderError> {
        let key = config
            .api_key()
            .ok_or_else(|| ProviderError::MissingApiKey(config.api_key_env.clone()))?;
        Ok(Self::new(
            &config.base_url,
            &config.model,
            key,
            Duration::from_secs_f64(config.timeout_s),
        )
        .with_extra(config.extra.clone()))
    }

    fn body(&self, request: &ProviderRequest) -> Value {
        let mut messages = Vec::new();
        if let Some(hint) = &request.system_hint {
            messages.push(json!({"role": "system", "content": hint}));
        }
        messages.push(json!({"role": "user", "content": request.prompt_text}));
        let mut body = serde_json::Map::new();
        for (k, v) in &self.extra {
            body.insert(k.clone(), v.clone());
        }
        body.insert("model".into(), json!(self.model));
        body.insert("messages".into(), Value::Array(messages));
        if let Some(max) = request.max_output_tokens {
            body.insert("max_tokens".into(), json!(max));
        }
        Value::Object(body)
    }

    fn map_send_error(&self, err: reqwest::Error) -> ProviderError {
        if err.is_timeout() {
            ProviderError::Timeout(self.timeout.as_secs_f64())
        } else {
            ProviderError::Network(err.to_string())
        }
    }
}

#[async_trait]
impl CompletionProvider for LiveProvider {
    fn name(&self) -> &str {
        &self.name
    }

    async fn complete(&self, request: &ProviderRequest) -> Result<ProviderResult, ProviderError> {
        request.validate()?;
        let started = Instant::now();
        let response = self
            .client
            .post(format!("{}/chat/completions", self.base_url))
            .bearer_auth(&self.api_key)
            .timeout(self.timeout)
            .json(&self.body(request))
            .send()
            .await
            .map_err(|e| self.map_send_error(e))?;

        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(ProviderError::Auth(status.as_u16()));
        }
        let text = response.text().await.map_err(|e| self.map_send_error(e))?;
        let latency = started.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);
        if !status.is_success() {
            return Err(ProviderError::Http {
                status: status.as_u16(),
                body: text.chars().take(500).collect(),
            });
        }

        let parsed: ChatResponse =
            serde_json::from_str(&text).map_err(|e| ProviderError::Malformed(e.to_string()))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| ProviderError::Malformed("no choices in response".into()))?;
        let message = choice.message.unwrap_or(Message {
            content: None,
            refusal: None,
        });
        let filtered = choice.finish_reason.as_deref() == Some("content_filter");
        let (response_text, outcome) = match (message.refusal, message.content) {
            (Some(refusal), _) => (refusal, CompletionOutcome::Refused),
            (None, Some(content)) if !filtered => (content, CompletionOutcome::Completed),
            (None, content) => (content.unwrap_or_default(), CompletionOutcome::Refused),
        };

        let usage = parsed.usage;
        let input_tokens = usage
            .as_ref()
            .and_then(|u| u.prompt_tokens)
            .unwrap_or_else(|| {
                count_tokens(&request.prompt_text)
                    + request.system_hint.as_deref().map_or(0, count_tokens)
            });
        let output_tokens = usage
            .as_ref()
            .and_then(|u| u.completion_tokens)
            .unwrap_or_else(|| count_tokens(&response_text));

        Ok(ProviderResult {
            response_text,
            input_tokens,
            output_tokens,
            measured_latency_s: latency,
            provider_name: self.name.clone(),
            outcome,
        })
    }
}
