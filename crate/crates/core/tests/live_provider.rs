// SPDX-License-Identifier: Apache-2.0

//! LiveProvider against a local stand-in for a chat-completions endpoint.

use std::time::Duration;

use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use ecoprompt_core::provider::{CompletionOutcome, CompletionProvider, LiveProvider, ProviderError, ProviderRequest};
use serde_json::{json, Value};

async fn serve(router: Router) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router).await.unwrap() });
    format!("http://{addr}/v1")
}

fn provider(base: &str) -> LiveProvider {
    LiveProvider::new(base, "tiny-model", "sk-test", Duration::from_secs(2))
}

fn request() -> ProviderRequest {
    ProviderRequest::new("Why is the sky blue?").unwrap()
}

async fn chat(headers: HeaderMap, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    if headers.get("authorization").and_then(|v| v.to_str().ok()) != Some("Bearer sk-test") {
        return (StatusCode::UNAUTHORIZED, Json(json!({"error": "bad key"})));
    }
    let prompt = body["messages"].as_array().unwrap().last().unwrap()["content"]
        .as_str()
        .unwrap()
        .to_owned();
    let reply = match prompt.as_str() {
        "refuse" => json!({"choices": [{"message": {"role": "assistant", "content": null, "refusal": "I can't help with that."}, "finish_reason": "stop"}]}),
        "filtered" => json!({"choices": [{"message": {"role": "assistant", "content": ""}, "finish_reason": "content_filter"}]}),
        "no usage" => json!({"choices": [{"message": {"role": "assistant", "content": "abcdefgh"}, "finish_reason": "stop"}]}),
        _ => json!({
            "choices": [{"message": {"role": "assistant", "content": "Sunlight scatters."}, "finish_reason": "stop"}],
            "usage": {"prompt_tokens": 12, "completion_tokens": 5},
            "echo_temperature": body.get("temperature"),
        }),
    };
    (StatusCode::OK, Json(reply))
}

#[tokio::test]
async fn completes_and_uses_reported_usage() {
    let base = serve(Router::new().route("/v1/chat/completions", post(chat))).await;
    let r = provider(&base).complete(&request()).await.unwrap();
    assert_eq!(r.response_text, "Sunlight scatters.");
    assert_eq!((r.input_tokens, r.output_tokens), (12, 5));
    assert_eq!(r.outcome, CompletionOutcome::Completed);
    assert!(r.measured_latency_s > 0.0);
    assert_eq!(r.provider_name, "live:tiny-model");
}

#[tokio::test]
async fn falls_back_to_token_estimate() {
    let base = serve(Router::new().route("/v1/chat/completions", post(chat))).await;
    let r = provider(&base)
        .complete(&ProviderRequest::new("no usage").unwrap())
        .await
        .unwrap();
    assert_eq!(r.output_tokens, 2);
    assert_eq!(r.input_tokens, 2);
}

#[tokio::test]
async fn refusals_are_results() {
    let base = serve(Router::new().route("/v1/chat/completions", post(chat))).await;
    let p = provider(&base);
    let r = p.complete(&ProviderRequest::new("refuse").unwrap()).await.unwrap();
    assert!(r.is_refusal());
    assert_eq!(r.response_text, "I can't help with that.");
    let r = p.complete(&ProviderRequest::new("filtered").unwrap()).await.unwrap();
    assert!(r.is_refusal());
}

#[tokio::test]
async fn bad_key_is_auth_error() {
    let base = serve(Router::new().route("/v1/chat/completions", post(chat))).await;
    let p = LiveProvider::new(&base, "tiny-model", "wrong", Duration::from_secs(2));
    assert!(matches!(p.complete(&request()).await, Err(ProviderError::Auth(401))));
}

#[tokio::test]
async fn server_errors_and_garbage() {
    let router = Router::new()
        .route("/a/chat/completions", post(|| async { (StatusCode::INTERNAL_SERVER_ERROR, "boom") }))
        .route("/b/chat/completions", post(|| async { "not json" }))
        .route("/c/chat/completions", post(|| async { Json(json!({"choices": []})) }));
    let base = serve(router).await;
    let root = base.trim_end_matches("/v1");
    let err = provider(&format!("{root}/a")).complete(&request()).await.unwrap_err();
    assert!(matches!(err, ProviderError::Http { status: 500, .. }), "{err}");
    let err = provider(&format!("{root}/b")).complete(&request()).await.unwrap_err();
    assert!(matches!(err, ProviderError::Malformed(_)), "{err}");
    let err = provider(&format!("{root}/c")).complete(&request()).await.unwrap_err();
    assert!(matches!(err, ProviderError::Malformed(_)), "{err}");
}

#[tokio::test]
async fn slow_server_times_out() {
    let router = Router::new().route(
        "/v1/chat/completions",
        post(|| async {
            tokio::time::sleep(Duration::from_secs(5)).await;
            "late"
        }),
    );
    let base = serve(router).await;
    let p = LiveProvider::new(&base, "m", "sk-test", Duration::from_millis(200));
    assert!(matches!(p.complete(&request()).await, Err(ProviderError::Timeout(_))));
}

#[tokio::test]
async fn unreachable_host_is_network_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let p = provider(&format!("http://{addr}/v1"));
    assert!(matches!(p.complete(&request()).await, Err(ProviderError::Network(_))));
}

#[tokio::test]
async fn extra_params_are_forwarded() {
    let base = serve(Router::new().route("/v1/chat/completions", post(chat))).await;
    let mut extra = serde_json::Map::new();
    extra.insert("temperature".into(), json!(0.2));
    let r = provider(&base).with_extra(extra).complete(&request()).await.unwrap();
    assert_eq!(r.output_tokens, 5);
}
