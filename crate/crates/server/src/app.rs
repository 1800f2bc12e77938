// SPDX-License-Identifier: Apache-2.0

//! Shared state, recovery and HTTP handlers.

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use ecoprompt_core::budget::ResourceLimits;
use ecoprompt_core::farm::{ActionRecord, GameAction, GameConfig};
use ecoprompt_core::footprint::{estimate_footprint, ESTIMATE_LABEL};
use ecoprompt_core::provider::{
    build_provider, CompletionProvider, MockProvider, ProviderError, ProviderMode, ProviderRequest,
};
use ecoprompt_core::relatable::to_relatable;
use ecoprompt_core::Config;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::error::ApiError;
use crate::game::{ActionView, GameActionLogged, GameCreated, GameEntry, GameEventsLogged, GameSnapshot};
use crate::session::{FootprintLogged, LimitChanged, PromptLogged, PromptView, RecoverError, Session, SessionCreated};
use crate::store::{EventKind, EventRecord, EventStore, Snapshot, StoreError, Stream};

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Recover(#[from] RecoverError),
    #[error("provider: {0}")]
    Provider(#[from] ProviderError),
    #[error("invalid config: {0}")]
    Config(#[from] ecoprompt_core::ConfigError),
}

/// Completion backends available to the service.
#[derive(Clone)]
pub struct Providers {
    pub mock: Arc<dyn CompletionProvider>,
    /// Present only when a live key is configured.
    pub live: Option<Arc<dyn CompletionProvider>>,
}

impl Providers {
    /// Mock always; live when the configured key variable is set.
    pub fn from_config(config: &Config) -> Self {
        let live = build_provider(&config.provider, ProviderMode::Live, &config.model).ok();
        Self {
            mock: Arc::new(MockProvider::new(config.provider.mock_seed, config.model.clone())),
            live,
        }
    }

    fn get(&self, mode: ProviderMode) -> Option<&Arc<dyn CompletionProvider>> {
        match mode {
            ProviderMode::Mock => Some(&self.mock),
            ProviderMode::Live => self.live.as_ref(),
        }
    }
}

/// A value plus the number of log records it reflects.
struct Tracked<T> {
    value: T,
    records: u64,
}

type Entries<T> = RwLock<HashMap<String, Arc<Mutex<Tracked<T>>>>>;

pub struct AppState {
    config: Arc<Config>,
    game_config: Arc<GameConfig>,
    store: EventStore,
    default_mode: ProviderMode,
    providers: Providers,
    sessions: Entries<Session>,
    games: Entries<GameEntry>,
}

fn live_unavailable(env: &str) -> ApiError {
    ApiError::new(
        StatusCode::CONFLICT,
        "live_provider_unavailable",
        format!("live provider mode needs an API key in {env}"),
    )
}

impl AppState {
    /// Opens the store under `data_dir` and rebuilds every session and game
    /// from its log.
    pub fn open(
        config: Config,
        data_dir: &Path,
        default_mode: ProviderMode,
        providers: Providers,
    ) -> Result<Self, StartupError> {
        config.validate()?;
        if providers.get(default_mode).is_none() {
            return Err(ProviderError::MissingApiKey(config.provider.api_key_env.clone()).into());
        }
        let store = EventStore::open(data_dir)?;
        let game_config = Arc::new(config.game.clone());
        let state = Self {
            config: Arc::new(config),
            game_config,
            store,
            default_mode,
            providers,
            sessions: RwLock::new(HashMap::new()),
            games: RwLock::new(HashMap::new()),
        };
        state.recover()?;
        Ok(state)
    }

    fn recover(&self) -> Result<(), StartupError> {
        let mut sessions = HashMap::new();
        for id in self.store.list(Stream::Sessions)? {
            let records = self.store.read(Stream::Sessions, &id)?;
            let session = match self.store.read_snapshot::<Session>(Stream::Sessions, &id) {
                Some(snap) if snap.records as usize <= records.len() && snap.state.session_id == id => {
                    let mut s = snap.state;
                    for (i, r) in records.iter().enumerate().skip(snap.records as usize) {
                        s.apply(i, r)?;
                    }
                    s
                }
                _ => Session::replay(&id, &records)?,
            };
            if !session.deleted {
                let tracked = Tracked {
                    value: session,
                    records: records.len() as u64,
                };
                sessions.insert(id, Arc::new(Mutex::new(tracked)));
            }
        }
        let mut games = HashMap::new();
        for id in self.store.list(Stream::Games)? {
            let records = self.store.read(Stream::Games, &id)?;
            let entry = match self.store.read_snapshot::<GameSnapshot>(Stream::Games, &id) {
                Some(snap) if snap.records as usize <= records.len() && snap.state.game_id == id => {
                    let mut g = GameEntry::from_snapshot(snap.state, self.game_config.clone());
                    for (i, r) in records.iter().enumerate().skip(snap.records as usize) {
                        g.apply(i, r)?;
                    }
                    g
                }
                _ => GameEntry::replay(&id, &records, self.game_config.clone())?,
            };
            let tracked = Tracked {
                value: entry,
                records: records.len() as u64,
            };
            games.insert(id, Arc::new(Mutex::new(tracked)));
        }
        tracing::info!(sessions = sessions.len(), games = games.len(), "recovered event logs");
        *self.sessions.write().expect("sessions lock") = sessions;
        *self.games.write().expect("games lock") = games;
        Ok(())
    }

    pub fn default_mode(&self) -> ProviderMode {
        self.default_mode
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Tracked<Session>>>, ApiError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    fn game(&self, id: &str) -> Result<Arc<Mutex<Tracked<GameEntry>>>, ApiError> {
        self.games
            .read()
            .expect("games lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("game", id))
    }

    /// Appends off the async runtime; returns once the records are synced.
    async fn append(&self, stream: Stream, id: &str, records: Vec<EventRecord>) -> Result<(), ApiError> {
        let store = self.store.clone();
        let id = id.to_owned();
        tokio::task::spawn_blocking(move || store.append(stream, &id, &records))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_failed", e.to_string()))??;
        Ok(())
    }

    /// Writes a snapshot when an append crossed a multiple of the interval.
    /// Failures are logged only: the log itself is already durable.
    async fn maybe_snapshot<T: Serialize + Send + 'static>(
        &self,
        stream: Stream,
        id: &str,
        before: u64,
        after: u64,
        state: impl FnOnce() -> T,
    ) {
        let every = self.config.service.snapshot_every.max(1) as u64;
        if before / every == after / every {
            return;
        }
        let store = self.store.clone();
        let id = id.to_owned();
        let snapshot = Snapshot {
            records: after,
            state: state(),
        };
        match tokio::task::spawn_blocking(move || store.write_snapshot(stream, &id, &snapshot)).await {
            Ok(Ok(())) => {}
            Ok(Err(e)) => tracing::warn!(error = %e, "snapshot failed"),
            Err(e) => tracing::warn!(error = %e, "snapshot task failed"),
        }
    }
}

fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::unprocessable("malformed_body", e.to_string()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    provider_mode: Option<ProviderMode>,
}

#[derive(Debug, Default, Deserialize)]
struct PromptBody {
    #[serde(default)]
    text: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateGame {
    seed: Option<u64>,
}

async fn health(State(app): State<Arc<AppState>>) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "provider_mode": app.default_mode,
        "live_available": app.providers.live.is_some(),
    }))
}

async fn create_session(State(app): State<Arc<AppState>>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: CreateSession = parse_body(&body)?;
    let mode = req.provider_mode.unwrap_or(app.default_mode);
    if app.providers.get(mode).is_none() {
        return Err(live_unavailable(&app.config.provider.api_key_env));
    }
    let id = uuid::Uuid::new_v4().to_string();
    let created = SessionCreated {
        provider_mode: mode,
        model: app.config.model.clone(),
        datacenter: app.config.datacenter.clone(),
        thresholds: app.config.budget.clone(),
    };
    let record = EventRecord::new(&id, EventKind::Created, &created)?;
    let session = Session::new(&id, &record.ts, created);
    app.append(Stream::Sessions, &id, vec![record]).await?;
    let view = session.view(&app.config.relatable);
    app.sessions.write().expect("sessions lock").insert(
        id,
        Arc::new(Mutex::new(Tracked {
            value: session,
            records: 1,
        })),
    );
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    let entry = app.session(&id)?;
    let guard = entry.lock().await;
    Ok(Json(guard.value.view(&app.config.relatable)))
}

async fn delete_session(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    let entry = app.session(&id)?;
    let mut guard = entry.lock().await;
    if guard.value.deleted {
        return Err(ApiError::not_found("session", &id));
    }
    app.append(Stream::Sessions, &id, vec![EventRecord::new(&id, EventKind::Deleted, json!({}))?])
        .await?;
    guard.value.deleted = true;
    guard.records += 1;
    app.sessions.write().expect("sessions lock").remove(&id);
    Ok(StatusCode::NO_CONTENT)
}

async fn prompt(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let entry = app.session(&id)?;
    let req: PromptBody = parse_body(&body)?;
    let request = ProviderRequest::new(req.text.clone())
        .map_err(|_| ApiError::unprocessable("empty_prompt", "prompt text must not be empty"))?;

    let mut guard = entry.lock().await;
    if guard.value.deleted {
        return Err(ApiError::not_found("session", &id));
    }
    let provider = app
        .providers
        .get(guard.value.provider_mode)
        .ok_or_else(|| live_unavailable(&app.config.provider.api_key_env))?
        .clone();
    let result = provider.complete(&request).await.map_err(|e| match e {
        ProviderError::EmptyPrompt => ApiError::unprocessable("empty_prompt", e.to_string()),
        other => ApiError::provider(other.to_string()),
    })?;

    let session = &guard.value;
    let usage = result.usage();
    let footprint = estimate_footprint(&session.model, &session.datacenter, &usage);
    let prompt_id = session.next_prompt_id();
    let mut budget = session.budget.clone();
    let transitions = budget
        .record(prompt_id.clone(), footprint)
        .map_err(|e| ApiError::provider(format!("provider returned unusable usage: {e}")))?;
    let totals = *budget.totals();

    let records = vec![
        EventRecord::new(
            &id,
            EventKind::Prompt,
            PromptLogged {
                prompt_id: prompt_id.clone(),
                text: req.text,
                response_text: result.response_text.clone(),
                provider: result.provider_name.clone(),
                outcome: result.outcome,
                usage,
            },
        )?,
        EventRecord::new(
            &id,
            EventKind::Footprint,
            FootprintLogged {
                prompt_id: prompt_id.clone(),
                estimate: footprint,
                totals,
            },
        )?,
    ];
    app.append(Stream::Sessions, &id, records).await?;
    let before = guard.records;
    guard.value.budget = budget;
    guard.records += 2;
    let after = guard.records;
    let snapshot = guard.value.clone();
    app.maybe_snapshot(Stream::Sessions, &id, before, after, move || snapshot).await;

    let relatable = &app.config.relatable;
    Ok(Json(PromptView {
        prompt_id,
        refused: result.is_refusal(),
        response_text: result.response_text,
        provider: result.provider_name,
        label: ESTIMATE_LABEL,
        usage,
        footprint,
        relatable: to_relatable(&footprint, relatable),
        totals,
        totals_relatable: to_relatable(&totals, relatable),
        statuses: guard.value.budget.status(),
        transitions,
    }))
}

async fn put_limits(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let entry = app.session(&id)?;
    let limits: ResourceLimits = parse_body(&body)?;
    limits
        .validate()
        .map_err(|e| ApiError::unprocessable("invalid_limit", e.to_string()))?;

    let mut guard = entry.lock().await;
    if guard.value.deleted {
        return Err(ApiError::not_found("session", &id));
    }
    let record = EventRecord::new(&id, EventKind::LimitChange, LimitChanged { limits })?;
    app.append(Stream::Sessions, &id, vec![record]).await?;
    guard
        .value
        .budget
        .set_limits(limits)
        .map_err(|e| ApiError::unprocessable("invalid_limit", e.to_string()))?;
    let before = guard.records;
    guard.records += 1;
    let snapshot = guard.value.clone();
    app.maybe_snapshot(Stream::Sessions, &id, before, before + 1, move || snapshot).await;
    Ok(Json(guard.value.view(&app.config.relatable)))
}

async fn create_game(State(app): State<Arc<AppState>>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: CreateGame = parse_body(&body)?;
    let seed = req.seed.unwrap_or_else(rand::random);
    let id = uuid::Uuid::new_v4().to_string();
    let record = EventRecord::new(&id, EventKind::Created, GameCreated { seed })?;
    let game = ecoprompt_core::farm::Game::new(seed, app.game_config.clone())
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "bad_game_config", e.to_string()))?;
    let entry = GameEntry {
        game_id: id.clone(),
        created_at: record.ts.clone(),
        seed,
        game,
    };
    app.append(Stream::Games, &id, vec![record]).await?;
    let view = entry.view();
    app.games.write().expect("games lock").insert(
        id,
        Arc::new(Mutex::new(Tracked {
            value: entry,
            records: 1,
        })),
    );
    Ok((StatusCode::CREATED, Json(view)))
}

async fn game_state(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    let entry = app.game(&id)?;
    let guard = entry.lock().await;
    Ok(Json(guard.value.view()))
}

/// `{type, payload?, ack_warning?}` into an action and its acknowledgement.
fn parse_action(body: &Bytes) -> Result<(GameAction, bool), ApiError> {
    let malformed = |m: String| ApiError::unprocessable("malformed_action", m);
    let value: Value = serde_json::from_slice(body).map_err(|e| malformed(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| malformed("action must be a JSON object".into()))?;
    let ack = match obj.get("ack_warning") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(malformed("ack_warning must be a boolean".into())),
    };
    let mut action = serde_json::Map::new();
    for key in ["type", "payload"] {
        if let Some(v) = obj.get(key) {
            action.insert(key.into(), v.clone());
        }
    }
    let action = serde_json::from_value(Value::Object(action)).map_err(|e| malformed(e.to_string()))?;
    Ok((action, ack))
}

async fn game_action(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let entry = app.game(&id)?;
    let (action, ack) = parse_action(&body)?;
    let mut guard = entry.lock().await;

    let farmhand_answer = match &action {
        GameAction::AskFarmhand { question } => {
            guard.value.game.check_ai_allowed(&action, ack)?;
            let request = ecoprompt_core::farm::farmhand_request(question)?;
            let provider = app
                .providers
                .get(app.default_mode)
                .expect("default provider checked at startup");
            let result = provider
                .complete(&request)
                .await
                .map_err(|e| ApiError::provider(e.to_string()))?;
            Some(result.response_text)
        }
        _ => None,
    };
    let record = ActionRecord {
        action,
        ack_warning: ack,
        farmhand_answer,
    };
    let mut next = guard.value.game.clone();
    let events = next.apply(&record)?;
    let records = vec![
        EventRecord::new(&id, EventKind::GameAction, GameActionLogged { record })?,
        EventRecord::new(&id, EventKind::GameEvent, GameEventsLogged { events: events.clone() })?,
    ];
    app.append(Stream::Games, &id, records).await?;
    guard.value.game = next;
    let before = guard.records;
    guard.records += 2;
    let snapshot = guard.value.snapshot();
    app.maybe_snapshot(Stream::Games, &id, before, before + 2, move || snapshot).await;

    let game = &guard.value.game;
    Ok(Json(ActionView {
        state: game.state().clone(),
        events,
        season: game.current_season().to_owned(),
        score: game.score(),
    }))
}

pub fn router(state: Arc<AppState>) -> Router {
    let origin = state.config.service.cors_origin.trim().to_owned();
    let allow_origin = if origin == "*" {
        AllowOrigin::from(Any)
    } else {
        match HeaderValue::from_str(&origin) {
            Ok(v) => AllowOrigin::exact(v),
            Err(_) => {
                tracing::warn!(origin, "invalid cors_origin; allowing any origin");
                AllowOrigin::from(Any)
            }
        }
    };
    let cors = CorsLayer::new()
        .allow_origin(allow_origin)
        .allow_methods(Any)
        .allow_headers(Any);

    Router::new()
        .route("/api/health", get(health))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session).delete(delete_session))
        .route("/api/sessions/{id}/prompt", post(prompt))
        .route("/api/sessions/{id}/limits", axum::routing::put(put_limits))
        .route("/api/games", post(create_game))
        .route("/api/games/{id}/state", get(game_state))
        .route("/api/games/{id}/actions", post(game_action))
        .layer(cors)
        .with_state(state)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    state: Arc<AppState>,
    addr: SocketAddr,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    serve_on(state, listener, shutdown).await
}

/// Like [`serve`] on an already bound listener.
pub async fn serve_on(
    state: Arc<AppState>,
    listener: tokio::net::TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
