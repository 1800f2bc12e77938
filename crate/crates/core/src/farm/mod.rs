// SPDX-License-Identifier: Apache-2.0

//! Server-authoritative farm game with a shared community lake.
//!
//! The game is a deterministic state machine: a [`GameState`] created from a
//! seed and a [`GameConfig`], then advanced only through [`ActionRecord`]s.
//! Replaying the same records against the same seed and config reproduces the
//! state bit for bit, which is what persistence and the determinism tests rely
//! on. Every AI-assisted action lowers the lake by its configured cost; every
//! manual alternative is free. Other farmers are simulated by a periodic
//! community drain.

mod config;
mod engine;
pub mod market;
pub mod policy;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{
    AiCosts, BirdConfig, CropSpec, DrainConfig, GameConfig, MarketConfig, PestConfig,
};
pub use engine::{farmhand_request, Game, ReplayError, FARMHAND_PERSONA};

pub const MAX_LEVEL: u8 = 5;
pub const MAX_LAKE_HEALTH: u8 = 100;

/// Level at which each gated feature unlocks.
pub const FARMHAND_LEVEL: u8 = 2;
pub const ALMANAC_LEVEL: u8 = 2;
pub const PEST_LEVEL: u8 = 3;
pub const SCARECROW_LEVEL: u8 = 4;
pub const MARKET_LEVEL: u8 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum GameError {
    #[error("tile ({row}, {col}) is outside the farm")]
    OutOfBounds { row: usize, col: usize },
    #[error("tile ({row}, {col}) is not empty")]
    TileNotEmpty { row: usize, col: usize },
    #[error("tile ({row}, {col}) has no crop")]
    TileNotPlanted { row: usize, col: usize },
    #[error("the crop on tile ({row}, {col}) is not ready to harvest")]
    CropNotMature { row: usize, col: usize },
    #[error("unknown crop '{crop}'")]
    UnknownCrop { crop: String },
    #[error("no {crop} seeds in inventory")]
    MissingSeed { crop: String },
    #[error("{crop} does not grow in {season}; check the Farmer's Almanac")]
    OffSeason { crop: String, season: String },
    #[error("{feature} unlocks at level {required_level}")]
    FeatureLocked { feature: String, required_level: u8 },
    #[error("AI actions need the usage warning to be acknowledged first")]
    WarningRequired,
    #[error("the game is over")]
    GameOver,
    #[error("no active pest with id {pest}")]
    NoSuchPest { pest: u32 },
    #[error("there are no pests to remove")]
    NoActivePest,
    #[error("the minigame for pest {pest} has not been started")]
    MinigameNotStarted { pest: u32 },
    #[error("{hits} hits is faster than allowed ({max} max)")]
    ImpossibleHitRate { hits: u32, max: u32 },
    #[error("not enough {item} to craft pesticide (need {needed}, have {have})")]
    InsufficientItems { item: String, needed: u32, have: u32 },
    #[error("a scarecrow is already standing")]
    ScarecrowAlreadyActive,
    #[error("a scarecrow drawing reference is required")]
    MissingDrawing,
    #[error("no market week is open")]
    MarketNotOpen,
    #[error("a market week is already open")]
    MarketAlreadyOpen,
    #[error("price {price} must be between 1 and {max}")]
    InvalidPrice { price: u32, max: u32 },
    #[error("farm hand question is empty")]
    EmptyQuestion,
    #[error("farm hand action has no recorded answer")]
    AnswerMissing,
    #[error("AI provider failed: {message}")]
    Provider { message: String },
}

impl GameError {
    /// Stable machine-readable code, used in API error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            GameError::OutOfBounds { .. } => "out_of_bounds",
            GameError::TileNotEmpty { .. } => "tile_not_empty",
            GameError::TileNotPlanted { .. } => "tile_not_planted",
            GameError::CropNotMature { .. } => "crop_not_mature",
            GameError::UnknownCrop { .. } => "unknown_crop",
            GameError::MissingSeed { .. } => "missing_seed",
            GameError::OffSeason { .. } => "off_season",
            GameError::FeatureLocked { .. } => "feature_locked",
            GameError::WarningRequired => "warning_required",
            GameError::GameOver => "game_over",
            GameError::NoSuchPest { .. } => "no_such_pest",
            GameError::NoActivePest => "no_active_pest",
            GameError::MinigameNotStarted { .. } => "minigame_not_started",
            GameError::ImpossibleHitRate { .. } => "impossible_hit_rate",
            GameError::InsufficientItems { .. } => "insufficient_items",
            GameError::ScarecrowAlreadyActive => "scarecrow_already_active",
            GameError::MissingDrawing => "missing_drawing",
            GameError::MarketNotOpen => "market_not_open",
            GameError::MarketAlreadyOpen => "market_already_open",
            GameError::InvalidPrice { .. } => "invalid_price",
            GameError::EmptyQuestion => "empty_question",
            GameError::AnswerMissing => "answer_missing",
            GameError::Provider { .. } => "provider_failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AiActionKind {
    FarmhandChat,
    PestControl,
    ScarecrowImage,
    PriceSuggestion,
}

impl AiActionKind {
    pub const ALL: [AiActionKind; 4] = [
        AiActionKind::FarmhandChat,
        AiActionKind::PestControl,
        AiActionKind::ScarecrowImage,
        AiActionKind::PriceSuggestion,
    ];
}

impl fmt::Display for AiActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AiActionKind::FarmhandChat => "farm hand chat",
            AiActionKind::PestControl => "AI pest control",
            AiActionKind::ScarecrowImage => "AI scarecrow image",
            AiActionKind::PriceSuggestion => "AI price suggestion",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthStage {
    Seedling,
    Growing,
    Mature,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropInstance {
    pub crop: String,
    pub planted_at: u64,
    pub watered_ticks: u32,
    pub stage: GrowthStage,
    pub pest_damaged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TileContent {
    Empty,
    Planted(CropInstance),
    Obstructed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileState {
    pub content: TileContent,
    /// The crop grows on every tick up to and including this one.
    pub watered_until: u64,
}

impl TileState {
    pub fn crop(&self) -> Option<&CropInstance> {
        match &self.content {
            TileContent::Planted(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Minigame {
    pub started_at: u64,
    pub required_hits: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pest {
    pub id: u32,
    pub row: usize,
    pub col: usize,
    pub spawned_at: u64,
    pub minigame: Option<Minigame>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scarecrow {
    pub ai_generated: bool,
    pub image_ref: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaleLine {
    pub units_sold: u32,
    pub price: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketWeek {
    pub week_index: u32,
    /// Sales from the previous week; empty in the first week.
    pub last_week_report: std::collections::BTreeMap<String, SaleLine>,
    pub player_prices: std::collections::BTreeMap<String, u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AiUsage {
    pub farmhand_chat: u32,
    pub pest_control: u32,
    pub scarecrow_image: u32,
    pub price_suggestion: u32,
}

impl AiUsage {
    pub fn bump(&mut self, kind: AiActionKind) {
        match kind {
            AiActionKind::FarmhandChat => self.farmhand_chat += 1,
            AiActionKind::PestControl => self.pest_control += 1,
            AiActionKind::ScarecrowImage => self.scarecrow_image += 1,
            AiActionKind::PriceSuggestion => self.price_suggestion += 1,
        }
    }

    pub fn total(&self) -> u32 {
        self.farmhand_chat + self.pest_control + self.scarecrow_image + self.price_suggestion
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    InProgress,
    Won,
    Lost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalMethod {
    Minigame,
    Pesticide,
    Ai,
}

/// Player (or client) intent. Applied through [`ActionRecord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum GameAction {
    Tick,
    Plant { row: usize, col: usize, crop: String },
    Water { row: usize, col: usize },
    Harvest { row: usize, col: usize },
    AskFarmhand { question: String },
    ReadAlmanac { topic: String },
    StartMinigame { pest: u32 },
    ResolveMinigame { pest: u32, hits: u32 },
    CraftPesticide,
    AiPestControl { pest: u32 },
    PlaceManualScarecrow { drawing_ref: String },
    AiScarecrow,
    OpenWeek,
    SetPrice { crop: String, price: u32 },
    Sell,
    AiPriceSuggestion { crop: String },
}

impl GameAction {
    pub fn ai_kind(&self) -> Option<AiActionKind> {
        match self {
            GameAction::AskFarmhand { .. } => Some(AiActionKind::FarmhandChat),
            GameAction::AiPestControl { .. } => Some(AiActionKind::PestControl),
            GameAction::AiScarecrow => Some(AiActionKind::ScarecrowImage),
            GameAction::AiPriceSuggestion { .. } => Some(AiActionKind::PriceSuggestion),
            _ => None,
        }
    }
}

/// One entry of a game's replayable action log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub action: GameAction,
    #[serde(default)]
    pub ack_warning: bool,
    /// Farm hand reply captured when the action was first applied, so replay
    /// never calls a provider.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub farmhand_answer: Option<String>,
}

impl ActionRecord {
    pub fn new(action: GameAction) -> Self {
        Self {
            action,
            ack_warning: false,
            farmhand_answer: None,
        }
    }

    pub fn acknowledged(action: GameAction) -> Self {
        Self {
            action,
            ack_warning: true,
            farmhand_answer: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum GameEvent {
    Ticked { tick: u64 },
    SeasonChanged { season: String },
    Planted { row: usize, col: usize, crop: String },
    Watered { row: usize, col: usize, until: u64 },
    CropGrew { row: usize, col: usize, stage: GrowthStage },
    CropDamaged { row: usize, col: usize },
    Harvested { row: usize, col: usize, crop: String, units: u32, xp: u64 },
    PestAppeared { pest: u32, row: usize, col: usize },
    MinigameStarted { pest: u32, required_hits: u32 },
    MinigameFailed { pest: u32, hits: u32, required_hits: u32 },
    PesticideCrafted,
    PestRemoved { pest: u32, method: RemovalMethod },
    BirdVisited { scared_away: bool },
    ScarecrowPlaced { ai_generated: bool, image_ref: String },
    CommunityDrain { amount: u8, lake_health: u8 },
    AiUsed { kind: AiActionKind, cost: u8, lake_health: u8 },
    FarmhandAnswered { question: String, answer: String },
    AlmanacHint { topic: String, hint: String },
    LevelUp { level: u8 },
    WeekOpened { week_index: u32 },
    PriceSet { crop: String, price: u32 },
    Sold { crop: String, units: u32, price: u32, coins: u64 },
    NothingToSell,
    PriceSuggested { crop: String, price: u32, expected_units: u32, expected_revenue: u64 },
    GameOver { outcome: Outcome },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub coins: u64,
    pub xp: u64,
    pub lake_health: u8,
    pub level: u8,
    pub levels_completed: u8,
    pub ai_actions: AiUsage,
    pub outcome: Outcome,
}

/// Complete, serializable world state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub seed: u64,
    pub tick: u64,
    pub level: u8,
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `rows * cols` tiles.
    pub grid: Vec<TileState>,
    pub inventory: std::collections::BTreeMap<String, u32>,
    pub coins: u64,
    pub xp: u64,
    pub lake_health: u8,
    pub status_log: Vec<String>,
    pub pests: Vec<Pest>,
    pub next_pest_id: u32,
    pub pending_bird_strikes: u32,
    pub scarecrow: Option<Scarecrow>,
    pub market: Option<MarketWeek>,
    pub market_weeks_closed: u32,
    pub last_market_report: std::collections::BTreeMap<String, SaleLine>,
    pub ai_usage: AiUsage,
    /// Sum of all community drain draws applied so far.
    pub community_drain_total: u64,
    pub outcome: Outcome,
    drain_bag: Vec<u8>,
    rng: rand_chacha::ChaCha8Rng,
}

impl GameState {
    pub fn tile(&self, row: usize, col: usize) -> Option<&TileState> {
        (row < self.rows && col < self.cols).then(|| &self.grid[row * self.cols + col])
    }

    pub fn item(&self, name: &str) -> u32 {
        self.inventory.get(name).copied().unwrap_or(0)
    }

    pub fn seeds(&self, crop: &str) -> u32 {
        self.item(&seed_item(crop))
    }

    pub fn is_over(&self) -> bool {
        self.outcome != Outcome::InProgress
    }

    pub fn score(&self) -> ScoreSummary {
        ScoreSummary {
            coins: self.coins,
            xp: self.xp,
            lake_health: self.lake_health,
            level: self.level,
            levels_completed: match self.outcome {
                Outcome::Won => MAX_LEVEL,
                _ => self.level - 1,
            },
            ai_actions: self.ai_usage,
            outcome: self.outcome,
        }
    }
}

pub fn seed_item(crop: &str) -> String {
    format!("seed:{crop}")
}
