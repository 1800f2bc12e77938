// SPDX-License-Identifier: Apache-2.0

//! Headless player used by `simulate` and the commons-dynamics tests.
//!
//! The bot farms greedily (harvest, plant in-season seeds, keep crops
//! watered, sell at market) and only differs in when it reaches for AI.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::*;
use crate::footprint::ModelProfile;
use crate::provider::MockProvider;

/// Ticks between market visits at level 5.
const MARKET_EVERY_TICKS: u64 = 8;
const FARMHAND_QUESTION: &str = "What should I plant this season?";
const MANUAL_SCARECROW: &str = "drawing:headless-player";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    NeverAi,
    AlwaysAi,
    /// Use AI only while the lake is healthier than the threshold.
    Threshold(u8),
}

impl Policy {
    pub fn uses_ai(&self, lake_health: u8) -> bool {
        match self {
            Policy::NeverAi => false,
            Policy::AlwaysAi => lake_health > 0,
            Policy::Threshold(k) => lake_health > *k,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::NeverAi => f.write_str("never_ai"),
            Policy::AlwaysAi => f.write_str("always_ai"),
            Policy::Threshold(k) => write!(f, "threshold({k})"),
        }
    }
}

impl FromStr for Policy {
    type Err = String;

    /// Accepts `never_ai`, `always_ai`, `threshold(K)` and `threshold:K`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "never_ai" => return Ok(Policy::NeverAi),
            "always_ai" => return Ok(Policy::AlwaysAi),
            _ => {}
        }
        let k = s
            .strip_prefix("threshold(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("threshold:"))
            .ok_or_else(|| format!("unknown policy '{s}'"))?;
        let k: u8 = k
            .trim()
            .parse()
            .map_err(|_| format!("threshold must be an integer in [0, 100], got '{k}'"))?;
        if k > 100 {
            return Err(format!("threshold must be in [0, 100], got {k}"));
        }
        Ok(Policy::Threshold(k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub tick: u64,
    pub level: u8,
    pub lake_health: u8,
    pub coins: u64,
    pub xp: u64,
    pub ai_actions: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub policy: Policy,
    pub rows: Vec<TrajectoryRow>,
    pub score: ScoreSummary,
    /// Lake health when level 1 ended, if it did.
    pub lake_after_level1: Option<u8>,
    pub community_drain_total: u64,
    pub records: Vec<ActionRecord>,
}

impl SimulationReport {
    pub const CSV_HEADER: &'static str = "tick,level,lake_health,coins,xp,ai_actions";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 24);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.tick, r.level, r.lake_health, r.coins, r.xp, r.ai_actions
            ));
        }
        out
    }
}

struct Player {
    game: Game,
    policy: Policy,
    farmhand: MockProvider,
    records: Vec<ActionRecord>,
}

impl Player {
    fn act(&mut self, record: ActionRecord) -> Result<Vec<GameEvent>, GameError> {
        let events = self.game.apply(&record)?;
        self.records.push(record);
        Ok(events)
    }

    fn ai(&self) -> bool {
        self.policy.uses_ai(self.game.state().lake_health)
    }

    fn running(&self) -> bool {
        !self.game.state().is_over()
    }

    fn take_turn(&mut self) {
        self.harvest_all();
        if self.running() {
            self.handle_pests();
        }
        if self.running() {
            self.handle_birds();
        }
        if self.running() {
            self.plant_all();
        }
        if self.running() {
            self.water_all();
        }
        if self.running() {
            self.visit_market();
        }
    }

    fn tiles(&self) -> impl Iterator<Item = (usize, usize)> {
        let (rows, cols) = (self.game.state().rows, self.game.state().cols);
        (0..rows).flat_map(move |r| (0..cols).map(move |c| (r, c)))
    }

    fn harvest_all(&mut self) {
        let ready: Vec<_> = self
            .tiles()
            .filter(|&(r, c)| {
                matches!(self.game.state().tile(r, c).and_then(|t| t.crop()),
                    Some(crop) if crop.stage == GrowthStage::Mature)
            })
            .collect();
        for (row, col) in ready {
            let _ = self.act(ActionRecord::new(GameAction::Harvest { row, col }));
        }
    }

    fn handle_pests(&mut self) {
        let ids: Vec<u32> = self.game.state().pests.iter().map(|p| p.id).collect();
        for pest in ids {
            if !self.running() {
                return;
            }
            if self.ai() {
                let _ = self.act(ActionRecord::acknowledged(GameAction::AiPestControl { pest }));
                continue;
            }
            if self.act(ActionRecord::new(GameAction::StartMinigame { pest })).is_err() {
                continue;
            }
            let required = self
                .game
                .state()
                .pests
                .iter()
                .find(|p| p.id == pest)
                .and_then(|p| p.minigame)
                .map_or(0, |m| m.required_hits);
            let _ = self.act(ActionRecord::new(GameAction::ResolveMinigame {
                pest,
                hits: required,
            }));
        }
    }

    fn handle_birds(&mut self) {
        let s = self.game.state();
        if s.level < SCARECROW_LEVEL || s.scarecrow.is_some() {
            return;
        }
        let record = if self.ai() {
            ActionRecord::acknowledged(GameAction::AiScarecrow)
        } else {
            ActionRecord::new(GameAction::PlaceManualScarecrow {
                drawing_ref: MANUAL_SCARECROW.to_owned(),
            })
        };
        let _ = self.act(record);
    }

    fn plant_all(&mut self) {
        let empty: Vec<_> = self
            .tiles()
            .filter(|&(r, c)| {
                self.game.state().tile(r, c).map(|t| &t.content) == Some(&TileContent::Empty)
            })
            .collect();
        if empty.is_empty() {
            return;
        }
        let level = self.game.state().level;
        let season = self.game.current_season().to_owned();
        let plantable = |game: &Game| -> Option<String> {
            game.config()
                .crops
                .iter()
                .filter(|c| game.state().seeds(&c.name) > 0)
                .filter(|c| level < ALMANAC_LEVEL || c.seasons.contains(&season))
                .max_by_key(|c| (c.xp_on_harvest * 1000 / c.growth_ticks as u64, std::cmp::Reverse(c.name.clone())))
                .map(|c| c.name.clone())
        };
        if plantable(&self.game).is_none() {
            return;
        }
        if level >= FARMHAND_LEVEL && self.ai() {
            self.ask_farmhand();
            if !self.running() {
                return;
            }
        }
        for (row, col) in empty {
            let Some(crop) = plantable(&self.game) else {
                break;
            };
            let _ = self.act(ActionRecord::new(GameAction::Plant { row, col, crop }));
        }
    }

    fn ask_farmhand(&mut self) {
        let Ok(request) = farmhand_request(FARMHAND_QUESTION) else {
            return;
        };
        let Ok(result) = self.farmhand.complete_now(&request) else {
            return;
        };
        let _ = self.act(ActionRecord {
            action: GameAction::AskFarmhand {
                question: FARMHAND_QUESTION.to_owned(),
            },
            ack_warning: true,
            farmhand_answer: Some(result.response_text),
        });
    }

    fn water_all(&mut self) {
        let now = self.game.state().tick;
        let dry: Vec<_> = self
            .tiles()
            .filter(|&(r, c)| {
                let t = self.game.state().tile(r, c).expect("in bounds");
                matches!(t.crop(), Some(crop) if crop.stage != GrowthStage::Mature)
                    && t.watered_until <= now
            })
            .collect();
        for (row, col) in dry {
            let _ = self.act(ActionRecord::new(GameAction::Water { row, col }));
        }
    }

    fn visit_market(&mut self) {
        let s = self.game.state();
        if s.level < MARKET_LEVEL || !s.tick.is_multiple_of(MARKET_EVERY_TICKS) {
            return;
        }
        let stocked: Vec<String> = self
            .game
            .config()
            .crops
            .iter()
            .filter(|c| s.item(&c.name) > 0)
            .map(|c| c.name.clone())
            .collect();
        if stocked.is_empty() {
            return;
        }
        if self.act(ActionRecord::new(GameAction::OpenWeek)).is_err() {
            return;
        }
        for crop in stocked {
            if !self.running() {
                return;
            }
            let price = if self.ai() {
                let events = self.act(ActionRecord::acknowledged(GameAction::AiPriceSuggestion {
                    crop: crop.clone(),
                }));
                match events.ok().and_then(|ev| {
                    ev.into_iter().find_map(|e| match e {
                        GameEvent::PriceSuggested { price, .. } => Some(price),
                        _ => None,
                    })
                }) {
                    Some(p) => p,
                    None => continue,
                }
            } else {
                self.heuristic_price(&crop)
            };
            if !self.running() {
                return;
            }
            let _ = self.act(ActionRecord::new(GameAction::SetPrice { crop, price }));
        }
        if self.running() {
            let _ = self.act(ActionRecord::new(GameAction::Sell));
        }
    }

    /// Reads last week's report: raise the price after a sell-out, lower it
    /// after leftovers.
    fn heuristic_price(&self, crop: &str) -> u32 {
        let s = self.game.state();
        let spec = self.game.config().crop(crop).expect("stocked crop is configured");
        let max = self.game.config().market.max_price;
        match s.last_market_report.get(crop) {
            None => spec.base_price,
            Some(line) if line.units_sold >= spec.base_demand => (line.price + 1).min(max),
            Some(line) => line.price.saturating_sub(1).max(1),
        }
    }
}

/// Plays one full game headlessly. Deterministic in `(config, seed, policy)`.
pub fn simulate(
    config: Arc<GameConfig>,
    profile: &ModelProfile,
    seed: u64,
    policy: Policy,
    max_ticks: u64,
) -> Result<SimulationReport, crate::error::ConfigError> {
    let mut player = Player {
        game: Game::new(seed, config)?,
        policy,
        farmhand: MockProvider::new(seed, profile.clone()),
        records: Vec::new(),
    };
    let mut rows = Vec::new();
    let mut lake_after_level1 = None;

    while player.running() && player.game.state().tick < max_ticks {
        player.take_turn();
        if !player.running() {
            break;
        }
        let events = player
            .act(ActionRecord::new(GameAction::Tick))
            .expect("tick on a running game succeeds");
        let s = player.game.state();
        if lake_after_level1.is_none()
            && events
                .iter()
                .any(|e| matches!(e, GameEvent::LevelUp { .. }))
        {
            lake_after_level1 = Some(s.lake_health);
        }
        rows.push(TrajectoryRow {
            tick: s.tick,
            level: s.level,
            lake_health: s.lake_health,
            coins: s.coins,
            xp: s.xp,
            ai_actions: s.ai_usage.total(),
        });
    }

    let state = player.game.state();
    if rows.last().is_none_or(|r| r.tick != state.tick || r.coins != state.coins || r.lake_health != state.lake_health) {
        rows.push(TrajectoryRow {
            tick: state.tick,
            level: state.level,
            lake_health: state.lake_health,
            coins: state.coins,
            xp: state.xp,
            ai_actions: state.ai_usage.total(),
        });
    }
    Ok(SimulationReport {
        seed,
        policy,
        score: state.score(),
        lake_after_level1,
        community_drain_total: state.community_drain_total,
        rows,
        records: player.records,
    })
}
