// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

use super::AiActionKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropSpec {
    pub name: String,
    pub seasons: Vec<String>,
    /// Watered ticks needed to reach maturity.
    pub growth_ticks: u32,
    pub yield_units: u32,
    pub seeds_returned: u32,
    pub xp_on_harvest: u64,
    /// Market reference price, coins per unit.
    pub base_price: u32,
    /// Units demanded per market week at the reference price.
    pub base_demand: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrainConfig {
    pub interval_ticks: u64,
    /// Values drawn for each community drain. Draws come from a shuffled
    /// bag holding each value once, refilled when empty.
    pub amounts: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AiCosts {
    pub farmhand_chat: u8,
    pub pest_control: u8,
    pub scarecrow_image: u8,
    pub price_suggestion: u8,
}

impl AiCosts {
    pub fn cost(&self, kind: AiActionKind) -> u8 {
        match kind {
            AiActionKind::FarmhandChat => self.farmhand_chat,
            AiActionKind::PestControl => self.pest_control,
            AiActionKind::ScarecrowImage => self.scarecrow_image,
            AiActionKind::PriceSuggestion => self.price_suggestion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PestConfig {
    pub spawn_chance: f64,
    pub base_required_hits: u32,
    /// Extra hits required for every level above 3.
    pub required_hits_per_level: u32,
    /// Most minigame hits accepted per elapsed tick.
    pub max_hit_rate: u32,
    /// A pest left this long marks its crop as damaged.
    pub damage_after_ticks: u64,
    pub pesticide_recipe: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirdConfig {
    pub spawn_chance: f64,
    /// Fraction of the next harvest lost per unscared bird visit.
    pub yield_penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub elasticity: f64,
    pub max_price: u32,
    /// Coins needed at level 5 to complete the game.
    pub coin_goal: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub seasons: Vec<String>,
    pub season_length_ticks: u64,
    /// Ticks of growth granted by one watering.
    pub water_duration_ticks: u64,
    pub drain: DrainConfig,
    pub ai_costs: AiCosts,
    /// Cumulative XP needed for levels 2, 3, 4 and 5.
    pub xp_thresholds: [u64; 4],
    pub crops: Vec<CropSpec>,
    pub starting_inventory: BTreeMap<String, u32>,
    pub level_rewards: BTreeMap<String, BTreeMap<String, u32>>,
    pub pests: PestConfig,
    pub birds: BirdConfig,
    pub market: MarketConfig,
    pub scarecrow_placeholder: String,
}

impl Default for GameConfig {
    fn default() -> Self {
        crate::config::Config::default().game
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(format!("game: {}", msg.into()))
}

impl GameConfig {
    pub fn crop(&self, name: &str) -> Option<&CropSpec> {
        self.crops.iter().find(|c| c.name == name)
    }

    pub fn rewards_for(&self, level: u8) -> Option<&BTreeMap<String, u32>> {
        self.level_rewards.get(&level.to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(invalid("grid must be at least 1x1"));
        }
        if self.seasons.is_empty() || self.season_length_ticks == 0 {
            return Err(invalid("need at least one season with positive length"));
        }
        if self.water_duration_ticks == 0 {
            return Err(invalid("water_duration_ticks must be > 0"));
        }
        if self.drain.interval_ticks == 0 || self.drain.amounts.is_empty() {
            return Err(invalid("drain needs a positive interval and at least one amount"));
        }
        if self.drain.amounts.contains(&0) {
            return Err(invalid("drain amounts must be positive"));
        }
        for kind in AiActionKind::ALL {
            if self.ai_costs.cost(kind) == 0 {
                return Err(invalid(format!("AI cost for {kind} must be > 0")));
            }
        }
        if self.xp_thresholds.windows(2).any(|w| w[0] >= w[1]) || self.xp_thresholds[0] == 0 {
            return Err(invalid("xp_thresholds must be positive and strictly increasing"));
        }
        if self.crops.is_empty() {
            return Err(invalid("crop table is empty"));
        }
        for crop in &self.crops {
            if crop.growth_ticks == 0 || crop.base_price == 0 {
                return Err(invalid(format!("crop {} needs positive growth_ticks and base_price", crop.name)));
            }
            if crop.name.starts_with("seed:") || crop.name.is_empty() {
                return Err(invalid(format!("bad crop name '{}'", crop.name)));
            }
            if let Some(s) = crop.seasons.iter().find(|s| !self.seasons.contains(s)) {
                return Err(invalid(format!("crop {} lists unknown season {s}", crop.name)));
            }
        }
        for p in [self.pests.spawn_chance, self.birds.spawn_chance, self.birds.yield_penalty] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid("chances and penalties must lie in [0, 1]"));
            }
        }
        if self.pests.max_hit_rate == 0 {
            return Err(invalid("pests.max_hit_rate must be > 0"));
        }
        if !(self.market.elasticity.is_finite() && self.market.elasticity >= 0.0) {
            return Err(invalid("market.elasticity must be >= 0"));
        }
        if self.market.max_price == 0 {
            return Err(invalid("market.max_price must be > 0"));
        }
        Ok(())
    }
}
