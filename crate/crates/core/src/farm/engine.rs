// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::market::{DemandCurve, PriceSuggestion};
use super::*;
use crate::error::ConfigError;
use crate::provider::{CompletionProvider, ProviderRequest};

pub const FARMHAND_PERSONA: &str =
    "You are a friendly farm hand helping a child run a small farm. Answer questions about \
     seasons and crops briefly and kindly.";

pub fn farmhand_request(question: &str) -> Result<ProviderRequest, GameError> {
    ProviderRequest::new(question)
        .map(|r| r.with_system_hint(FARMHAND_PERSONA))
        .map_err(|_| GameError::EmptyQuestion)
}

/// A game instance: immutable config plus mutable state.
#[derive(Debug, Clone)]
pub struct Game {
    config: Arc<GameConfig>,
    state: GameState,
}

impl Game {
    pub fn new(seed: u64, config: Arc<GameConfig>) -> Result<Self, ConfigError> {
        config.validate()?;
        let grid = vec![
            TileState {
                content: TileContent::Empty,
                watered_until: 0,
            };
            config.grid_rows * config.grid_cols
        ];
        let state = GameState {
            seed,
            tick: 0,
            level: 1,
            rows: config.grid_rows,
            cols: config.grid_cols,
            grid,
            inventory: config.starting_inventory.clone(),
            coins: 0,
            xp: 0,
            lake_health: MAX_LAKE_HEALTH,
            status_log: vec![
                "Welcome, farmer! Your farm draws water and energy from the community lake."
                    .to_owned(),
                "The lake is shared by every farm in the valley. If its health reaches 0%, \
                 everyone loses."
                    .to_owned(),
                "Lake health: 100%. Plant, water and harvest crops to earn experience."
                    .to_owned(),
            ],
            pests: Vec::new(),
            next_pest_id: 1,
            pending_bird_strikes: 0,
            scarecrow: None,
            market: None,
            market_weeks_closed: 0,
            last_market_report: BTreeMap::new(),
            ai_usage: AiUsage::default(),
            community_drain_total: 0,
            outcome: Outcome::InProgress,
            drain_bag: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        Ok(Self { config, state })
    }

    /// Rebuilds a game from a stored state (snapshot recovery).
    pub fn from_state(state: GameState, config: Arc<GameConfig>) -> Self {
        Self { config, state }
    }

    /// Plays `records` from a fresh game. Records that fail are an error:
    /// a log should only ever contain actions that succeeded.
    pub fn replay<'a>(
        seed: u64,
        config: Arc<GameConfig>,
        records: impl IntoIterator<Item = &'a ActionRecord>,
    ) -> Result<Self, ReplayError> {
        let mut game = Self::new(seed, config).map_err(|e| ReplayError::Config(e.to_string()))?;
        for (index, record) in records.into_iter().enumerate() {
            game.apply(record)
                .map_err(|error| ReplayError::Action { index, error })?;
        }
        Ok(game)
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn into_state(self) -> GameState {
        self.state
    }

    pub fn current_season(&self) -> &str {
        let n = self.config.seasons.len() as u64;
        let idx = (self.state.tick / self.config.season_length_ticks) % n;
        &self.config.seasons[idx as usize]
    }

    /// Applies one action atomically: on error the state is unchanged.
    pub fn apply(&mut self, record: &ActionRecord) -> Result<Vec<GameEvent>, GameError> {
        let mut next = self.state.clone();
        let events = Step {
            config: &self.config,
            state: &mut next,
        }
        .apply(record)?;
        self.state = next;
        Ok(events)
    }

    /// Checks level gate, game-over and warning acknowledgement for an AI
    /// action without changing anything. Run before calling a provider so a
    /// rejected action never costs an inference.
    pub fn check_ai_allowed(&self, action: &GameAction, ack_warning: bool) -> Result<(), GameError> {
        let kind = match action.ai_kind() {
            Some(k) => k,
            None => return Ok(()),
        };
        let step = Step {
            config: &self.config,
            state: &mut self.state.clone(),
        };
        step.ensure_running()?;
        step.ensure_level(ai_feature_name(kind), ai_feature_level(kind))?;
        if !ack_warning {
            return Err(GameError::WarningRequired);
        }
        Ok(())
    }

    /// Asks the farm hand through `provider` and applies the result. Provider
    /// failures leave the lake untouched.
    pub async fn ask_farmhand(
        &mut self,
        question: &str,
        ack_warning: bool,
        provider: &dyn CompletionProvider,
    ) -> Result<(ActionRecord, Vec<GameEvent>), GameError> {
        let action = GameAction::AskFarmhand {
            question: question.to_owned(),
        };
        self.check_ai_allowed(&action, ack_warning)?;
        let request = farmhand_request(question)?;
        let result = provider
            .complete(&request)
            .await
            .map_err(|e| GameError::Provider {
                message: e.to_string(),
            })?;
        let record = ActionRecord {
            action,
            ack_warning,
            farmhand_answer: Some(result.response_text),
        };
        let events = self.apply(&record)?;
        Ok((record, events))
    }

    pub fn almanac(&self, topic: &str) -> Result<String, GameError> {
        let step = Step {
            config: &self.config,
            state: &mut self.state.clone(),
        };
        step.ensure_level("the Farmer's Almanac", ALMANAC_LEVEL)?;
        Ok(almanac_hint(&self.config, topic, self.current_season()))
    }

    /// Revenue-maximizing price for the current stock of `crop`.
    pub fn price_suggestion(&self, crop: &str) -> Result<PriceSuggestion, GameError> {
        let spec = self
            .config
            .crop(crop)
            .ok_or_else(|| GameError::UnknownCrop { crop: crop.to_owned() })?;
        Ok(demand_curve(&self.config, spec).best_price(self.state.item(crop), self.config.market.max_price))
    }

    pub fn score(&self) -> ScoreSummary {
        self.state.score()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error("invalid game config: {0}")]
    Config(String),
    #[error("action #{index} failed on replay: {error}")]
    Action { index: usize, error: GameError },
}

fn ai_feature_level(kind: AiActionKind) -> u8 {
    match kind {
        AiActionKind::FarmhandChat => FARMHAND_LEVEL,
        AiActionKind::PestControl => PEST_LEVEL,
        AiActionKind::ScarecrowImage => SCARECROW_LEVEL,
        AiActionKind::PriceSuggestion => MARKET_LEVEL,
    }
}

fn ai_feature_name(kind: AiActionKind) -> &'static str {
    match kind {
        AiActionKind::FarmhandChat => "the AI farm hand",
        AiActionKind::PestControl => "AI pest control",
        AiActionKind::ScarecrowImage => "the AI scarecrow",
        AiActionKind::PriceSuggestion => "AI pricing",
    }
}

fn demand_curve(config: &GameConfig, spec: &CropSpec) -> DemandCurve {
    DemandCurve {
        base_demand: spec.base_demand,
        reference_price: spec.base_price,
        elasticity: config.market.elasticity,
    }
}

fn almanac_hint(config: &GameConfig, topic: &str, current_season: &str) -> String {
    let topic = topic.trim().to_lowercase();
    let in_season = |season: &str| -> Vec<&str> {
        config
            .crops
            .iter()
            .filter(|c| c.seasons.iter().any(|s| s == season))
            .map(|c| c.name.as_str())
            .collect()
    };
    if topic == "now" || topic == "current" || topic == "today" {
        return format!(
            "It is {current_season}. In season now: {}.",
            in_season(current_season).join(", ")
        );
    }
    if let Some(season) = config.seasons.iter().find(|s| **s == topic) {
        let crops = in_season(season);
        return if crops.is_empty() {
            format!("Nothing grows in {season}. Rest the soil!")
        } else {
            format!("In {season} you can plant: {}.", crops.join(", "))
        };
    }
    if let Some(crop) = config.crop(&topic) {
        return format!(
            "{} grows in {}. It needs {} watered days and gives {} per harvest.",
            crop.name,
            crop.seasons.join(", "),
            crop.growth_ticks,
            crop.yield_units
        );
    }
    let mut topics: Vec<&str> = config.seasons.iter().map(String::as_str).collect();
    topics.extend(config.crops.iter().map(|c| c.name.as_str()));
    format!("The Almanac covers: now, {}.", topics.join(", "))
}

/// Mutation context over a scratch copy of the state.
struct Step<'a> {
    config: &'a GameConfig,
    state: &'a mut GameState,
}

impl Step<'_> {
    fn apply(mut self, record: &ActionRecord) -> Result<Vec<GameEvent>, GameError> {
        self.ensure_running()?;
        if let Some(kind) = record.action.ai_kind() {
            self.ensure_level(ai_feature_name(kind), ai_feature_level(kind))?;
            if !record.ack_warning {
                return Err(GameError::WarningRequired);
            }
        }
        match &record.action {
            GameAction::Tick => self.tick(),
            GameAction::Plant { row, col, crop } => self.plant(*row, *col, crop),
            GameAction::Water { row, col } => self.water(*row, *col),
            GameAction::Harvest { row, col } => self.harvest(*row, *col),
            GameAction::AskFarmhand { question } => {
                self.ask_farmhand(question, record.farmhand_answer.as_deref())
            }
            GameAction::ReadAlmanac { topic } => {
                self.ensure_level("the Farmer's Almanac", ALMANAC_LEVEL)?;
                let season = self.season().to_owned();
                Ok(vec![GameEvent::AlmanacHint {
                    topic: topic.clone(),
                    hint: almanac_hint(self.config, topic, &season),
                }])
            }
            GameAction::StartMinigame { pest } => self.start_minigame(*pest),
            GameAction::ResolveMinigame { pest, hits } => self.resolve_minigame(*pest, *hits),
            GameAction::CraftPesticide => self.craft_pesticide(),
            GameAction::AiPestControl { pest } => self.ai_pest_control(*pest),
            GameAction::PlaceManualScarecrow { drawing_ref } => {
                self.place_scarecrow(false, drawing_ref)
            }
            GameAction::AiScarecrow => {
                let image = self.config.scarecrow_placeholder.clone();
                self.place_scarecrow(true, &image)
            }
            GameAction::OpenWeek => self.open_week(),
            GameAction::SetPrice { crop, price } => self.set_price(crop, *price),
            GameAction::Sell => self.sell(),
            GameAction::AiPriceSuggestion { crop } => self.ai_price_suggestion(crop),
        }
    }

    fn ensure_running(&self) -> Result<(), GameError> {
        if self.state.is_over() {
            Err(GameError::GameOver)
        } else {
            Ok(())
        }
    }

    fn ensure_level(&self, feature: &str, required_level: u8) -> Result<(), GameError> {
        if self.state.level < required_level {
            Err(GameError::FeatureLocked {
                feature: feature.to_owned(),
                required_level,
            })
        } else {
            Ok(())
        }
    }

    fn season(&self) -> &str {
        let n = self.config.seasons.len() as u64;
        let idx = (self.state.tick / self.config.season_length_ticks) % n;
        &self.config.seasons[idx as usize]
    }

    fn index(&self, row: usize, col: usize) -> Result<usize, GameError> {
        if row < self.state.rows && col < self.state.cols {
            Ok(row * self.state.cols + col)
        } else {
            Err(GameError::OutOfBounds { row, col })
        }
    }

    fn log(&mut self, line: impl Into<String>) {
        self.state.status_log.push(line.into());
    }

    fn take_item(&mut self, item: &str, n: u32) {
        if let Some(count) = self.state.inventory.get_mut(item) {
            *count -= n;
            if *count == 0 {
                self.state.inventory.remove(item);
            }
        }
    }

    fn give_item(&mut self, item: &str, n: u32) {
        if n > 0 {
            *self.state.inventory.entry(item.to_owned()).or_insert(0) += n;
        }
    }

    /// Lowers the lake by `amount`, flagging a loss at zero.
    fn lower_lake(&mut self, amount: u8, events: &mut Vec<GameEvent>) {
        self.state.lake_health = self.state.lake_health.saturating_sub(amount);
        if self.state.lake_health == 0 && self.state.outcome == Outcome::InProgress {
            self.state.outcome = Outcome::Lost;
            self.log("The community lake has dried up. Game over.");
            events.push(GameEvent::GameOver {
                outcome: Outcome::Lost,
            });
        }
    }

    fn charge_ai(&mut self, kind: AiActionKind, detail: &str, events: &mut Vec<GameEvent>) {
        let cost = self.config.ai_costs.cost(kind);
        self.state.ai_usage.bump(kind);
        let after = self.state.lake_health.saturating_sub(cost);
        self.log(format!(
            "You used {kind} ({detail}). Lake health -{cost}% (now {after}%)."
        ));
        events.push(GameEvent::AiUsed {
            kind,
            cost,
            lake_health: after,
        });
        self.lower_lake(cost, events);
    }

    fn tick(&mut self) -> Result<Vec<GameEvent>, GameError> {
        let mut events = Vec::new();
        self.state.tick += 1;
        let now = self.state.tick;
        events.push(GameEvent::Ticked { tick: now });

        if now.is_multiple_of(self.config.season_length_ticks) {
            let season = self.season().to_owned();
            self.log(format!("The season changed to {season}."));
            events.push(GameEvent::SeasonChanged { season });
        }

        self.grow(now, &mut events);
        self.age_pests(now, &mut events);

        if self.state.level >= PEST_LEVEL && self.state.rng.random::<f64>() < self.config.pests.spawn_chance {
            self.spawn_pest(now, &mut events);
        }
        if self.state.level >= SCARECROW_LEVEL && self.state.rng.random::<f64>() < self.config.birds.spawn_chance {
            let scared_away = self.state.scarecrow.is_some();
            if scared_away {
                self.log("A bird flew over, but the scarecrow chased it away.");
            } else {
                self.state.pending_bird_strikes += 1;
                self.log("Birds are pecking at your crops! Your next harvest will be smaller.");
            }
            events.push(GameEvent::BirdVisited { scared_away });
        }

        if now.is_multiple_of(self.config.drain.interval_ticks) {
            self.community_drain(&mut events);
        }

        if !self.state.is_over() {
            self.level_up(&mut events);
        }
        Ok(events)
    }

    fn grow(&mut self, now: u64, events: &mut Vec<GameEvent>) {
        for idx in 0..self.state.grid.len() {
            let (row, col) = (idx / self.state.cols, idx % self.state.cols);
            let infested = self.state.pests.iter().any(|p| p.row == row && p.col == col);
            let tile = &mut self.state.grid[idx];
            let watered = now <= tile.watered_until;
            let TileContent::Planted(crop) = &mut tile.content else {
                continue;
            };
            if crop.stage == GrowthStage::Mature || infested || !watered {
                continue;
            }
            let growth_ticks = self
                .config
                .crop(&crop.crop)
                .map_or(u32::MAX, |s| s.growth_ticks);
            crop.watered_ticks += 1;
            let stage = if crop.watered_ticks >= growth_ticks {
                GrowthStage::Mature
            } else {
                GrowthStage::Growing
            };
            if stage != crop.stage {
                crop.stage = stage;
                events.push(GameEvent::CropGrew { row, col, stage });
            }
        }
    }

    fn age_pests(&mut self, now: u64, events: &mut Vec<GameEvent>) {
        let limit = self.config.pests.damage_after_ticks;
        for pest in &self.state.pests {
            if now.saturating_sub(pest.spawned_at) != limit {
                continue;
            }
            let idx = pest.row * self.state.cols + pest.col;
            if let TileContent::Planted(crop) = &mut self.state.grid[idx].content {
                if !crop.pest_damaged {
                    crop.pest_damaged = true;
                    events.push(GameEvent::CropDamaged {
                        row: pest.row,
                        col: pest.col,
                    });
                }
            }
        }
    }

    fn spawn_pest(&mut self, now: u64, events: &mut Vec<GameEvent>) {
        let targets: Vec<usize> = (0..self.state.grid.len())
            .filter(|&idx| {
                let (row, col) = (idx / self.state.cols, idx % self.state.cols);
                matches!(
                    self.state.grid[idx].crop(),
                    Some(c) if c.stage != GrowthStage::Mature
                ) && !self.state.pests.iter().any(|p| p.row == row && p.col == col)
            })
            .collect();
        if targets.is_empty() {
            return;
        }
        let idx = targets[self.state.rng.random_range(0..targets.len())];
        let (row, col) = (idx / self.state.cols, idx % self.state.cols);
        let id = self.state.next_pest_id;
        self.state.next_pest_id += 1;
        self.state.pests.push(Pest {
            id,
            row,
            col,
            spawned_at: now,
            minigame: None,
        });
        self.log(format!("Pests are attacking the crop at ({row}, {col})!"));
        events.push(GameEvent::PestAppeared { pest: id, row, col });
    }

    fn community_drain(&mut self, events: &mut Vec<GameEvent>) {
        if self.state.drain_bag.is_empty() {
            let mut bag = self.config.drain.amounts.clone();
            bag.shuffle(&mut self.state.rng);
            self.state.drain_bag = bag;
        }
        let amount = self.state.drain_bag.pop().expect("bag refilled above");
        let applied = amount.min(self.state.lake_health);
        self.state.community_drain_total += applied as u64;
        let after = self.state.lake_health - applied;
        self.log(format!(
            "Other farmers in the valley used AI. Lake health -{amount}% (now {after}%)."
        ));
        events.push(GameEvent::CommunityDrain {
            amount,
            lake_health: after,
        });
        self.lower_lake(amount, events);
    }

    fn level_up(&mut self, events: &mut Vec<GameEvent>) {
        while self.state.level < MAX_LEVEL
            && self.state.xp >= self.config.xp_thresholds[(self.state.level - 1) as usize]
        {
            self.state.level += 1;
            let level = self.state.level;
            let unlocked = match level {
                2 => "the Farmer's Almanac, seasons and the AI farm hand",
                3 => "pests and pest control",
                4 => "birds and scarecrows",
                _ => "the market",
            };
            self.log(format!("Level {level}! New: {unlocked}."));
            if let Some(rewards) = self.config.rewards_for(level).cloned() {
                for (item, n) in rewards {
                    self.give_item(&item, n);
                }
            }
            events.push(GameEvent::LevelUp { level });
        }
    }

    fn plant(&mut self, row: usize, col: usize, crop: &str) -> Result<Vec<GameEvent>, GameError> {
        let idx = self.index(row, col)?;
        let spec = self
            .config
            .crop(crop)
            .ok_or_else(|| GameError::UnknownCrop { crop: crop.to_owned() })?;
        if self.state.grid[idx].content != TileContent::Empty {
            return Err(GameError::TileNotEmpty { row, col });
        }
        let seed = seed_item(crop);
        if self.state.item(&seed) == 0 {
            return Err(GameError::MissingSeed { crop: crop.to_owned() });
        }
        if self.state.level >= ALMANAC_LEVEL {
            let season = self.season();
            if !spec.seasons.iter().any(|s| s == season) {
                return Err(GameError::OffSeason {
                    crop: crop.to_owned(),
                    season: season.to_owned(),
                });
            }
        }
        self.take_item(&seed, 1);
        let planted_at = self.state.tick;
        self.state.grid[idx] = TileState {
            content: TileContent::Planted(CropInstance {
                crop: crop.to_owned(),
                planted_at,
                watered_ticks: 0,
                stage: GrowthStage::Seedling,
                pest_damaged: false,
            }),
            watered_until: 0,
        };
        Ok(vec![GameEvent::Planted {
            row,
            col,
            crop: crop.to_owned(),
        }])
    }

    fn water(&mut self, row: usize, col: usize) -> Result<Vec<GameEvent>, GameError> {
        let idx = self.index(row, col)?;
        if self.state.grid[idx].crop().is_none() {
            return Err(GameError::TileNotPlanted { row, col });
        }
        let until = self.state.tick + self.config.water_duration_ticks;
        self.state.grid[idx].watered_until = until;
        Ok(vec![GameEvent::Watered { row, col, until }])
    }

    fn harvest(&mut self, row: usize, col: usize) -> Result<Vec<GameEvent>, GameError> {
        let idx = self.index(row, col)?;
        let crop = match self.state.grid[idx].crop() {
            None => return Err(GameError::TileNotPlanted { row, col }),
            Some(c) if c.stage != GrowthStage::Mature => {
                return Err(GameError::CropNotMature { row, col })
            }
            Some(c) => c.clone(),
        };
        let spec = self
            .config
            .crop(&crop.crop)
            .ok_or_else(|| GameError::UnknownCrop { crop: crop.crop.clone() })?
            .clone();
        let mut units = spec.yield_units;
        if crop.pest_damaged {
            units = units.saturating_sub(1);
        }
        if self.state.pending_bird_strikes > 0 {
            self.state.pending_bird_strikes -= 1;
            units = (units as f64 * (1.0 - self.config.birds.yield_penalty)).floor() as u32;
        }
        self.give_item(&spec.name, units);
        self.give_item(&seed_item(&spec.name), spec.seeds_returned);
        self.state.xp += spec.xp_on_harvest;
        self.state.grid[idx] = TileState {
            content: TileContent::Empty,
            watered_until: 0,
        };
        Ok(vec![GameEvent::Harvested {
            row,
            col,
            crop: spec.name,
            units,
            xp: spec.xp_on_harvest,
        }])
    }

    fn ask_farmhand(&mut self, question: &str, answer: Option<&str>) -> Result<Vec<GameEvent>, GameError> {
        if question.trim().is_empty() {
            return Err(GameError::EmptyQuestion);
        }
        let answer = answer.ok_or(GameError::AnswerMissing)?.to_owned();
        let mut events = vec![GameEvent::FarmhandAnswered {
            question: question.to_owned(),
            answer: answer.clone(),
        }];
        self.charge_ai(
            AiActionKind::FarmhandChat,
            &format!("farm hand says: \"{answer}\""),
            &mut events,
        );
        Ok(events)
    }

    fn pest_index(&self, pest: u32) -> Result<usize, GameError> {
        self.ensure_level("pest control", PEST_LEVEL)?;
        self.state
            .pests
            .iter()
            .position(|p| p.id == pest)
            .ok_or(GameError::NoSuchPest { pest })
    }

    fn remove_pest(&mut self, idx: usize, method: RemovalMethod, events: &mut Vec<GameEvent>) {
        let pest = self.state.pests.remove(idx);
        events.push(GameEvent::PestRemoved {
            pest: pest.id,
            method,
        });
    }

    fn required_hits(&self) -> u32 {
        let p = &self.config.pests;
        p.base_required_hits + p.required_hits_per_level * (self.state.level.saturating_sub(PEST_LEVEL) as u32)
    }

    fn start_minigame(&mut self, pest: u32) -> Result<Vec<GameEvent>, GameError> {
        let idx = self.pest_index(pest)?;
        let required_hits = self.required_hits();
        self.state.pests[idx].minigame = Some(Minigame {
            started_at: self.state.tick,
            required_hits,
        });
        Ok(vec![GameEvent::MinigameStarted {
            pest,
            required_hits,
        }])
    }

    fn resolve_minigame(&mut self, pest: u32, hits: u32) -> Result<Vec<GameEvent>, GameError> {
        let idx = self.pest_index(pest)?;
        let game = self.state.pests[idx]
            .minigame
            .ok_or(GameError::MinigameNotStarted { pest })?;
        let elapsed = self.state.tick - game.started_at + 1;
        let max = (self.config.pests.max_hit_rate as u64 * elapsed).min(u32::MAX as u64) as u32;
        if hits > max {
            return Err(GameError::ImpossibleHitRate { hits, max });
        }
        let mut events = Vec::new();
        if hits >= game.required_hits {
            self.log("You chased the pests away by hand. The lake is untouched.");
            self.remove_pest(idx, RemovalMethod::Minigame, &mut events);
        } else {
            self.state.pests[idx].minigame = None;
            events.push(GameEvent::MinigameFailed {
                pest,
                hits,
                required_hits: game.required_hits,
            });
        }
        Ok(events)
    }

    fn craft_pesticide(&mut self) -> Result<Vec<GameEvent>, GameError> {
        self.ensure_level("pesticide crafting", PEST_LEVEL)?;
        if self.state.pests.is_empty() {
            return Err(GameError::NoActivePest);
        }
        let recipe = &self.config.pests.pesticide_recipe;
        for (item, &needed) in recipe {
            let have = self.state.item(item);
            if have < needed {
                return Err(GameError::InsufficientItems {
                    item: item.clone(),
                    needed,
                    have,
                });
            }
        }
        for (item, &needed) in recipe {
            self.take_item(item, needed);
        }
        let mut events = vec![GameEvent::PesticideCrafted];
        self.log("You crafted pesticide from your harvest and sprayed the pests.");
        self.remove_pest(0, RemovalMethod::Pesticide, &mut events);
        Ok(events)
    }

    fn ai_pest_control(&mut self, pest: u32) -> Result<Vec<GameEvent>, GameError> {
        let idx = self.pest_index(pest)?;
        let mut events = Vec::new();
        self.remove_pest(idx, RemovalMethod::Ai, &mut events);
        self.charge_ai(AiActionKind::PestControl, &format!("removed pest {pest}"), &mut events);
        Ok(events)
    }

    fn place_scarecrow(&mut self, ai_generated: bool, image_ref: &str) -> Result<Vec<GameEvent>, GameError> {
        self.ensure_level("scarecrows", SCARECROW_LEVEL)?;
        if self.state.scarecrow.is_some() {
            return Err(GameError::ScarecrowAlreadyActive);
        }
        if image_ref.trim().is_empty() {
            return Err(GameError::MissingDrawing);
        }
        self.state.scarecrow = Some(Scarecrow {
            ai_generated,
            image_ref: image_ref.to_owned(),
        });
        self.state.pending_bird_strikes = 0;
        let mut events = vec![GameEvent::ScarecrowPlaced {
            ai_generated,
            image_ref: image_ref.to_owned(),
        }];
        if ai_generated {
            self.charge_ai(AiActionKind::ScarecrowImage, "generated a scarecrow", &mut events);
        } else {
            self.log("You put up your own scarecrow drawing. The lake is untouched.");
        }
        Ok(events)
    }

    fn open_week(&mut self) -> Result<Vec<GameEvent>, GameError> {
        self.ensure_level("the market", MARKET_LEVEL)?;
        if self.state.market.is_some() {
            return Err(GameError::MarketAlreadyOpen);
        }
        let week_index = self.state.market_weeks_closed + 1;
        let player_prices = self
            .config
            .crops
            .iter()
            .map(|c| {
                let last = self.state.last_market_report.get(&c.name).map(|l| l.price);
                (c.name.clone(), last.unwrap_or(c.base_price))
            })
            .collect();
        self.state.market = Some(MarketWeek {
            week_index,
            last_week_report: self.state.last_market_report.clone(),
            player_prices,
        });
        self.log(format!("Market week {week_index} is open."));
        Ok(vec![GameEvent::WeekOpened { week_index }])
    }

    fn set_price(&mut self, crop: &str, price: u32) -> Result<Vec<GameEvent>, GameError> {
        self.ensure_level("the market", MARKET_LEVEL)?;
        if self.config.crop(crop).is_none() {
            return Err(GameError::UnknownCrop { crop: crop.to_owned() });
        }
        let max = self.config.market.max_price;
        if price == 0 || price > max {
            return Err(GameError::InvalidPrice { price, max });
        }
        let week = self.state.market.as_mut().ok_or(GameError::MarketNotOpen)?;
        week.player_prices.insert(crop.to_owned(), price);
        Ok(vec![GameEvent::PriceSet {
            crop: crop.to_owned(),
            price,
        }])
    }

    fn sell(&mut self) -> Result<Vec<GameEvent>, GameError> {
        self.ensure_level("the market", MARKET_LEVEL)?;
        let week = self.state.market.clone().ok_or(GameError::MarketNotOpen)?;
        let has_stock = self.config.crops.iter().any(|c| self.state.item(&c.name) > 0);
        if !has_stock {
            self.log("You have nothing to sell this week.");
            return Ok(vec![GameEvent::NothingToSell]);
        }
        let mut events = Vec::new();
        let mut report = BTreeMap::new();
        for spec in &self.config.crops {
            let stock = self.state.item(&spec.name);
            let price = week.player_prices.get(&spec.name).copied().unwrap_or(spec.base_price);
            if stock == 0 {
                continue;
            }
            let units = demand_curve(self.config, spec).units_sold(stock, price);
            let coins = units as u64 * price as u64;
            self.take_item(&spec.name, units);
            self.state.coins += coins;
            report.insert(
                spec.name.clone(),
                SaleLine {
                    units_sold: units,
                    price,
                },
            );
            events.push(GameEvent::Sold {
                crop: spec.name.clone(),
                units,
                price,
                coins,
            });
        }
        let earned: u64 = events
            .iter()
            .map(|e| match e {
                GameEvent::Sold { coins, .. } => *coins,
                _ => 0,
            })
            .sum();
        self.log(format!(
            "Market week {} closed. You earned {earned} coins.",
            week.week_index
        ));
        self.state.last_market_report = report;
        self.state.market = None;
        self.state.market_weeks_closed += 1;

        if self.state.coins >= self.config.market.coin_goal {
            self.state.outcome = Outcome::Won;
            self.log(format!(
                "You reached {} coins and finished the game with the lake at {}%!",
                self.state.coins, self.state.lake_health
            ));
            events.push(GameEvent::GameOver {
                outcome: Outcome::Won,
            });
        }
        Ok(events)
    }

    fn ai_price_suggestion(&mut self, crop: &str) -> Result<Vec<GameEvent>, GameError> {
        let spec = self
            .config
            .crop(crop)
            .ok_or_else(|| GameError::UnknownCrop { crop: crop.to_owned() })?;
        let s = demand_curve(self.config, spec).best_price(self.state.item(crop), self.config.market.max_price);
        let mut events = vec![GameEvent::PriceSuggested {
            crop: crop.to_owned(),
            price: s.price,
            expected_units: s.units,
            expected_revenue: s.revenue,
        }];
        self.charge_ai(
            AiActionKind::PriceSuggestion,
            &format!("suggested {crop} at {} coins", s.price),
            &mut events,
        );
        Ok(events)
    }
}
