// SPDX-License-Identifier: Apache-2.0

//! Farm games as the service stores them.

use std::sync::Arc;

use ecoprompt_core::farm::{ActionRecord, Game, GameConfig, GameEvent, GameState, ScoreSummary};
use serde::{Deserialize, Serialize};

use crate::session::RecoverError;
use crate::store::{EventKind, EventRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameCreated {
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameActionLogged {
    pub record: ActionRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameEventsLogged {
    pub events: Vec<GameEvent>,
}

#[derive(Debug, Clone)]
pub struct GameEntry {
    pub game_id: String,
    pub created_at: String,
    pub seed: u64,
    pub game: Game,
}

/// Serialized form used for snapshots.
#[derive(Debug, Serialize, Deserialize)]
pub struct GameSnapshot {
    pub game_id: String,
    pub created_at: String,
    pub seed: u64,
    pub state: GameState,
}

impl GameEntry {
    pub fn snapshot(&self) -> GameSnapshot {
        GameSnapshot {
            game_id: self.game_id.clone(),
            created_at: self.created_at.clone(),
            seed: self.seed,
            state: self.game.state().clone(),
        }
    }

    pub fn from_snapshot(s: GameSnapshot, config: Arc<GameConfig>) -> Self {
        Self {
            game_id: s.game_id,
            created_at: s.created_at,
            seed: s.seed,
            game: Game::from_state(s.state, config),
        }
    }

    /// Folds one non-`created` record. Event records are derived output and
    /// are skipped; actions are re-applied.
    pub fn apply(&mut self, index: usize, record: &EventRecord) -> Result<(), RecoverError> {
        let bad = |message: String| RecoverError::Bad {
            id: self.game_id.clone(),
            index,
            message,
        };
        match record.kind {
            EventKind::GameAction => {
                let a: GameActionLogged = record.payload_as()?;
                self.game.apply(&a.record).map_err(|e| bad(e.to_string()))?;
            }
            EventKind::GameEvent => {}
            other => return Err(bad(format!("unexpected {other:?} record in a game log"))),
        }
        Ok(())
    }

    pub fn replay(id: &str, records: &[EventRecord], config: Arc<GameConfig>) -> Result<Self, RecoverError> {
        let first = records
            .first()
            .filter(|r| r.kind == EventKind::Created)
            .ok_or_else(|| RecoverError::MissingCreated { id: id.to_owned() })?;
        let created: GameCreated = first.payload_as()?;
        let game = Game::new(created.seed, config).map_err(|e| RecoverError::Bad {
            id: id.to_owned(),
            index: 0,
            message: e.to_string(),
        })?;
        let mut entry = Self {
            game_id: id.to_owned(),
            created_at: first.ts.clone(),
            seed: created.seed,
            game,
        };
        for (i, r) in records.iter().enumerate().skip(1) {
            entry.apply(i, r)?;
        }
        Ok(entry)
    }

    pub fn view(&self) -> GameView {
        GameView {
            game_id: self.game_id.clone(),
            created_at: self.created_at.clone(),
            seed: self.seed,
            season: self.game.current_season().to_owned(),
            score: self.game.score(),
            state: self.game.state().clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameView {
    pub game_id: String,
    pub created_at: String,
    pub seed: u64,
    pub season: String,
    pub score: ScoreSummary,
    pub state: GameState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionView {
    pub state: GameState,
    pub events: Vec<GameEvent>,
    pub season: String,
    pub score: ScoreSummary,
}
