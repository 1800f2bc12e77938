// SPDX-License-Identifier: Apache-2.0

//! Calculator sessions and the log records that rebuild them.

use ecoprompt_core::budget::{LimitStatus, ResourceLimits, SessionBudget, StatusTransition, Thresholds};
use ecoprompt_core::footprint::{DatacenterProfile, FootprintEstimate, ModelProfile, QueryUsage, ESTIMATE_LABEL};
use ecoprompt_core::provider::{CompletionOutcome, ProviderMode};
use ecoprompt_core::relatable::{to_relatable, RelatableConstants, RelatableUnits};
use serde::{Deserialize, Serialize};

use crate::store::{EventKind, EventRecord, StoreError};

/// Payload of a session's `created` record. Profiles and thresholds are
/// pinned here so a transcript replays the same way after config edits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub provider_mode: ProviderMode,
    pub model: ModelProfile,
    pub datacenter: DatacenterProfile,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptLogged {
    pub prompt_id: String,
    pub text: String,
    pub response_text: String,
    pub provider: String,
    pub outcome: CompletionOutcome,
    pub usage: QueryUsage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintLogged {
    pub prompt_id: String,
    pub estimate: FootprintEstimate,
    /// Session totals after this prompt.
    pub totals: FootprintEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitChanged {
    pub limits: ResourceLimits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub created_at: String,
    pub provider_mode: ProviderMode,
    pub model: ModelProfile,
    pub datacenter: DatacenterProfile,
    pub budget: SessionBudget,
    pub deleted: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum RecoverError {
    #[error("log for {id} does not start with a created record")]
    MissingCreated { id: String },
    #[error("record {index} of {id}: {message}")]
    Bad { id: String, index: usize, message: String },
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl Session {
    pub fn new(id: &str, created_at: &str, created: SessionCreated) -> Self {
        Self {
            session_id: id.to_owned(),
            created_at: created_at.to_owned(),
            provider_mode: created.provider_mode,
            model: created.model,
            datacenter: created.datacenter,
            budget: SessionBudget::new(created.thresholds),
            deleted: false,
        }
    }

    pub fn next_prompt_id(&self) -> String {
        format!("p{}", self.budget.history().len() + 1)
    }

    /// Folds one non-`created` record into the session.
    pub fn apply(&mut self, index: usize, record: &EventRecord) -> Result<(), RecoverError> {
        let bad = |message: String| RecoverError::Bad {
            id: self.session_id.clone(),
            index,
            message,
        };
        match record.kind {
            EventKind::Footprint => {
                let f: FootprintLogged = record.payload_as()?;
                self.budget
                    .record(f.prompt_id, f.estimate)
                    .map_err(|e| bad(e.to_string()))?;
            }
            EventKind::LimitChange => {
                let l: LimitChanged = record.payload_as()?;
                self.budget.set_limits(l.limits).map_err(|e| bad(e.to_string()))?;
            }
            EventKind::Deleted => self.deleted = true,
            EventKind::Prompt => {}
            other => return Err(bad(format!("unexpected {other:?} record in a session log"))),
        }
        Ok(())
    }

    /// Rebuilds a session from its full log.
    pub fn replay(id: &str, records: &[EventRecord]) -> Result<Self, RecoverError> {
        let first = records
            .first()
            .filter(|r| r.kind == EventKind::Created)
            .ok_or_else(|| RecoverError::MissingCreated { id: id.to_owned() })?;
        let mut session = Session::new(id, &first.ts, first.payload_as()?);
        for (i, r) in records.iter().enumerate().skip(1) {
            session.apply(i, r)?;
        }
        Ok(session)
    }

    pub fn view(&self, relatable: &RelatableConstants) -> SessionView {
        let totals = *self.budget.totals();
        SessionView {
            session_id: self.session_id.clone(),
            created_at: self.created_at.clone(),
            provider_mode: self.provider_mode,
            label: ESTIMATE_LABEL,
            prompt_count: self.budget.history().len(),
            totals,
            totals_relatable: to_relatable(&totals, relatable),
            limits: *self.budget.limits(),
            statuses: self.budget.status(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub created_at: String,
    pub provider_mode: ProviderMode,
    pub label: &'static str,
    pub prompt_count: usize,
    pub totals: FootprintEstimate,
    pub totals_relatable: RelatableUnits,
    pub limits: ResourceLimits,
    pub statuses: LimitStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PromptView {
    pub prompt_id: String,
    pub response_text: String,
    pub refused: bool,
    pub provider: String,
    pub label: &'static str,
    pub usage: QueryUsage,
    pub footprint: FootprintEstimate,
    pub relatable: RelatableUnits,
    pub totals: FootprintEstimate,
    pub totals_relatable: RelatableUnits,
    pub statuses: LimitStatus,
    pub transitions: Vec<StatusTransition>,
}
