// SPDX-License-Identifier: Apache-2.0

//! Session budgets: cumulative footprint totals measured against optional,
//! user-adjustable limits.
//!
//! Limits apply to the cumulative session totals, not to single prompts.
//! Going over a limit never blocks anything; it only changes the status that
//! drives the bar indicators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ConfigError;
use crate::footprint::FootprintEstimate;

#[derive(Debug, Error, PartialEq)]
pub enum BudgetError {
    #[error("{resource} limit must be a positive number, got {value}")]
    NonPositiveLimit { resource: Resource, value: f64 },
    #[error("footprint estimate has negative or non-finite components")]
    InvalidEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    Water,
    Carbon,
    Energy,
}

impl Resource {
    pub const ALL: [Resource; 3] = [Resource::Water, Resource::Carbon, Resource::Energy];

    fn amount(self, fp: &FootprintEstimate) -> f64 {
        match self {
            Resource::Water => fp.water_ml,
            Resource::Carbon => fp.carbon_g,
            Resource::Energy => fp.energy_wh,
        }
    }
}

impl std::fmt::Display for Resource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Resource::Water => "water",
            Resource::Carbon => "carbon",
            Resource::Energy => "energy",
        })
    }
}

/// Ordered so that `Under < Approaching < Exceeded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    NoLimit,
    Under,
    Approaching,
    Exceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Fill fraction at which a bar starts warning (inclusive).
    pub approaching_fraction: f64,
    /// Fill fraction above which a limit counts as exceeded (exclusive).
    pub exceeded_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        crate::config::Config::default().budget
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.approaching_fraction > 0.0
            && self.approaching_fraction <= self.exceeded_fraction
            && self.exceeded_fraction.is_finite())
        {
            return Err(ConfigError::Invalid(
                "budget thresholds must satisfy 0 < approaching <= exceeded".into(),
            ));
        }
        Ok(())
    }

    pub fn classify(&self, fill_fraction: f64) -> Status {
        if fill_fraction > self.exceeded_fraction {
            Status::Exceeded
        } else if fill_fraction >= self.approaching_fraction {
            Status::Approaching
        } else {
            Status::Under
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResourceLimits {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub water_ml: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carbon_g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_wh: Option<f64>,
}

impl ResourceLimits {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn get(&self, resource: Resource) -> Option<f64> {
        match resource {
            Resource::Water => self.water_ml,
            Resource::Carbon => self.carbon_g,
            Resource::Energy => self.energy_wh,
        }
    }

    pub fn validate(&self) -> Result<(), BudgetError> {
        for resource in Resource::ALL {
            if let Some(value) = self.get(resource) {
                if !(value.is_finite() && value > 0.0) {
                    return Err(BudgetError::NonPositiveLimit { resource, value });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceStatus {
    pub status: Status,
    /// Uncapped ratio of total to limit; 0 when there is no limit.
    pub fill_fraction: f64,
    /// `fill_fraction` clamped to [0, 1] for bar rendering.
    pub display_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitStatus {
    pub water: ResourceStatus,
    pub carbon: ResourceStatus,
    pub energy: ResourceStatus,
}

impl LimitStatus {
    pub fn get(&self, resource: Resource) -> &ResourceStatus {
        match resource {
            Resource::Water => &self.water,
            Resource::Carbon => &self.carbon,
            Resource::Energy => &self.energy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatusTransition {
    pub resource: Resource,
    pub from: Status,
    pub to: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub prompt_id: String,
    pub estimate: FootprintEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionBudget {
    totals: FootprintEstimate,
    limits: ResourceLimits,
    history: Vec<HistoryEntry>,
    thresholds: Thresholds,
}

impl Default for SessionBudget {
    fn default() -> Self {
        Self::new(Thresholds::default())
    }
}

impl SessionBudget {
    pub fn new(thresholds: Thresholds) -> Self {
        Self {
            totals: FootprintEstimate::ZERO,
            limits: ResourceLimits::none(),
            history: Vec::new(),
            thresholds,
        }
    }

    pub fn totals(&self) -> &FootprintEstimate {
        &self.totals
    }

    pub fn limits(&self) -> &ResourceLimits {
        &self.limits
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    /// Replaces every limit at once; totals and history are untouched.
    pub fn set_limits(&mut self, limits: ResourceLimits) -> Result<LimitStatus, BudgetError> {
        limits.validate()?;
        self.limits = limits;
        Ok(self.status())
    }

    pub fn record(
        &mut self,
        prompt_id: impl Into<String>,
        estimate: FootprintEstimate,
    ) -> Result<Vec<StatusTransition>, BudgetError> {
        if !estimate.is_valid() {
            return Err(BudgetError::InvalidEstimate);
        }
        let before = self.status();
        self.totals += estimate;
        self.history.push(HistoryEntry {
            prompt_id: prompt_id.into(),
            estimate,
        });
        let after = self.status();
        Ok(Resource::ALL
            .into_iter()
            .filter_map(|r| {
                let (from, to) = (before.get(r).status, after.get(r).status);
                (from != to).then_some(StatusTransition {
                    resource: r,
                    from,
                    to,
                })
            })
            .collect())
    }

    pub fn status(&self) -> LimitStatus {
        LimitStatus {
            water: self.resource_status(Resource::Water),
            carbon: self.resource_status(Resource::Carbon),
            energy: self.resource_status(Resource::Energy),
        }
    }

    fn resource_status(&self, resource: Resource) -> ResourceStatus {
        match self.limits.get(resource) {
            None => ResourceStatus {
                status: Status::NoLimit,
                fill_fraction: 0.0,
                display_fraction: 0.0,
            },
            Some(limit) => {
                let fill = resource.amount(&self.totals) / limit;
                ResourceStatus {
                    status: self.thresholds.classify(fill),
                    fill_fraction: fill,
                    display_fraction: fill.clamp(0.0, 1.0),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn water(ml: f64) -> FootprintEstimate {
        FootprintEstimate {
            water_ml: ml,
            ..FootprintEstimate::ZERO
        }
    }

    fn budget() -> SessionBudget {
        SessionBudget::new(Thresholds {
            approaching_fraction: 0.75,
            exceeded_fraction: 1.0,
        })
    }

    #[test]
    fn water_limit_on_empty_budget() {
        let mut b = budget();
        let s = b
            .set_limits(ResourceLimits {
                water_ml: Some(100.0),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(s.water.status, Status::Under);
        assert_eq!(s.water.fill_fraction, 0.0);
        assert_eq!(s.carbon.status, Status::NoLimit);
    }

    #[test]
    fn carbon_limit_uses_cumulative_total() {
        let mut b = budget();
        b.record(
            "p1",
            FootprintEstimate {
                energy_wh: 8.0,
                water_ml: 16.0,
                carbon_g: 3.2,
                latency_s: 1.0,
            },
        )
        .unwrap();
        let s = b
            .set_limits(ResourceLimits {
                carbon_g: Some(15.0),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(s.carbon.fill_fraction, 3.2 / 15.0);
        assert_eq!(b.totals().water_ml, 16.0);
        assert_eq!(b.history().len(), 1);
    }

    #[test]
    fn removing_limits() {
        let mut b = budget();
        b.set_limits(ResourceLimits {
            water_ml: Some(1.0),
            carbon_g: Some(1.0),
            energy_wh: Some(1.0),
        })
        .unwrap();
        let s = b.set_limits(ResourceLimits::none()).unwrap();
        for r in Resource::ALL {
            assert_eq!(s.get(r).status, Status::NoLimit);
        }
    }

    #[test]
    fn approaching_then_exceeded() {
        let mut b = budget();
        b.set_limits(ResourceLimits {
            water_ml: Some(1.0),
            ..Default::default()
        })
        .unwrap();
        let t = b.record("a", water(0.8)).unwrap();
        assert_eq!(
            t,
            vec![StatusTransition {
                resource: Resource::Water,
                from: Status::Under,
                to: Status::Approaching
            }]
        );
        assert_eq!(b.status().water.fill_fraction, 0.8);

        b.record("b", water(0.3)).unwrap();
        let s = b.status().water;
        assert_eq!(s.status, Status::Exceeded);
        assert!((s.fill_fraction - 1.1).abs() < 1e-12);
        assert_eq!(s.display_fraction, 1.0);
    }

    #[test]
    fn zero_record_changes_nothing() {
        let mut b = budget();
        b.set_limits(ResourceLimits {
            water_ml: Some(1.0),
            ..Default::default()
        })
        .unwrap();
        b.record("a", water(0.5)).unwrap();
        let before = b.status();
        assert!(b.record("z", FootprintEstimate::ZERO).unwrap().is_empty());
        assert_eq!(before, b.status());
    }

    #[test]
    fn boundaries() {
        let t = Thresholds {
            approaching_fraction: 0.75,
            exceeded_fraction: 1.0,
        };
        assert_eq!(t.classify(0.7499), Status::Under);
        assert_eq!(t.classify(0.75), Status::Approaching);
        assert_eq!(t.classify(1.0), Status::Approaching);
        assert_eq!(t.classify(1.0000001), Status::Exceeded);
    }

    #[test]
    fn rejects_non_positive_limits() {
        let mut b = budget();
        for bad in [0.0, -1.0, f64::NAN] {
            let err = b
                .set_limits(ResourceLimits {
                    water_ml: Some(bad),
                    ..Default::default()
                })
                .unwrap_err();
            assert!(matches!(err, BudgetError::NonPositiveLimit { resource: Resource::Water, .. }));
        }
        assert_eq!(b.limits(), &ResourceLimits::none());
    }

    #[test]
    fn rejects_negative_estimate() {
        let mut b = budget();
        assert_eq!(b.record("x", water(-1.0)), Err(BudgetError::InvalidEstimate));
        assert!(b.history().is_empty());
    }
}
