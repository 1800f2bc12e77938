// SPDX-License-Identifier: Apache-2.0

//! Batch workloads: many footprint estimates or many seeded playthroughs.
//!
//! With the `parallel` feature (on by default) the batch entry points fan out
//! over rayon's pool; without it they fall back to the `*_sequential`
//! versions. Both produce identical output in identical order.

use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::ConfigError;
use crate::farm::policy::{simulate, Policy, SimulationReport};
use crate::farm::GameConfig;
use crate::footprint::{estimate_footprint, DatacenterProfile, FootprintEstimate, ModelProfile, QueryUsage};

pub fn estimate_batch_sequential(
    profile: &ModelProfile,
    dc: &DatacenterProfile,
    usages: &[QueryUsage],
) -> Vec<FootprintEstimate> {
    usages
        .iter()
        .map(|u| estimate_footprint(profile, dc, u))
        .collect()
}

#[cfg(feature = "parallel")]
pub fn estimate_batch(
    profile: &ModelProfile,
    dc: &DatacenterProfile,
    usages: &[QueryUsage],
) -> Vec<FootprintEstimate> {
    usages
        .par_iter()
        .map(|u| estimate_footprint(profile, dc, u))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn estimate_batch(
    profile: &ModelProfile,
    dc: &DatacenterProfile,
    usages: &[QueryUsage],
) -> Vec<FootprintEstimate> {
    estimate_batch_sequential(profile, dc, usages)
}

pub fn simulate_many_sequential(
    config: &Arc<GameConfig>,
    profile: &ModelProfile,
    seeds: &[u64],
    policy: Policy,
    max_ticks: u64,
) -> Result<Vec<SimulationReport>, ConfigError> {
    seeds
        .iter()
        .map(|&seed| simulate(Arc::clone(config), profile, seed, policy, max_ticks))
        .collect()
}

#[cfg(feature = "parallel")]
pub fn simulate_many(
    config: &Arc<GameConfig>,
    profile: &ModelProfile,
    seeds: &[u64],
    policy: Policy,
    max_ticks: u64,
) -> Result<Vec<SimulationReport>, ConfigError> {
    seeds
        .par_iter()
        .map(|&seed| simulate(Arc::clone(config), profile, seed, policy, max_ticks))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn simulate_many(
    config: &Arc<GameConfig>,
    profile: &ModelProfile,
    seeds: &[u64],
    policy: Policy,
    max_ticks: u64,
) -> Result<Vec<SimulationReport>, ConfigError> {
    simulate_many_sequential(config, profile, seeds, policy, max_ticks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    #[test]
    fn parallel_matches_sequential() {
        let c = Config::default();
        let game = Arc::new(c.game.clone());
        let seeds: Vec<u64> = (0..6).collect();
        let a = simulate_many(&game, &c.model, &seeds, Policy::Threshold(60), 3000).unwrap();
        let b = simulate_many_sequential(&game, &c.model, &seeds, Policy::Threshold(60), 3000).unwrap();
        assert_eq!(a, b);

        let usages: Vec<_> = (0..500).map(|i| QueryUsage::new(i, i * 3)).collect();
        assert_eq!(
            estimate_batch(&c.model, &c.datacenter, &usages),
            estimate_batch_sequential(&c.model, &c.datacenter, &usages)
        );
    }
}
