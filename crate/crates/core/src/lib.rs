// SPDX-License-Identifier: Apache-2.0

//! Core of the EcoPrompt service: per-prompt inference footprints rendered in
//! relatable units, session budgets with adjustable limits, completion
//! providers (deterministic mock and live HTTPS), and the five-level farm game
//! whose shared lake is drained by AI use.

pub mod budget;
pub mod config;
pub mod error;
pub mod farm;
pub mod footprint;
pub mod provider;
pub mod relatable;
pub mod sweep;

pub use config::Config;
pub use error::ConfigError;
