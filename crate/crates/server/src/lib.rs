// SPDX-License-Identifier: Apache-2.0

//! HTTP service for calculator sessions and farm games.
//!
//! Each session and game has its own append-only JSONL log under the data
//! directory; on startup every log is replayed (from its latest snapshot
//! when one exists) to rebuild in-memory state.

pub mod app;
pub mod error;
pub mod game;
pub mod session;
pub mod store;
pub mod transcript;

pub use app::{router, serve, serve_on, AppState, Providers, StartupError};
