//! Tile-level generation with SAT-encoded local patterns and targeted
//! exploration of an expressive-range grid.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod encoder;
pub mod error;
pub mod explorer;
pub mod metrics;
pub mod pathfind;
pub mod patterns;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
