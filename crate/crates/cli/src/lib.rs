//! Command-line driver for `nhband-core`: TOML run configs, deterministic
//! CSV/JSON tables, the trial cache and hopping table text formats.

pub mod complex;
pub mod config;
pub mod formats;
pub mod run;
pub mod table;
