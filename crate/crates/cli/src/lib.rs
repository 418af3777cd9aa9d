//! Command implementations behind the `pwiscore` binary.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod tables;
