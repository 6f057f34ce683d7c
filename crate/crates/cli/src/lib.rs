//! Command-line front end and acceptance suite for `histopush`.

pub mod acceptance;
pub mod commands;
