//! Command-line driver: configuration, experiment runners and reports.

pub mod commands;
pub mod config;
pub mod report;
