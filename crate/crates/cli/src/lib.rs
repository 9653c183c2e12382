//! Command-line front end: scenario files, subcommands and CSV reports.

pub mod commands;
pub mod config;
