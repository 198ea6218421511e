//! Study orchestration behind the `schaeffer` command-line tool.

pub mod commands;
pub mod config;
pub mod output;
