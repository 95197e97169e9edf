//! Data files, reports and commands around `flexassembly-core`.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod parallel;
pub mod report;
pub mod units;
pub mod validate;

pub use flexassembly_core as core;
