//! Command-line experiments over `qrobot-core`: Grover demos, the
//! complexity table, MDP planning, map checks and QRL training sweeps.

pub mod commands;
pub mod config;
pub mod error;
pub mod mdp_file;

pub use error::{HarnessError, Result};
