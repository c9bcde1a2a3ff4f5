//! Classically simulated decision stack for a quantum robot.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides:
//!
//! - [`statevector`]: dense n-qubit registers with Hadamard preparation,
//!   reversible function oracles and measurement.
//! - [`grover`]: amplitude amplification, the closed-form amplitude of the
//!   marked state and a search driver with oracle-query accounting.
//! - [`planner`]: Bellman backups and value iteration on tabular
//!   stochastic-shortest-path MDPs, Grover-backed action selection and the
//!   classical-vs-quantum complexity table.
//! - [`gridworld`]: the 13x13 rooms-with-corridor environment and its BFS
//!   shortest-path oracle.
//! - [`qrl`]: reinforcement learning with amplitude-encoded action policies.
//!
//! All randomness is drawn from caller-supplied [`rand::Rng`] sources, so
//! every result is reproducible from a seed.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod gridworld;
pub mod grover;
pub mod planner;
pub mod qrl;
pub mod statevector;

pub use error::{Error, Result};
