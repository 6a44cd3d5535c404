//! QUBO formulations for user clustering and joint sub-channel / power
//! allocation in multi-UAV downlink networks.
//!
//! The pipeline runs in two stages. GUs are first associated with the
//! preplaced UAVs by minimizing total link distance ([`clustering`]); the
//! sub-channel and transmit-power level of every UAV are then chosen by a
//! Dinkelbach iteration over a fractional signal-to-interference objective
//! whose inner maximization is a QUBO ([`allocation`]). Every QUBO is handed
//! to a classical [`solvers::Sampler`]: exhaustive enumeration, steepest
//! descent, simulated annealing, or a component-decomposing wrapper that
//! stands in for a hybrid annealing service.

pub mod allocation;
pub mod clustering;
pub mod error;
pub mod evaluate;
pub mod experiments;
pub mod netmodel;
pub mod qubo;
pub mod seeds;
pub mod solvers;

pub use error::{Error, Result};
