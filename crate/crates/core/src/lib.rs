//! Online makespan minimization on identical parallel machines.
//!
//! The crate bundles the pieces needed to study list schedulers under random
//! arrival orders: the job/schedule data model, the Greedy and
//! three-candidate online schedulers, an exact-optimum oracle, the classic
//! lower-bound input families, a stable-sequence checker, and a
//! permutation Monte-Carlo harness. The `romsched` binary wires everything
//! into reproducible command-line experiments.

pub mod algorithms;
pub mod cli;
pub mod error;
pub mod generators;
pub mod harness;
pub mod manifest;
pub mod model;
pub mod opt_oracle;
pub mod seeds;
pub mod stability;

pub use error::{Error, Result};
