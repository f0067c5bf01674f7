//! Multi-objective MaxCut with noise-injected simulated bifurcation.
//!
//! The pipeline scalarizes `K` cut objectives over a Das-Dennis weight
//! lattice, samples every scalarized Ising problem with a batched SB or
//! SimCIM integrator, filters the pooled samples down to their Pareto set and
//! scores it by hypervolume. Small instances can be checked against the
//! exhaustive oracles in [`oracle`].

pub mod error;
pub mod instance;
mod io;
pub mod oracle;
pub mod pareto;
pub mod pipeline;
pub mod scalarize;
pub mod solver;

pub use error::{Error, Result};
