//! matchstat: exact counting of l-matchings in graphs, closed-form
//! statistics for their counts under G(n,p) and G(n,m), exhaustive pair
//! and tuple censuses, executable switching operations with integer
//! double-counting identities, and Monte Carlo / exhaustive distribution
//! experiments around the normal-to-log-normal transition.

pub mod cli;
pub mod config;
pub mod census;
pub mod count;
pub mod dist;
pub mod error;
pub mod formulas;
pub mod graph;
pub mod logreal;
pub mod switching;

pub use config::Caps;
pub use error::{Error, Result};
