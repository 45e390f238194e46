//! Landscape-aware contextual-bandit hyper-heuristic for Euclidean TSP
//! operator selection.
//!
//! A LinUCB controller picks one of four tour-perturbation operators each
//! iteration from a context built of static instance features and the recent
//! search state. The crate also ships the instance generator, the comparison
//! baselines and the benchmark harness used to evaluate them.

pub mod baselines;
pub mod bench;
pub mod construction;
pub mod controller;
pub mod error;
pub mod instance;
pub mod landscape;
pub mod metrics;
pub mod rng;
pub mod search;
pub mod tour;

pub use error::{Error, Result};
pub use instance::{generate, DistanceMatrix, Family, Instance, Point};
pub use search::{run, Acceptance, ControllerKind, PreparedInstance, RunConfig, RunResult};
pub use tour::{Operator, Tour};
