//! Command-line harness for the pedestrian collision-avoidance stack:
//! configuration loading, value-table caching, scenario-suite execution,
//! reward-parameter sweeps, policy-slice export, and CSV/stdout reporting.
//!
//! The heavy lifting (model construction, solver, belief tracking, emergency
//! braking, closed-loop simulation) lives in `pedplan-core`; this crate owns
//! everything that touches files, terminals, and run orchestration.

pub mod config;
pub mod output;
pub mod qcache;
pub mod slice;
pub mod suite;
pub mod sweep;
