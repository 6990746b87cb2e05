//! Core planning stack for occlusion-aware pedestrian collision avoidance.
//!
//! The crate is organised as a pure algorithmic core with no IO:
//!
//! - [`pomdp`]: generic discrete POMDP machinery — synchronous value
//!   iteration, belief filtering, and belief-weighted (QMDP-style) action
//!   selection with min-decomposition over multiple tracked agents.
//! - [`grid`]: uniform-axis discretization helpers (nearest snapping and
//!   mass-splitting interpolation).
//! - [`model`]: the driving domain — ego/pedestrian kinematics on a Frenet
//!   window, occlusion geometry, observation likelihoods, rewards, and the
//!   assembled discrete model consumed by the solver.
//! - [`aeb`]: last-resort emergency braking — time-to-brake / time-to-collision
//!   bookkeeping, constant-velocity pedestrian prediction with growing
//!   uncertainty, collision probability, and the brake decision rule.
//! - [`sim`]: deterministic fixed-step scenario simulation with sensor delay,
//!   actuation delay, and scripted pedestrian motion.
//! - [`metrics`]: episode and suite aggregation.
//!
//! Everything is deterministic for fixed inputs and seeds, including the
//! optional `parallel` feature: parallel sweeps partition work but never
//! reorder any floating-point reduction that could change results.
//!
//! `no_std` builds (with `alloc`) are supported by disabling the default
//! features; the `parallel` feature implies `std`.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod aeb;
pub(crate) mod fmath;
pub mod grid;
pub mod metrics;
pub mod model;
pub mod pomdp;
pub mod sim;
