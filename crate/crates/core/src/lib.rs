//! Digital human model for evaluating static manual work.
//!
//! The crate builds a 28-revolute-joint body model scaled from stature and
//! body weight, computes joint moment loads for a posture under gravity and
//! external loads, and predicts joint-strength decay and maximum endurance
//! time for continuous static operations with a muscle fatigue model.
//!
//! Pipeline, end to end ([`status::evaluate_scenario`]):
//!
//! 1. [`anthro`] — scale segment lengths and distribute segment masses.
//! 2. [`kinematics`] — resolve the joint chain, pose it, check joint limits.
//! 3. [`dynamics`] — recursive Newton-Euler joint moments and forces.
//! 4. [`strength`] — posture-dependent joint capacity and population spread.
//! 5. [`fatigue`] — capacity decay, endurance time, resistance regression.
//! 6. [`status`] — joint-strength state vector, its change over the work
//!    history, and population endurance/reduction grids.
//!
//! All computation is pure and deterministic; models are immutable after
//! construction and safe to share across threads.

pub mod anthro;
pub mod data;
pub mod dynamics;
pub mod error;
pub mod fatigue;
pub mod kinematics;
pub mod report;
pub mod status;
pub mod strength;

pub use error::{Error, Result};

/// Default gravity: 9.81 m/s² along world −Y (the model's vertical axis).
pub const DEFAULT_GRAVITY: [f64; 3] = [0.0, -9.81, 0.0];
