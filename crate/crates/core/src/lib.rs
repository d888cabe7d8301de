//! Racing on Frenet tracks with TD3 agents: track geometry, a single-track
//! vehicle model, a Frenet planner with pure pursuit, the learning core and
//! the training/evaluation harness.

pub mod env;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod harness;
pub mod planning;
pub mod rl;
pub mod track;
pub mod vehicle;

pub use error::{Error, Result};
