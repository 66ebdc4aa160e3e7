//! Parameter-sparse random graph model (SRGM) for directed networks.
//!
//! Edge `(i, j)` forms independently with probability
//! `sigmoid(alpha_i + beta_j + mu + gamma' Z_ij)` where the node effects
//! `alpha, beta >= 0` are sparse. The crate fits the model by l1-penalized
//! likelihood, tunes the penalty, reports Wald intervals for `(mu, gamma)`,
//! checks the matrix conditions behind the theory, and runs the simulation
//! and giant-component bias experiments.

pub mod bias;
pub mod diagnostics;
pub mod document;
pub mod error;
pub mod graph;
pub mod inference;
pub mod model;
pub mod rng;
pub mod sim;
pub mod solver;
pub mod tuning;

pub use error::{Result, SrgmError};
