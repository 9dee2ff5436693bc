//! Decentralized receding-horizon ergodic coverage control.
//!
//! Each agent keeps a forgetting average of the cosine basis along its own
//! trajectory. Teammates share those coefficient arrays, the team mean is
//! compared against the target's coefficients, and every agent derives its
//! own control from a short backward costate pass. Nothing here depends on
//! team size except through the team mean.

mod basis;
mod control;
mod coverage;

pub use basis::{basis_eval, basis_grad, grid_coeffs, target_coeffs, BasisConfig, Coefficients, SPATIAL_DIM};
pub use control::{
    barrier, barrier_grad, compute_control, costate, ergodic_metric, horizon_cost, insertion_cost, ErgodicConfig,
};
pub use coverage::{forgetting_factor, team_coeffs, update_own_coverage, CoverageCoefficients};
