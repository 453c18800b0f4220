//! The nonlinear map `J_λ`, its Picard iteration on `B_R`, the advisory
//! smallness conditions and verification of `u = u_t + φ*`.

mod nonlinear;
mod perturbation;
mod picard;
mod smallness;
mod verify;

pub use nonlinear::{
    apply_j, linear_stability_constant, nonlinear_rhs, solve_rescaled, taylor_remainder, LinearRoute, PROBE_HEIGHTS,
};
pub use perturbation::Perturbation;
pub use picard::{
    grid_id, picard_solve, random_ball_element, IterationStep, IterationTrace, PicardConfig,
};
pub use smallness::{minimal_lambda, smallness_conditions, SmallnessReport};
pub use verify::{pde_residual, undilate, verify_solution, ResidualReport};
