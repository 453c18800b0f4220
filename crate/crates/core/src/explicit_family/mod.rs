//! Closed-form objects: the solution family `u_t`, the Euler indicial
//! exponents and the one-dimensional barrier.

mod euler;
mod quadrature;
mod solution;
mod supersolution;

pub use euler::{euler_exponents, exponent_ordering_report, EulerExponents, OrderingReport, OrderingRow};
pub use quadrature::gauss_legendre;
pub use solution::{u_t_eval, u_t_residual, u_t_residual_analytic, ExplicitSolution};
pub use supersolution::{
    one_dim_supersolution, reference_barrier, reference_barrier_slope, reference_source,
    BarrierSource, SupersolutionProfile, TailEnvelope,
};
