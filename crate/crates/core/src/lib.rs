//! Constructive solver for perturbations of the diffusive Hamilton-Jacobi
//! equation `-Δu = (1 + g) |∇u|^p` on the half-space `x_N > 0`.
//!
//! The crate is organised bottom-up:
//!
//! * [`spaces`] holds the parameter pack, graded half-space grids, fields,
//!   finite-difference derivatives, the weighted sup norms and the
//!   `φ ↔ ψ = (x_N + t)^μ φ` change of variables.
//! * [`explicit_family`] evaluates the closed-form one-dimensional solutions
//!   `u_t`, the indicial exponents `β±(τ)` of the Euler equation and the
//!   one-dimensional barrier used by the comparison argument.
//! * [`linear_solver`] assembles and solves the drift operator `L_t`, the
//!   Schrödinger form `L^t` and the continuation family `L^t_τ` on truncated
//!   boxes `B_R × (ε, R)`.
//! * [`fixed_point`] builds the nonlinear map `J_λ` and runs the Picard
//!   iteration on the ball `B_R`.
//! * [`lemma_lab`] samples the vector inequalities used by the contraction
//!   estimate and gathers numerical evidence for the Liouville statements.
//! * [`experiment`] is the batch front door used by the `dhj` binary.

pub mod error;
pub mod experiment;
pub mod explicit_family;
pub mod fixed_point;
pub mod lemma_lab;
pub mod linear_solver;
pub mod spaces;

pub use error::{Error, Result};
