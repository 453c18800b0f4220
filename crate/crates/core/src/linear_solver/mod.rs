//! Assembly and solution of the linear problems on truncated half-space grids.

mod assemble;
mod krylov;
mod solve;
mod sparse;
mod studies;

pub use assemble::{assemble, rescaled_drift_matrix, LinearSystem, OperatorKind};
pub use krylov::{bicgstab, pcg, KrylovOutcome, LinePreconditioner};
pub use solve::{conjugated_solution, solve, solve_direct, solve_from, SolveReport, SolverConfig};
pub use sparse::CsrMatrix;
pub use studies::{
    continuation_sweep, exhaustion_study, unit_bump, bump_at, boundary_cap, ContinuationRow, ContinuationTable, DataRule,
    ExhaustionConfig, ExhaustionRow, ExhaustionTable, BLOW_UP_FACTOR,
};
