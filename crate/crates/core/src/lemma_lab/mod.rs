//! Sampling checks of the vector inequalities and numerical evidence for the
//! two Liouville statements.

mod inequalities;
mod liouville;

pub use inequalities::{
    check_inequality, inequality_sides, normalised_plain_remainder, sample_triple, InequalityEstimate,
    InequalityId, Triple, LOWER_BOUND_SLACK,
};
pub use liouville::{
    capped_fit, euler_profile_fit, liouville_halfspace_evidence, liouville_strip_evidence, CappedFit,
    EulerFitConfig, ExponentFit, HalfspaceReport, StripReport, EVIDENCE_MARKER, KERNEL_THRESHOLD,
};
