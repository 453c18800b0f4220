//! Configuration files, named experiment suites, sweeps and artifact
//! emission for the `dhj` binary.

mod config;
mod run;
mod sweep;

pub use config::{
    ContinuationSection, ExhaustionSection, ExperimentConfig, ExperimentKind, GridConfig, LemmaSection,
    LiouvilleSection, ParameterInputs,
};
pub use run::{exit_code, run, write_error, ErrorRecord, Manifest, RunOutcome, Summary};
pub use sweep::{sweep, sweep_axes, SweepRow, SweepTable};
