use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error(
        "cell Péclet number {peclet:.3} ≥ 2 at x_N = {height:.4e}; refine the vertical grid"
    )]
    Peclet { peclet: f64, height: f64 },

    #[error("the drift operator L_t requires t ≥ 1, got t = {0}")]
    ShiftTooSmall(f64),

    #[error("continuation parameter τ = {0} outside [0, 1]")]
    TauOutOfRange(f64),

    #[error("{solver} did not converge in {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("tail integral diverges: {0}")]
    DivergentTail(String),

    #[error("exponent ordering violated: {inequality} at τ = {tau}")]
    OrderingViolated { inequality: String, tau: f64 },

    #[error("lower bound of the convexity remainder violated by {violation:.3e} (sample {index})")]
    LowerBoundViolated { violation: f64, index: u64 },

    #[error("nontrivial discrete kernel: ‖ψ‖_∞ = {0:.3e}")]
    NontrivialKernel(f64),

    #[error("iterate left the ball B_R at step {step}: ‖φ‖_X = {norm:.6e} > {radius}")]
    EscapedBall { step: usize, norm: f64, radius: f64 },

    #[error("Picard iteration diverging at step {step} (ratio {ratio:.3})")]
    Diverging { step: usize, ratio: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures map to exit code 3, everything the user can fix in
    /// the configuration to exit code 2.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter(_)
                | Error::InvalidGrid(_)
                | Error::Config(_)
                | Error::Parse(_)
                | Error::Io(_)
                | Error::TauOutOfRange(_)
                | Error::ShiftTooSmall(_)
        )
    }
}
