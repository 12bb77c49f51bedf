use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The IFS data violates a nested-fractal axiom.
    #[error("invalid fractal specification: {0}")]
    InvalidSpec(String),

    /// A requested construction exceeds the configured size budget.
    #[error("budget exceeded in {stage}: {detail}")]
    Budget { stage: &'static str, detail: String },

    /// Input outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scale or time grid falls outside the mesh-resolvable window.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// The conductance fixed-point iteration failed.
    #[error("renormalization failed: {0}")]
    Renormalization(String),

    /// The iterative eigensolver did not reach the residual target.
    #[error("eigensolver did not converge: achieved residual {residual:.3e}, target {target:.3e}")]
    EigenConvergence { residual: f64, target: f64 },

    /// Operands live on different meshes.
    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    /// The requested case is outside the range the construction supports.
    #[error("unsupported case: {0}")]
    Unsupported(String),

    /// Not enough usable samples for a regression.
    #[error("exponent fit failed: {0}")]
    Fit(String),

    /// Bad user-supplied parameter.
    #[error("usage error: {0}")]
    Usage(String),
}
