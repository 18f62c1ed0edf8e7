use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A grid descriptor that violates its own invariants.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// An operation was handed a value it is not defined on (wrong
    /// representation tag, wrong grid mode, mismatched grids).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dyadic level 2^{level} outside the resolvable range [2^{min}, 2^{max}]")]
    DyadicRange { level: i32, min: i32, max: i32 },

    #[error("ladder reconstruction error {error:.3e} exceeds tolerance {tolerance:.1e}")]
    Reconstruction { error: f64, tolerance: f64 },

    #[error("unsupported norm {kind} on this input: {reason}")]
    UnsupportedNorm { kind: String, reason: String },

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("time lattice mismatch: {0}")]
    TimeLattice(String),

    #[error("smallness hypothesis violated: measured W-norm {measured:.4e} exceeds eta {eta:.4e}")]
    SmallnessViolated { measured: f64, eta: f64 },

    #[error(
        "Picard iteration did not contract within {sweeps} sweeps (last difference {last:.3e}, W-norm of free evolution {w_norm:.4e})"
    )]
    NoContraction { sweeps: usize, last: f64, w_norm: f64 },

    #[error("divergence at step {step}: {reason}")]
    Divergence { step: usize, reason: String },

    #[error("time step {index} alone carries norm {value:.4e} above threshold {threshold:.4e}")]
    Resolution { index: usize, value: f64, threshold: f64 },

    #[error("no scattering detected at horizon T = {horizon}: {reason}")]
    NoScattering { horizon: f64, reason: String },

    #[error("boundary mass fraction {fraction:.3e} exceeds {limit:.1e}; enlarge the domain")]
    DomainTruncation { fraction: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
