use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    /// A root finder or quadrature loop failed to reach its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The mesh eigenvalues did not stabilize under refinement. Both the
    /// coarse and the refined spectra are kept for diagnostics.
    #[error(
        "mesh solve did not converge: residual {residual:.3e} exceeds target {target:.3e} \
         at {n_points} mesh points"
    )]
    MeshNotConverged {
        n_points: usize,
        residual: f64,
        target: f64,
        coarse: Vec<f64>,
        fine: Vec<f64>,
    },

    #[error("gamma fit failed: {reason} (after {} iterations)", trace.len())]
    Fit { reason: String, trace: Vec<f64> },

    /// Writing an artifact failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) => 1,
            Error::Numerical(_) | Error::MeshNotConverged { .. } | Error::Fit { .. } => 2,
            Error::Usage(_) => 64,
            Error::Io(_) => 74,
        }
    }
}
