//! Numerical toolkit for dyadic frequency analysis of kinetic transport equations.
//!
//! The crate provides, on periodic grids:
//! - spectral transforms, multipliers, and mixed Lebesgue norms ([`spectral`]),
//! - a smooth dyadic partition of unity and block projections ([`cutoffs`]),
//! - Besov, mixed Besov, Chemin-Lerner, and Orlicz L log L norms ([`besov`]),
//! - free-streaming transport, Duhamel quadrature, and the velocity-average
//!   decomposition into bounded and gradient parts ([`transport`]),
//! - paraproduct/remainder splitting of products ([`paraproduct`]),
//! - closed-form regularity-gain predictions with interpolation schedules ([`gains`]),
//! - synthetic field families with declared regularity ([`families`]),
//! - named verification suites producing machine-readable reports ([`verifier`]),
//! - a CLI driving the suites from a flat key=value config ([`config`], [`report`]).

pub mod besov;
pub mod config;
pub mod cutoffs;
pub mod families;
pub mod fieldio;
pub mod gains;
pub mod paraproduct;
pub mod quad;
pub mod report;
pub mod rho;
pub mod rng;
pub mod spectral;
pub mod transport;
pub mod verifier;

/// Crate-wide error type; variants match the failure classes the CLI maps to exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameter value; the message names the violated precondition.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// API misuse, e.g. transforming a field already in the frequency domain.
    #[error("usage error: {0}")]
    Usage(String),
    /// Non-finite values or a numerically meaningless result.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// File I/O or format failure.
    #[error("io error: {0}")]
    Io(String),
    /// Malformed config input, anchored to a 1-based line number.
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
