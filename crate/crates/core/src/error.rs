use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `⌊√(λ/κ)⌋` fell below the minimum grid size of 3.
    #[error("insufficient intensity: lambda={lambda}, kappa={kappa} gives m={m} (< 3)")]
    InsufficientIntensity { lambda: f64, kappa: f64, m: usize },

    #[error("zero intensity: the pattern contains no points")]
    ZeroIntensity,

    /// A moment matrix or variance is too close to singular for the requested statistic.
    #[error("degenerate test at p_c={p:.4e}, m={m}: {reason}")]
    Degenerate { p: f64, m: usize, reason: String },

    #[error("density value {value} exceeds the supplied bound {bound} at ({x}, {y})")]
    InvalidBound { value: f64, bound: f64, x: f64, y: f64 },

    #[error("sample too small: {n} points, at least {required} required")]
    SampleTooSmall { n: usize, required: usize },

    #[error("exhaustive enumeration refused for m={m} (only m in 3..=4)")]
    EnumerationTooLarge { m: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
