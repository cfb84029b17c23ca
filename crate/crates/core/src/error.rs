use thiserror::Error;

/// Errors shared across the toolkit.
///
/// The variants map onto the failure classes the operations distinguish:
/// invalid mathematical input (`Domain`), inputs past a configured table or
/// height limit (`Capacity`), a tolerance that could not be certified
/// (`Accuracy`), evaluation too close to a pole or a zero of a denominator
/// (`PoleProximity`, `Conditioning`), and structural problems with zero lists
/// and searches.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("accuracy not certified: {0} (best estimate {best}, error {err})", best = .1, err = .2)]
    Accuracy(String, f64, f64),

    #[error("precision target unachievable: {0}")]
    Precision(String),

    #[error("pole proximity: {0}")]
    PoleProximity(String),

    #[error("ill-conditioned evaluation: {0}")]
    Conditioning(String),

    #[error("too few zeros: need at least {need}, got {got}")]
    TooFewZeros { need: usize, got: usize },

    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("search failure: {0}")]
    SearchFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
