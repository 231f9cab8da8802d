use thiserror::Error;

/// Errors raised by the linear-systems, regulator and steering layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero polynomial is not allowed here")]
    ZeroPolynomial,

    #[error("denominator is identically zero")]
    AlgebraicDegeneracy,

    #[error("pole at the origin: d.c. gain is infinite")]
    PoleAtOrigin,

    #[error("transfer function is improper (numerator degree {num} > denominator degree {den})")]
    Improper { num: usize, den: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Q filter rejected: {0}")]
    InvalidQ(String),

    #[error("Q filter is identically one")]
    QIsUnity,

    #[error("Q/G_n is not causal: relative degree of Q ({q}) is below that of G_n ({gn})")]
    NonCausalCorrection { q: isize, gn: isize },

    #[error("algebraic loop in the interconnection cannot be resolved")]
    AlgebraicLoop,

    #[error("closed loop is unstable (characteristic root with Re = {max_real:.6e})")]
    Unstable { max_real: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("degenerate result: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
