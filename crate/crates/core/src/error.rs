use thiserror::Error;

use crate::expr::Frame;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("negative derivative order for `{0}`")]
    NegativeOrder(String),

    #[error("frame mismatch: cannot combine {left:?}-frame and {right:?}-frame expressions")]
    FrameMismatch { left: Frame, right: Frame },

    #[error("division by zero")]
    DivisionByZero,

    #[error("denominator depends on lam non-monomially: {0}")]
    LambdaDenominator(String),

    #[error("no evolution rule for `{0}`")]
    MissingEvolution(String),

    #[error("time derivative leaves nonlocal jet `{0}` (u_t is not expressible on-shell)")]
    NonlocalTimeJet(String),

    #[error("time derivative of formal antiderivative `{0}` is not defined")]
    AtomTimeDerivative(String),

    #[error("derivative in `{var}` is not available in this context ({reason})")]
    BadDerivative { var: String, reason: String },

    #[error("unsupported composition of `{left}` with `{right}`")]
    UnsupportedComposition { left: String, right: String },

    #[error("formal adjoint of a negative power is not supported")]
    NegativePowerAdjoint,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("nonlocal obstruction: formal antiderivative with nonvanishing argument `{0}`")]
    NonlocalObstruction(String),

    #[error("substitution target for `{0}` lives in a different frame")]
    SubstitutionFrame(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("positivity certificate fails for {field}: margin {margin}")]
    Certificate { field: String, margin: f64 },

    #[error("near-singular sample: |denominator| = {0:e}")]
    NearSingular(f64),

    #[error("cannot evaluate numerically: {0}")]
    NotNumeric(String),

    #[error("unknown claim `{0}`")]
    UnknownClaim(String),

    #[error("unknown model object `{0}`")]
    UnknownObject(String),

    #[error("unknown mutation `{0}`")]
    UnknownMutation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
