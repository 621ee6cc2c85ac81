use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot project the zero wavevector")]
    ZeroWavevector,

    #[error("fields live on different lattices")]
    LatticeMismatch,

    #[error("field kind mismatch: {0}")]
    KindMismatch(String),

    #[error("field is not divergence-free (worst |k.a|/|k||a| = {worst:.3e} at mode {mode:?})")]
    NotDivergenceFree { worst: f64, mode: [i64; 3] },

    #[error("field is not conjugate-symmetric (defect {defect:.3e})")]
    NotConjugateSymmetric { defect: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("norm constant has a pole at gamma = {gamma} in dimension {dim}")]
    ConstantPole { gamma: f64, dim: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("march failed at node {node} (p = {p:.6e}): {reason}")]
    MarchFailure { node: usize, p: f64, reason: String },

    #[error("series bounds need beta > 0")]
    BetaZero,

    #[error("p0 = {p0} is not a grid node")]
    NotOnGrid { p0: f64 },

    #[error(
        "discriminant condition fails: omega = {omega:.6e}, eps1 = {epsilon1:.6e}, B3*b = {b3b:.6e}"
    )]
    Discriminant { omega: f64, epsilon1: f64, b3b: f64 },

    #[error("t = {t} lies outside the validity region 1/t > omega = {omega}")]
    ValidityRegion { t: f64, omega: f64 },

    #[error("trajectory blew up at t = {time:.6e} (norm {norm:.3e})")]
    BlowUp { time: f64, norm: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("coefficient overflow at order {order}")]
    Overflow { order: usize },
}

impl Error {
    /// True for failures caused by asking for a value outside the proven region.
    pub fn is_validity(&self) -> bool {
        matches!(self, Error::ValidityRegion { .. })
    }

    /// True for failures caused by malformed input rather than by the numerics.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::LatticeMismatch
                | Error::KindMismatch(_)
                | Error::NotDivergenceFree { .. }
                | Error::NotConjugateSymmetric { .. }
                | Error::ConstantPole { .. }
                | Error::InvalidGrid(_)
                | Error::BetaZero
                | Error::NotOnGrid { .. }
        )
    }
}
