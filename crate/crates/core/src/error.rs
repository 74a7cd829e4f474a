use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty foreground")]
    EmptyForeground,
    #[error("kernel size must be odd")]
    EvenKernel,
    #[error("no windows")]
    NoWindows,
    #[error("step {t} outside schedule range 1..={steps}")]
    StepOutOfRange { t: usize, steps: usize },
    #[error("patch grid does not cover image")]
    PatchCoverage,
    #[error("empty training data")]
    EmptyData,
    #[error("training diverged at epoch {epoch}: loss {loss} exceeds 10x initial {initial}")]
    Diverged { epoch: usize, loss: f64, initial: f64 },
    #[error("stats require unhealthy validation data")]
    NoAnomalousPixels,
    #[error("stats require normal foreground pixels")]
    NoNormalPixels,
    #[error("AIR undefined")]
    AirUndefined,
    #[error("apply requires normalized input")]
    NotNormalized,
    #[error("proof preconditions not met")]
    ProofPreconditions,
    #[error("AUPRC undefined")]
    AuprcUndefined,
    #[error("validation/test leakage")]
    Leakage,
    #[error("foreground too small for lesion spec")]
    LesionPlacement,
    #[error("no reconstruction for {0}")]
    MissingReconstruction(String),
    #[error("model failure: {0}")]
    Model(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
