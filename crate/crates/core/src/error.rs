use thiserror::Error;

/// Failures raised by the charge pipelines, the Fock oracle and the circle model.
///
/// Most variants name the invariant that was violated together with the
/// measured defect and the tolerance it was compared against.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operator is not in the semigroup: {0}")]
    NotAMember(String),

    #[error("T is not {kind} (defect {defect:.3e} > {tol:.1e})")]
    AntisymmetryViolation { kind: &'static str, defect: f64, tol: f64 },

    #[error("recovery self-test failed for {what}: residual {residual:.3e} > {tol:.1e}")]
    RecoveryMismatch {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("index {0} is odd")]
    OddIndex(usize),

    #[error("index {0} is nonzero; operator must be surjective")]
    NonzeroIndex(usize),

    #[error("operator does not commute with the charge grading (defect {defect:.3e})")]
    NotChargeDiagonal { defect: f64 },

    #[error("invalid charge grading: {0}")]
    InvalidGrading(String),

    #[error("kappa is numerically degenerate on ker V+ ({nonzero} of {dim} eigenvalues above {tol:.1e})")]
    DegenerateForm { nonzero: usize, dim: usize, tol: f64 },

    #[error("|T| = {norm:.12} violates the bound |T| < 1 - {margin:.1e}")]
    NormBoundViolation { norm: f64, margin: f64 },

    #[error("unitary does not commute with P1 (defect {defect:.3e})")]
    NotGaugeCompatible { defect: f64 },

    #[error("vectors are not orthonormal (Gram defect {defect:.3e} > {tol:.1e})")]
    OrthonormalityFailure { defect: f64, tol: f64 },

    #[error("implementer check failed for {what}: residual {residual:.3e} > {tol:.1e}")]
    ImplementationDefect {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("span is not invariant (residual {residual:.3e} > {tol:.1e})")]
    NotInvariant { residual: f64, tol: f64 },

    #[error("bosonic cutoff too small: tail {tail:.3e} exceeds {max:.1e}")]
    CutoffTooSmall { tail: f64, max: f64 },

    #[error("Fock dimension {dim} exceeds cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("level {level} out of range (max {max})")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("character mismatch at sample {element}, level {level}: deviation {deviation:.3e} > {tol:.1e}")]
    Mismatch {
        element: usize,
        level: usize,
        deviation: f64,
        tol: f64,
    },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("non-monotone partial sums: {0}")]
    NonMonotone(String),

    #[error("index estimate unstable across cutoffs: {0:?}")]
    Unstable(Vec<usize>),

    #[error("no common phase on component {component}: residual {residual:.3e} > {tol:.1e}")]
    NoCommonPhase { component: usize, residual: f64, tol: f64 },

    #[error("statistics dimension 2^{0} does not fit in 64 bits")]
    Overflow(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
