use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    // construction and validation
    #[error("transform is not orthogonal (max |QᵀQ - I| = {residual:.3e})")]
    NotOrthogonal { residual: f64 },
    #[error("group closure exceeded cap of {cap} elements")]
    ClosureOverflow { cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("isotropy of point is ambiguous (residual {residual:.3e} inside the ambiguity band)")]
    IsotropyAmbiguous { residual: f64 },
    #[error("no witness point found for orbit type {class}")]
    NoWitness { class: String },
    #[error("grid too coarse: components of stratum {class} change under refinement ({coarse} -> {fine})")]
    ResolutionTooCoarse { class: String, coarse: usize, fine: usize },
    #[error("point is not in stratum {class}")]
    NotInStratum { class: String },
    #[error("not invariant: residual {residual:.3e} at {witness:?}")]
    NotInvariant { witness: Vec<f64>, residual: f64 },
    #[error("point {point:?} is outside the map domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("domains overlap at {witness:?}")]
    DomainsOverlap { witness: Vec<f64> },
    #[error("argument {s} outside [0, {eps}]")]
    OutOfRange { s: f64, eps: f64 },
    #[error("point is outside the tube")]
    Outside,
    #[error("projection onto conjugate subspaces is ambiguous (distance gap {gap:.3e})")]
    AmbiguousProjection { gap: f64 },
    #[error("tube radius or orbit separation too wide: {reason}")]
    TubeTooWide { reason: String },
    #[error("restricted map has a zero on the removed set at {witness:?}")]
    ZeroOnY { witness: Vec<f64> },
    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("representation not supported: {0}")]
    UnsupportedRep(String),
    #[error("theta11 slots are both 1; addition undefined")]
    AdditionUndefined,

    // numerics
    #[error("tube selection failed for {class} after {halvings} halvings: {reason}")]
    TubeSelectionFailed { class: String, halvings: usize, reason: String },
    #[error("partition violation in region {region}: {detail}")]
    PartitionViolation { region: char, detail: String },
    #[error("degenerate zero set could not be resolved: {0}")]
    DegenerateUnresolved(String),
    #[error("dimension {dim} unsupported for boundary degree")]
    DimensionUnsupported { dim: usize },
    #[error("field too small on region boundary (|f| = {margin:.3e})")]
    MarginTooSmall { margin: f64 },
    #[error("boundary refinement overflow: {0}")]
    RefinementOverflow(String),
    #[error("intersection number {value} not divisible by stabilizer order {stab}")]
    DivisibilityViolation { value: i64, stab: usize },
    #[error("step {step} ({class}): {source}")]
    AtStep {
        step: usize,
        class: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerics(&self) -> bool {
        match self {
            Error::TubeSelectionFailed { .. }
            | Error::PartitionViolation { .. }
            | Error::DegenerateUnresolved(_)
            | Error::MarginTooSmall { .. }
            | Error::RefinementOverflow(_)
            | Error::DivisibilityViolation { .. }
            | Error::ResolutionTooCoarse { .. }
            | Error::AmbiguousProjection { .. }
            | Error::DimensionUnsupported { .. } => true,
            Error::AtStep { source, .. } => source.is_numerics(),
            _ => false,
        }
    }

    pub(crate) fn at_step(self, step: usize, class: &str) -> Error {
        Error::AtStep { step, class: class.to_string(), source: Box::new(self) }
    }
}
