use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("pole at s = 1")]
    PoleAtOne,
    #[error("precision {target:e} unreachable (best bound {best:e})")]
    PrecisionUnreachable { target: f64, best: f64 },
    #[error("Re s = {re} is not greater than the abscissa of convergence {sigma_c}")]
    OutsideConvergence { re: f64, sigma_c: f64 },
    #[error("series table has {len} entries, cutoff {cutoff} requested")]
    CutoffExceedsTable { len: usize, cutoff: usize },
    #[error("pole of the function inside the disc of radius {radius} around {center}")]
    PoleInDisc { center: Complex64, radius: f64 },
    #[error("function vanishes on the contour near {near}")]
    ZeroOnContour { near: Complex64 },
    #[error("phase step could not be resolved near {near}")]
    PhaseStepTooLarge { near: Complex64 },
    #[error("winding number {winding} persists in a box of size {size:e} around {center}")]
    UnresolvedCluster {
        center: Complex64,
        size: f64,
        winding: i64,
    },
    #[error("degenerate seed at {at}: constraint gradient {gradient:e}")]
    DegenerateSeed { at: Complex64, gradient: f64 },
    #[error("step size collapsed near {at}")]
    StepCollapse { at: Complex64 },
    #[error("component with {points} samples is too short to classify")]
    InsufficientArc { points: usize },
    #[error("strip boundary candidate leaves the window through its top or bottom edge")]
    IncompleteBoundary,
    #[error("tangent undefined at {at}: f and f' vanish together")]
    TangentUndefined { at: Complex64 },
    #[error("foreign zero inside the patch: winding {found} where {expected} expected")]
    ForeignZeroInPatch { expected: i64, found: i64 },
    #[error("branch assembly failed: {0}")]
    BranchAssemblyFailed(String),
    #[error("inverse not found for target value {target}")]
    InverseNotFound { target: Complex64 },
    #[error("function is not injective on the sampled domain")]
    NotInjective,
    #[error("pre-image region unresolved at r = {r}: {reason}")]
    RegionUnresolved { r: f64, reason: String },
    #[error("Euler factor vanishes at p = {p}")]
    FactorVanishes { p: u64 },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("parse error on line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("coefficients are not totally multiplicative: a({m}*{n}) != a({m})a({n})")]
    MultiplicativityViolation { m: u64, n: u64 },
    #[error("exponents violate additivity at n = {0}")]
    AdditivityViolation(u64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable identifier, used in CLI failure reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::PoleAtOne => "pole_at_one",
            Error::PrecisionUnreachable { .. } => "precision_unreachable",
            Error::OutsideConvergence { .. } => "outside_convergence",
            Error::CutoffExceedsTable { .. } => "cutoff_exceeds_table",
            Error::PoleInDisc { .. } => "pole_in_disc",
            Error::ZeroOnContour { .. } => "zero_on_contour",
            Error::PhaseStepTooLarge { .. } => "phase_step_too_large",
            Error::UnresolvedCluster { .. } => "unresolved_cluster",
            Error::DegenerateSeed { .. } => "degenerate_seed",
            Error::StepCollapse { .. } => "step_collapse",
            Error::InsufficientArc { .. } => "insufficient_arc",
            Error::IncompleteBoundary => "incomplete_boundary",
            Error::TangentUndefined { .. } => "tangent_undefined",
            Error::ForeignZeroInPatch { .. } => "foreign_zero_in_patch",
            Error::BranchAssemblyFailed(_) => "branch_assembly_failed",
            Error::InverseNotFound { .. } => "inverse_not_found",
            Error::NotInjective => "not_injective",
            Error::RegionUnresolved { .. } => "region_unresolved",
            Error::FactorVanishes { .. } => "factor_vanishes",
            Error::ConfigInvalid(_) => "config_invalid",
            Error::ParseError { .. } => "parse_error",
            Error::MultiplicativityViolation { .. } => "multiplicativity_violation",
            Error::AdditivityViolation(_) => "additivity_violation",
            Error::InvalidInput(_) => "invalid_input",
            Error::Io(_) => "io",
        }
    }

    /// Validation problems (bad input) as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ConfigInvalid(_)
                | Error::ParseError { .. }
                | Error::MultiplicativityViolation { .. }
                | Error::AdditivityViolation(_)
                | Error::InvalidInput(_)
                | Error::OutsideConvergence { .. }
                | Error::CutoffExceedsTable { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
