use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variant names are stable: the command-line front end reports them verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Verblunsky coefficient alpha[{index}] has modulus {modulus} >= 1")]
    InvalidVerblunsky { index: usize, modulus: f64 },

    #[error("need {needed} Verblunsky coefficients, got {got}")]
    InsufficientCoefficients { needed: usize, got: usize },

    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),

    #[error("moment Toeplitz form is not positive definite at order {order} (pivot {pivot:e})")]
    NotPositiveDefinite { order: usize, pivot: f64 },

    #[error("|1 - z conj(w)| = {gap:e} is inside the Christoffel-Darboux exclusion band")]
    NearDiagonalSingularity { gap: f64 },

    #[error("point with modulus {modulus} lies on the unit circle")]
    OnUnitCircle { modulus: f64 },

    #[error("points lie on opposite sides of the unit circle")]
    MixedSides,

    #[error("leading coefficient modulus {0:e} is degenerate")]
    DegenerateLeadingCoefficient(f64),

    #[error("root finder did not converge: {0}")]
    NoConvergence(String),

    #[error("argument-principle integral {value} is {distance} from the nearest integer")]
    BoundaryProximity { value: f64, distance: f64 },

    #[error("annulus ({s}, {t}) touches the unit circle")]
    RegionTouchesCircle { s: f64, t: f64 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("{excluded} of {trials} trials excluded (budget {budget})")]
    TooManyExclusions {
        excluded: usize,
        trials: usize,
        budget: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// The variant name, e.g. `"NotPositiveDefinite"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidVerblunsky { .. } => "InvalidVerblunsky",
            Error::InsufficientCoefficients { .. } => "InsufficientCoefficients",
            Error::QuadratureNotConverged(_) => "QuadratureNotConverged",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NearDiagonalSingularity { .. } => "NearDiagonalSingularity",
            Error::OnUnitCircle { .. } => "OnUnitCircle",
            Error::MixedSides => "MixedSides",
            Error::DegenerateLeadingCoefficient(_) => "DegenerateLeadingCoefficient",
            Error::NoConvergence(_) => "NoConvergence",
            Error::BoundaryProximity { .. } => "BoundaryProximity",
            Error::RegionTouchesCircle { .. } => "RegionTouchesCircle",
            Error::InvalidRegion(_) => "InvalidRegion",
            Error::InvalidWeight(_) => "InvalidWeight",
            Error::TooManyExclusions { .. } => "TooManyExclusions",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
