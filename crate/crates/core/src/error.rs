use std::fmt;

/// Errors raised while validating, assembling, solving or verifying a problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The diffusivity was sampled at `x` with value `k <= 0`.
    NonPositiveDiffusivity { x: f64, k: f64 },
    /// Neither end of the domain carries a Dirichlet condition.
    NoDirichletEnd,
    /// `x_lo >= x_hi`, or an endpoint is not finite.
    EmptyDomain { lo: f64, hi: f64 },
    /// A coefficient field returned a non-finite value.
    NonFiniteCoefficient { name: &'static str, x: f64 },
    TooFewElements(usize),
    /// Mesh nodes are not strictly increasing or not finite.
    InvalidMesh(String),
    IndexOutOfRange { index: usize, len: usize },
    UnsupportedOrder(usize),
    MeshProblemMismatch { mesh: (f64, f64), problem: (f64, f64) },
    DimensionMismatch(String),
    NonPositiveScale { row: usize, scale: f64 },
    InteriorDirichletUnsupported(usize),
    EndHasDirichlet,
    /// The weight function drops below the representable range on this domain;
    /// use the equilibrated assembly instead.
    WeightUnderflow { min_log_alpha: f64 },
    ZeroPivot { row: usize },
    SystemTooLarge(usize),
    NotConstantCoefficient,
    /// The closed-form oracle needs the unit interval with homogeneous Dirichlet data.
    OracleUnavailable(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPositiveDiffusivity { x, k } => {
                write!(f, "diffusivity must be positive, got k({x}) = {k}")
            }
            Error::NoDirichletEnd => write!(f, "at least one end must carry a Dirichlet condition"),
            Error::EmptyDomain { lo, hi } => write!(f, "empty domain [{lo}, {hi}]"),
            Error::NonFiniteCoefficient { name, x } => {
                write!(f, "coefficient {name} is not finite at x = {x}")
            }
            Error::TooFewElements(n) => write!(f, "need at least 2 elements, got {n}"),
            Error::InvalidMesh(msg) => write!(f, "invalid mesh: {msg}"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::UnsupportedOrder(n) => {
                write!(f, "Gauss rule with {n} points is not supported (1..=64)")
            }
            Error::MeshProblemMismatch { mesh, problem } => write!(
                f,
                "mesh spans [{}, {}] but the problem domain is [{}, {}]",
                mesh.0, mesh.1, problem.0, problem.1
            ),
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::NonPositiveScale { row, scale } => {
                write!(f, "row scale must be positive, got {scale} at row {row}")
            }
            Error::InteriorDirichletUnsupported(node) => {
                write!(f, "Dirichlet conditions only apply at end nodes, got node {node}")
            }
            Error::EndHasDirichlet => write!(f, "that end carries a Dirichlet condition"),
            Error::WeightUnderflow { min_log_alpha } => write!(
                f,
                "weight function underflows (min ln alpha = {min_log_alpha}); use the equilibrated assembly"
            ),
            Error::ZeroPivot { row } => write!(f, "zero pivot in tridiagonal elimination at row {row}"),
            Error::SystemTooLarge(n) => write!(f, "system of size {n} is too large"),
            Error::NotConstantCoefficient => {
                write!(f, "the exact-solution oracle requires constant coefficients")
            }
            Error::OracleUnavailable(why) => write!(f, "exact-solution oracle unavailable: {why}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
