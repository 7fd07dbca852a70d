use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("derivative requested at jump location x = {0}")]
    SingularPoint(f64),
    #[error("Im omega = {im_omega} is below the truncation band limit {limit}")]
    BandViolation { im_omega: f64, limit: f64 },
    #[error("dynamic range exceeded during propagation")]
    Overflow,
    #[error("wavefunction vanishes at x = {0}")]
    NodeAtPoint(f64),
    #[error("iteration failed to converge: {0}")]
    NonConvergence(String),
    #[error("zero of order > 2 suspected near omega = {re} + {im}i")]
    SuspectedHigherOrderZero { re: f64, im: f64 },
    #[error("root count never changes across the scanned parameter range")]
    NoMerge,
    #[error("no global phase makes the profile real (residual {0})")]
    NotRealizable(f64),
    #[error("generator has {0} node(s)")]
    NodesPresent(usize),
    #[error("omega^2 = {0} is not an eigenvalue for the requested boundary classes (mismatch {1})")]
    NotAnEigenvalue(f64, f64),
    #[error("Omega = 0 generators are not supported (marginal case)")]
    OmegaZeroUnsupported,
    #[error("generator requires real Omega^2 < 0")]
    ComplexOmegaSquared,
    #[error("Type 4 spectral changes are not tabulated")]
    Type4NotTabulated,
    #[error("prefactor pole at omega = {re} + {im}i")]
    PrefactorPole { re: f64, im: f64 },
    #[error("states live on different grids")]
    GridMismatch,
    #[error("bilinear norm vanishes ({0})")]
    ZeroNorm(f64),
    #[error("omega^2 equals Omega^2")]
    DegenerateEigenvalue,
    #[error("not a double zero: |J'| / |J''| = {0}")]
    NotADoubleZero(f64),
    #[error("omega is at a mode frequency, |J_q| = {0}")]
    AtModeFrequency(f64),
    #[error("hypergeometric parameter c = {0} is a nonpositive integer")]
    DegenerateParameters(f64),
    #[error("generator for this (n, sign) has nodes")]
    NodefulGenerator,
    #[error("alpha = 1 gives a degenerate self-replication")]
    AlphaOne,
    #[error("density must be positive, found {0}")]
    NonPositiveDensity(f64),
    #[error("density is not smooth enough for the transformation")]
    InsufficientSmoothness,
}

pub type Result<T> = std::result::Result<T, Error>;
