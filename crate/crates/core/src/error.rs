use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("open-book angle is undefined on the binding (|z2| = {modulus:e})")]
    BindingPoint { modulus: f64 },

    #[error("quadrature integrand is not finite at node {node}")]
    QuadratureDivergence { node: String },

    #[error("directions do not fit in an open half-space (cap angle {half_angle} >= pi/2)")]
    NoEnclosingCone { half_angle: f64 },

    #[error("zero vector has no direction (norm {norm:e})")]
    ZeroVector { norm: f64 },

    #[error("inner angle {theta} outside [0, pi); the reachable radius is infinite")]
    AngleOutOfRange { theta: f64 },

    #[error("source disk has non-positive radius {radius}")]
    EmptyA { radius: f64 },

    #[error("cone field degenerates off the binding at |z2| = {modulus:e}: {reason}")]
    FieldDegenerate { modulus: f64, reason: String },

    #[error("return time {tau} exceeds cap {cap} at page point ({re}, {im})")]
    NonIntegrableTau { tau: f64, cap: f64, re: f64, im: f64 },

    #[error("path reached the binding (|z2| = {modulus:e}) after {steps} steps")]
    StuckAtBinding { modulus: f64, steps: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("failed to read {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name, used in serialized error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BindingPoint { .. } => "BindingPoint",
            Error::QuadratureDivergence { .. } => "QuadratureDivergence",
            Error::NoEnclosingCone { .. } => "NoEnclosingCone",
            Error::ZeroVector { .. } => "ZeroVector",
            Error::AngleOutOfRange { .. } => "AngleOutOfRange",
            Error::EmptyA { .. } => "EmptyA",
            Error::FieldDegenerate { .. } => "FieldDegenerate",
            Error::NonIntegrableTau { .. } => "NonIntegrableTau",
            Error::StuckAtBinding { .. } => "StuckAtBinding",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Io { .. } => "Io",
        }
    }
}
