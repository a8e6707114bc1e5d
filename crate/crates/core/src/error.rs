use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { position: usize, name: String },
    #[error("expression evaluated to a non-finite value at ({x}, {y}, t={t})")]
    NonFinite { x: f64, y: f64, t: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("field is not compactly supported: {0}")]
    NotCompactlySupported(String),
    #[error("field is time dependent where an autonomous field is required")]
    NotAutonomous,
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("triangulation is not a sphere: {0}")]
    NotSphere(String),
    #[error("contour tree construction failed: {0}")]
    Tree(String),
    #[error("median verification failed: component of measure {component} exceeds bound {bound}")]
    MedianVerification { component: f64, bound: f64 },
    #[error("point ({x}, {y}) lies outside the chart")]
    OutsideChart { x: f64, y: f64 },
    #[error("implicit midpoint iteration did not converge at t={t}")]
    NonConvergence { t: f64 },
    #[error("winding residual {residual} around puncture {puncture} is too large")]
    WindingResidual { puncture: usize, residual: f64 },
    #[error("trajectory endpoint is outside the invariant disk")]
    EndpointOutsideDisk,
    #[error("puncture {0} lies inside the invariant disk")]
    PunctureInsideDisk(usize),
    #[error("geometry violation: {0}")]
    Geometry(String),
    #[error("calibration failed: best mismatch {mismatch} exceeds threshold {threshold}")]
    Calibration { mismatch: f64, threshold: f64 },
    #[error("homology basis mismatch: {0}")]
    Basis(String),
    #[error("decomposition check failed: {0}")]
    Decomposition(String),
}
