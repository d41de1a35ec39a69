use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid band limit {0}: must be at least 2")]
    InvalidBandLimit(usize),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shape leaves the tubular neighborhood: max |h| = {max_h:.6e} >= {bound:.6e}")]
    ShapeOutOfTubularNeighborhood { max_h: f64, bound: f64 },
    #[error("step too large: advected shape has max |h| = {max_h:.6e} >= {bound:.6e}")]
    StepTooLarge { max_h: f64, bound: f64 },
    #[error("incompatible data: {0}")]
    Compatibility(String),
    #[error("degenerate mode matrix at l = {l}, m = {m}: smallest singular value {sigma_min:.3e}")]
    SolverDegenerate { l: usize, m: i64, sigma_min: f64 },
    #[error("velocity not in tangent space: {0}")]
    NotInTangentSpace(String),
    #[error("degenerate constraints: {0}")]
    DegenerateConstraints(String),
    #[error("blow-up detected at t = {t:.6e}: {msg}")]
    BlowUpDetected { t: f64, msg: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("resonant forcing exponent {0}")]
    ResonantForcing(i32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
