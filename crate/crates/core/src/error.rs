use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("invalid beam specification: {0}")]
    InvalidSpec(String),

    #[error("grid window {window_um:.3} um is smaller than 6x the waist ({waist_um:.3} um)")]
    WindowTooSmall { window_um: f64, waist_um: f64 },

    #[error("empty superposition")]
    EmptySuperposition,

    #[error("grating period {period_um} um is not resolvable at pitch {dx_um} um (needs >= 4 samples)")]
    UnresolvablePeriod { period_um: f64, dx_um: f64 },

    #[error("geometry does not fit in the grid window: {0}")]
    GeometryExceedsWindow(String),

    #[error("no guided mode found")]
    NoGuidedMode,

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid propagation parameters: {0}")]
    InvalidParams(String),

    #[error("insufficient intensity on sampling circle of radius {radius_um} um")]
    InsufficientIntensity { radius_um: f64 },

    #[error("invalid ring radii: {0}")]
    InvalidRadii(String),

    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("cannot draw photons from a zero-power field")]
    ZeroPowerField,

    #[error("format error: {0}")]
    Format(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("{step}: {source}")]
    Step {
        step: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn in_step(self, step: impl Into<String>) -> Error {
        Error::Step {
            step: step.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
