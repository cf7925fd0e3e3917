use thiserror::Error;

/// Errors raised by grid construction, operators and experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaborError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shift {value} is not an integer multiple of the grid spacing {spacing}")]
    Commensurability { value: f64, spacing: f64 },

    #[error("functions live on incompatible grids")]
    IncompatibleGrids,

    #[error("window family `{family}` is not supported in dimension {dim}")]
    UnsupportedDimension { family: &'static str, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate window pair: |<gamma, g>| = {0:e} does not exceed 1e-12")]
    DegeneratePair(f64),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("grid spacing {h} too coarse for depth {depth}; need h <= {required}")]
    Resolution { h: f64, depth: u32, required: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),
}

impl GaborError {
    /// Short machine-readable tag used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            GaborError::InvalidGrid(_) => "invalid_grid",
            GaborError::Commensurability { .. } => "commensurability",
            GaborError::IncompatibleGrids => "incompatible_grids",
            GaborError::UnsupportedDimension { .. } => "unsupported_dimension",
            GaborError::InvalidParameter(_) => "invalid_parameter",
            GaborError::DegeneratePair(_) => "degenerate_pair",
            GaborError::Range(_) => "range",
            GaborError::Resolution { .. } => "resolution",
            GaborError::Configuration(_) => "configuration",
        }
    }
}

pub type Result<T> = std::result::Result<T, GaborError>;
