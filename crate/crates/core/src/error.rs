use std::path::PathBuf;

/// Errors produced by mesh construction, assembly and time stepping.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("non-manifold mesh: edge ({a}, {b}) has {count} incident faces")]
    NonManifold { a: usize, b: usize, count: usize },

    #[error(
        "inconsistent orientation: directed edge ({a}, {b}) appears in faces {first} and {second}"
    )]
    Orientation {
        a: usize,
        b: usize,
        first: usize,
        second: usize,
    },

    #[error("invalid mesh: {0}")]
    Topology(String),

    #[error("degenerate face {face}: area {area:e} below threshold {threshold:e}")]
    DegenerateFace {
        face: usize,
        area: f64,
        threshold: f64,
    },

    #[error("level-set extraction failed: {0}; try a higher grid resolution")]
    Extraction(String),

    #[error("failed to parse {path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear solver failed after {iterations} iterations: {reason} (relative residual {residual:e})")]
    Solver {
        reason: String,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("{0}")]
    Undefined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
