use std::io;

use thiserror::Error;

/// Errors raised by the solver, the measurement routines and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("point ({x}, {y}) lies inside the obstacle of radius {r_wall}")]
    InsideObstacle { x: f64, y: f64, r_wall: f64 },

    #[error("blob {index} violates placement: {reason}")]
    BlobPlacement { index: usize, reason: String },

    #[error("probe level s = {0} is not a radial grid level")]
    OffGridProbe(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("singular tridiagonal system (mode {mode}, pivot {pivot:e})")]
    SingularSystem { mode: usize, pivot: f64 },

    #[error("CFL violation: Courant number {courant:.4} exceeds {limit}")]
    Cfl { courant: f64, limit: f64 },

    /// `line` is 1-based; 0 marks a check on the configuration as a whole.
    #[error("{}", config_message(*line, message))]
    Config { line: usize, message: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

fn config_message(line: usize, message: &str) -> String {
    if line == 0 {
        format!("config: {message}")
    } else {
        format!("config line {line}: {message}")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
