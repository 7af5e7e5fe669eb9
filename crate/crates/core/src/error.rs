use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("field ghost layer is stale in `{0}`; apply a boundary fill first")]
    StaleGhosts(&'static str),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("coefficient `{name}` must be positive, got {value:e} at cell {cell}")]
    NonPositive { name: &'static str, value: f64, cell: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("material law: {0}")]
    Material(String),

    #[error("linear solve did not converge: relative residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("structurally singular system at row {row}")]
    Singular { row: usize },

    #[error("invalid linear system: {0}")]
    System(String),

    #[error("CFL number {cfl:.4} exceeds the limit {limit}")]
    Cfl { cfl: f64, limit: f64 },

    #[error("negative density {value:e} at cell {cell}")]
    NegativeDensity { value: f64, cell: usize },

    #[error("density {min:e} fell below the floor {floor:e}")]
    DensityFloor { min: f64, floor: f64 },

    #[error("Picard iteration failed to converge in {iterations} iterations (last update {last_delta:e})")]
    PicardDiverged { iterations: usize, last_delta: f64 },

    #[error("run terminated early: {0}")]
    BlowUp(String),

    #[error("config error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config { line: None, msg: msg.into() }
    }

    pub fn config_at(line: usize, msg: impl Into<String>) -> Self {
        Error::Config { line: Some(line), msg: msg.into() }
    }
}
