use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid misaligned: a = {a}, points_per_unit = {ppu} does not place the well boundary on a node")]
    GridAlignment { a: f64, ppu: u32 },

    #[error("grid too large: {n} points exceeds the configured maximum {max}")]
    GridTooLarge { n: usize, max: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("degenerate field: {0} norm is zero")]
    DegenerateField(&'static str),

    #[error("non-finite values produced by {0}")]
    NonFinite(&'static str),

    #[error("exterior condition violated: field is nonzero outside the well")]
    ExteriorCondition,

    #[error("matrix of dimension {n} exceeds the dense-storage budget of {budget} bytes")]
    MatrixBudget { n: usize, budget: usize },

    #[error("eigensolver residual {residual:e} exceeds bound {bound:e}")]
    EigenResidual { residual: f64, bound: f64 },

    #[error("no convergence after {steps} steps; last increment {last_delta:e} (tol {tol:e})")]
    NoConvergence { steps: usize, last_delta: f64, tol: f64 },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
