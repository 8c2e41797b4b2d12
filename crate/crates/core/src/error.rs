use thiserror::Error;

/// Errors raised by the solvers, functionals and scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("value {value} at cell {cell} lies outside the domain of {phi}")]
    Domain {
        phi: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("singular support: u = {u:e} > 0 where v = 0 (cell {cell})")]
    SingularSupport { cell: usize, u: f64 },

    #[error("time step {dt:e} exceeds the stability limit {limit:e} at t = {t}")]
    StepSize { dt: f64, limit: f64, t: f64 },

    #[error("divergence at step {step} (t = {t}): {what}")]
    Divergence { step: usize, t: f64, what: String },

    #[error("non-finite value while evaluating {what} at t = {t}, x = {x:?}")]
    Evaluation { what: String, t: f64, x: [f64; 2] },

    #[error("inequality not applicable: {0}")]
    NotApplicable(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
