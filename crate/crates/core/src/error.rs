use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("kernel clamps to zero mass (sum {0:e})")]
    DegenerateKernel(f64),
    #[error("{what} did not converge after {iters} iterations (last relative change {rel:e})")]
    NonConvergence { what: &'static str, iters: usize, rel: f64 },
    #[error("energy became non-finite at level {level}, iteration {iter}")]
    Divergence { level: usize, iter: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
