use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("singular sample at node ({re:e}, {im:e})")]
    SingularSample { re: f64, im: f64 },
    #[error("infinite norm: {0}")]
    InfiniteNorm(String),
    #[error("region not hit by any of {samples} samples")]
    RegionNotHit { samples: usize },
    #[error("precondition of {check} fails at node ({re:e}, {im:e}): {detail}")]
    Precondition {
        check: &'static str,
        re: f64,
        im: f64,
        detail: String,
    },
    #[error("pair rejected: {0}")]
    Uncertified(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("derivative vanishes at cell {index}")]
    SingularDerivative { index: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
