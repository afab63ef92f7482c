use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sites {first} and {second} coincide (distance {distance:e})")]
    CoincidentSites {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("site index {index} out of range for {len} sites")]
    SiteOutOfRange { index: usize, len: usize },

    #[error("centre site {0} must not be part of its own cluster")]
    CentreInCluster(usize),

    #[error("cluster of size {size} exceeds the limit of {max}")]
    ClusterTooLarge { size: usize, max: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("observable is singular at {re}{im:+}i")]
    Singularity { re: f64, im: f64 },

    #[error("observable is complex valued; use the complex evaluation path")]
    NotRealValued,

    #[error("chemical potential collides with eigenvalue {0} at zero temperature")]
    DegenerateOccupation(f64),

    #[error("reference spectrum has no gap at the chemical potential")]
    Metallic,

    #[error("singularity anchor lies inside the interval set")]
    AnchorInsideSet,

    #[error("interpolation nodes {0} and {1} coincide")]
    DuplicateNodes(usize, usize),

    #[error("scaled spectrum leaves [-1, 1]")]
    SpectrumOutOfRange,

    #[error("moment sequence not positive-definite at level {0}")]
    MomentsNotPositive(usize),

    #[error("quadrature nodes are degenerate")]
    DegenerateNodes,

    #[error("continued fraction hits a pole")]
    ContinuedFractionPole,

    #[error("linear system is singular or ill-conditioned (estimate {0:e})")]
    IllConditioned(f64),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("iteration diverged at step {iteration} (residual {residual:e})")]
    Diverged { iteration: usize, residual: f64 },

    #[error("need at least {needed} usable points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
