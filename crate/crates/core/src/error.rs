use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("singular fiber point: K > 0 at zero distance")]
    SingularFiberPoint,
    #[error("unknown model id `{0}`")]
    UnknownModel(String),
    #[error("{what} is not available for model {model}")]
    Unsupported { model: String, what: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("set has zero measure")]
    EmptySet,
    #[error("trivial pair: the bilinear form vanishes")]
    TrivialPair,
    #[error("memory guard: {0}")]
    MemoryGuard(String),
    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
