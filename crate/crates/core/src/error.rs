use crate::concepts::ConceptVerdicts;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("random variables live on different sample spaces")]
    SpaceMismatch,
    #[error("invalid sample space: {0}")]
    InvalidSpace(String),
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("invalid market model: {0}")]
    InvalidModel(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("witness failed re-verification: {0}")]
    Witness(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("no-arbitrage verdicts disagree: {0:?}")]
    Disagreement(Box<ConceptVerdicts>),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
