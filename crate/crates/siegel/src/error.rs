use thiserror::Error;

use crate::linalg::LinalgError;
use crate::report::ConfigIssue;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },
    #[error("frame is not isotropic (residual {residual:.3e})")]
    NotIsotropic { residual: f64 },
    #[error("Lagrangians are not transverse (margin {margin:.3e})")]
    NotTransverse { margin: f64 },
    #[error("tuple is not maximal")]
    NotMaximal,
    #[error("point is not on the tube")]
    NotOnTube,
    #[error("tubes are disjoint: endpoints do not interleave")]
    DisjointTubes,
    #[error("element is not Shilov hyperbolic (eigenvalue modulus {modulus:.6})")]
    NotShilovHyperbolic { modulus: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("builder error: {0}")]
    Builder(String),
    #[error("unsupported rank {0}")]
    UnsupportedRank(usize),
    #[error("double relation residual {residual:.3e} exceeds tolerance on {relation}")]
    DoubleRelation { relation: String, residual: f64 },
    #[error("dedup ambiguity between words {first} and {second}")]
    DedupAmbiguity { first: String, second: String },
    #[error("invalid configuration: {}", issues_summary(.0))]
    Config(Vec<ConfigIssue>),
    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

fn issues_summary(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
