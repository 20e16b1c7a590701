use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Summary of the closest probe a failed seed search reached.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSummary {
    pub lambda: f64,
    pub r_tr: Option<f64>,
    pub mean_coverage: f64,
    pub mean_avg_degree: Option<f64>,
    pub probes: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid node id {0:?}")]
    InvalidNode(NodeId),

    #[error(
        "unreachable target: no connected graph with {wanted} nodes after {attempts} attempts \
         ({saturated} saturated, {disconnected} disconnected)"
    )]
    UnreachableTarget {
        wanted: usize,
        attempts: usize,
        saturated: usize,
        disconnected: usize,
    },

    #[error("seed search failed after {} probes (best: lambda={}, coverage={})", best.probes, best.lambda, best.mean_coverage)]
    SearchFailed { best: ProbeSummary },

    #[error("irreducible bridge {{{u}, {v}}}: no alternative endpoint pair exists")]
    IrreducibleBridge { u: usize, v: usize },

    #[error("target degree {target} unreachable: stuck at {reached} with no eligible edge left")]
    TargetUnreachable { target: f64, reached: f64 },

    #[error("search space of {size} assignments exceeds the oracle cap of {cap}")]
    TooLargeForOracle { size: f64, cap: f64 },

    #[error("unsupported model structure: {0}")]
    UnsupportedModel(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the failure.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::InvalidNode(_) => "invalid-node",
            Error::UnreachableTarget { .. } => "unreachable-target",
            Error::SearchFailed { .. } => "search-failed",
            Error::IrreducibleBridge { .. } => "irreducible-bridge",
            Error::TargetUnreachable { .. } => "target-unreachable",
            Error::TooLargeForOracle { .. } => "too-large-for-oracle",
            Error::UnsupportedModel(_) => "unsupported-model",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }

    /// Whether the caller supplied something unusable, as opposed to a
    /// well-formed request the domain cannot satisfy.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::InvalidNode(_) | Error::UnsupportedModel(_) | Error::Json(_) | Error::Io(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
