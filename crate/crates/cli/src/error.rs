use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{reason}")]
    Usage { reason: String },
    #[error("chain size must be at least 2, got {n}")]
    InvalidSize { n: usize },
    #[error("cannot read config {}: {reason}", path.display())]
    ConfigRead { path: PathBuf, reason: String },
    #[error("malformed config: {reason}")]
    ConfigParse { reason: String },
    #[error("invalid chain: {reason}")]
    InvalidChain { reason: String },
    #[error("invalid sweep grid: {reason}")]
    InvalidGrid { reason: String },
    #[error("invalid perturbation plan: {reason}")]
    InvalidPlan { reason: String },
    #[error("numerical failure: {reason}")]
    Numerical { reason: String },
    #[error("cannot write {}: {reason}", path.display())]
    Io { path: PathBuf, reason: String },
}

impl CliError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage { .. } => "usage",
            CliError::InvalidSize { .. } => "invalid_size",
            CliError::ConfigRead { .. } => "config_read",
            CliError::ConfigParse { .. } => "config_parse",
            CliError::InvalidChain { .. } => "invalid_chain",
            CliError::InvalidGrid { .. } => "invalid_grid",
            CliError::InvalidPlan { .. } => "invalid_plan",
            CliError::Numerical { .. } => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    /// Process exit status: 2 usage, 3 invalid input, 4 numerical, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::InvalidSize { .. } => 2,
            CliError::ConfigRead { .. }
            | CliError::ConfigParse { .. }
            | CliError::InvalidChain { .. }
            | CliError::InvalidGrid { .. }
            | CliError::InvalidPlan { .. } => 3,
            CliError::Numerical { .. } => 4,
            CliError::Io { .. } => 5,
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": { "code": self.code(), "message": self.to_string() } }).to_string()
    }
}

impl From<susy_ep::synthesis::SynthesisError> for CliError {
    fn from(e: susy_ep::synthesis::SynthesisError) -> Self {
        use susy_ep::synthesis::SynthesisError as S;
        match e {
            S::InvalidSize { n } => CliError::InvalidSize { n },
            S::Linalg(_) => CliError::Numerical { reason: e.to_string() },
            _ => CliError::InvalidChain { reason: e.to_string() },
        }
    }
}

impl From<susy_ep::ep::EpError> for CliError {
    fn from(e: susy_ep::ep::EpError) -> Self {
        use susy_ep::ep::EpError as E;
        match e {
            E::Synthesis(s) => s.into(),
            E::EmptyGrid | E::InvalidControl { .. } => CliError::InvalidGrid { reason: e.to_string() },
            _ => CliError::Numerical { reason: e.to_string() },
        }
    }
}

impl From<susy_ep::perturbation::PerturbationError> for CliError {
    fn from(e: susy_ep::perturbation::PerturbationError) -> Self {
        use susy_ep::perturbation::PerturbationError as P;
        match e {
            P::Synthesis(s) => s.into(),
            P::NonPositiveEpsilon { .. }
            | P::Unsorted { .. }
            | P::NarrowGrid { .. }
            | P::BondIndex { .. }
            | P::MissingBond
            | P::BranchPair { .. } => CliError::InvalidPlan { reason: e.to_string() },
            _ => CliError::Numerical { reason: e.to_string() },
        }
    }
}

impl From<susy_ep::linalg::LinalgError> for CliError {
    fn from(e: susy_ep::linalg::LinalgError) -> Self {
        CliError::Numerical { reason: e.to_string() }
    }
}
