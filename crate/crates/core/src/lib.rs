//! Claim verification with verifier-guided test-time scaling.
//!
//! The pipeline retrieves evidence with BM25 and an embedding reranker,
//! samples several reasoning paths per claim from a chat model, and picks a
//! verdict by first path, majority vote, or verifier score. The adaptive
//! strategy routes each claim by a latent-space complexity classifier: easy
//! claims get one path, hard ones get full best-of-N.

pub mod cli;
pub mod complexity;
pub mod config;
pub mod evalkit;
pub mod fixture_server;
pub mod gateway;
pub mod http;
pub mod jsonl;
pub mod parse;
pub mod retrieval;
pub mod strategies;
pub mod types;
pub mod verifier;

use thiserror::Error;

pub use types::{ClaimRecord, Level, ReasoningPath, RunRecord, Strategy, Verdict};

/// Any failure surfaced by the command-line workflow, grouped by exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad arguments or config: exit 1.
    #[error("{0}")]
    Usage(String),
    /// Missing, malformed or inconsistent data: exit 2.
    #[error("{0}")]
    Data(String),
    /// A remote endpoint or replay fixture failed: exit 3.
    #[error("{0}")]
    Transport(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Data(_) => 2,
            Error::Transport(_) => 3,
        }
    }

    pub fn data(e: impl std::fmt::Display) -> Self {
        Error::Data(e.to_string())
    }
}

macro_rules! data_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for Error {
            fn from(e: $t) -> Self {
                Error::Data(e.to_string())
            }
        }
    )*};
}

data_errors!(
    jsonl::JsonlError,
    retrieval::IndexError,
    retrieval::PersistError,
    types::RecordError,
    verifier::VerifierError,
    std::io::Error,
    csv::Error,
    serde_json::Error
);

impl From<http::TransportError> for Error {
    fn from(e: http::TransportError) -> Self {
        Error::Transport(e.to_string())
    }
}

impl From<config::ConfigError> for Error {
    fn from(e: config::ConfigError) -> Self {
        Error::Usage(e.to_string())
    }
}

impl From<gateway::TemplateError> for Error {
    fn from(e: gateway::TemplateError) -> Self {
        match e {
            gateway::TemplateError::NoEvidence => Error::Data(e.to_string()),
            _ => Error::Usage(e.to_string()),
        }
    }
}

impl From<gateway::SampleError> for Error {
    fn from(e: gateway::SampleError) -> Self {
        match e {
            gateway::SampleError::Transport(t) => t.into(),
            gateway::SampleError::InvalidConfig(_) => Error::Usage(e.to_string()),
            gateway::SampleError::AllPathsUnparseable(_) => Error::Data(e.to_string()),
        }
    }
}

impl From<verifier::ScoreError> for Error {
    fn from(e: verifier::ScoreError) -> Self {
        match e {
            verifier::ScoreError::Transport(t) => t.into(),
            _ => Error::Data(e.to_string()),
        }
    }
}

impl From<retrieval::EmbedError> for Error {
    fn from(e: retrieval::EmbedError) -> Self {
        match e {
            retrieval::EmbedError::Transport(t) => t.into(),
            _ => Error::Data(e.to_string()),
        }
    }
}

impl From<retrieval::RerankError> for Error {
    fn from(e: retrieval::RerankError) -> Self {
        match e {
            retrieval::RerankError::Provider(p) => p.into(),
            _ => Error::Data(e.to_string()),
        }
    }
}

impl From<strategies::StrategyError> for Error {
    fn from(e: strategies::StrategyError) -> Self {
        use strategies::StrategyError as S;
        match e {
            S::Transport(t) => t.into(),
            S::Sample(s) => s.into(),
            S::Scoring(s) => s.into(),
            S::Template(t) => t.into(),
            S::InvalidConfig(_) | S::MissingScorer(_) => Error::Usage(e.to_string()),
            _ => Error::Data(e.to_string()),
        }
    }
}

impl From<complexity::ComplexityError> for Error {
    fn from(e: complexity::ComplexityError) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<evalkit::EvalError> for Error {
    fn from(e: evalkit::EvalError) -> Self {
        match e {
            evalkit::EvalError::Transport(t) => t.into(),
            _ => Error::Data(e.to_string()),
        }
    }
}
