//! Claim complexity routing from layerwise latent representations.
//!
//! Each complexity class gets one prototype direction per layer (the first
//! principal component of that class's last-token latents). A new claim is
//! compared to the prototypes by cosine similarity at every layer, each layer
//! votes for its closest class, and the layer majority decides. Ties at
//! either stage go to level 1, which routes the claim to full sampling.

mod levels;
mod ltnt;
mod pca;
mod prototypes;

use thiserror::Error;

pub use levels::{derive_levels, LevelRecord};
pub use ltnt::{load_latents, read_latents, save_latents, write_latents, LatentStack};
pub use pca::{first_principal_component, Component, MAX_ITERATIONS, TOLERANCE};
pub use prototypes::{classify, fit_prototypes, majority_level, Classification, LayerRange, PrototypeSet};

#[derive(Debug, Error)]
pub enum ComplexityError {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("class {0} needs at least 2 labelled stacks")]
    ClassTooSmall(u8),
    #[error("shape mismatch: expected (L, h) = {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("invalid latent stack: {0}")]
    InvalidStack(String),
    #[error("baseline and decomposition runs cover different claims ({0})")]
    CoverageMismatch(String),
    #[error("no gold verdict for claim {0}")]
    MissingGold(String),
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
