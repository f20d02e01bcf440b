//! Negative-sampling DeepWalk with adversarial-training regularizers.
//!
//! The crate covers the whole pipeline: edge-list ingestion and
//! preprocessing ([`graph`]), random-walk pair sampling ([`walker`]),
//! connectivity-aware perturbation scales ([`proximity`]), training with
//! clean, random, fast-gradient, or neighbour-restricted perturbations
//! ([`train`], [`perturb`], [`loss`]), and link-prediction /
//! node-classification / attack evaluation ([`eval`]).

pub mod alias;
pub mod error;
pub mod eval;
pub mod graph;
pub mod labels;
pub mod loss;
pub mod model;
pub mod perturb;
pub mod proximity;
pub mod seed;
pub mod synthetic;
pub mod train;
pub mod walker;

pub use alias::AliasTable;
pub use error::{Error, Result};
pub use graph::{Graph, LoadOptions};
pub use labels::Labels;
pub use loss::{BatchIndex, PerturbationSet};
pub use model::EmbeddingModel;
pub use perturb::NeighborDirections;
pub use proximity::ScaleMatrix;
pub use train::{EpochStats, Method, TrainConfig, Trainer};
pub use walker::{PairBatch, WalkConfig};
