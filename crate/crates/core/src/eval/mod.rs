//! Downstream evaluation of embeddings: link prediction, node
//! classification, and the perturbation attack.

pub mod auc;
pub mod classifier;
pub mod report;
pub mod split;
pub mod tasks;

pub use auc::auc;
pub use classifier::{FitConfig, LinearClassifier};
pub use report::{aggregate, AggregateRow, MetricRow};
pub use split::{split_classification, split_link_prediction, ClassSplit, LinkSplit};
pub use tasks::{attack, hadamard_features, link_prediction_auc, node_classification, AttackMode, AttackPoint};
