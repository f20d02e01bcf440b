//! Evaluation protocols over a target-embedding matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rand::Rng;

use super::auc::auc;
use super::classifier::{Features, FitConfig, LinearClassifier};
use super::split::{split_classification, LinkSplit};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::Labels;
use crate::loss::{norm, parameter_gradients, BatchIndex};
use crate::model::EmbeddingModel;
use crate::perturb::ZERO_GRADIENT;
use crate::seed::{sub_seed, Stream};
use crate::walker::{attach_negatives, epoch_pairs, WalkConfig};

fn check_shape(emb: &[f64], dim: usize) -> Result<usize> {
    if dim == 0 || !emb.len().is_multiple_of(dim) {
        return Err(Error::Config(format!(
            "embedding matrix of {} values is not a multiple of dimension {dim}",
            emb.len()
        )));
    }
    Ok(emb.len() / dim)
}

/// Elementwise products `u_u * u_v`, one row per pair.
pub fn hadamard_features(emb: &[f64], dim: usize, pairs: &[(u32, u32)]) -> Vec<f64> {
    let mut out = Vec::with_capacity(pairs.len() * dim);
    for &(u, v) in pairs {
        let a = &emb[u as usize * dim..(u as usize + 1) * dim];
        let b = &emb[v as usize * dim..(v as usize + 1) * dim];
        out.extend(a.iter().zip(b).map(|(x, y)| x * y));
    }
    out
}

/// Fits a binary classifier on training edges against as many sampled
/// non-edges and returns the AUC of its scores on the test pairs.
/// `emb` must be indexed like the graph the split came from.
pub fn link_prediction_auc(emb: &[f64], dim: usize, split: &LinkSplit, seed: u64) -> Result<f64> {
    let n = check_shape(emb, dim)?;
    if n != split.nodes {
        return Err(Error::Config(format!("{n} embedding rows for {} split nodes", split.nodes)));
    }
    let negatives = split.train_negatives(seed);
    let mut pairs = split.train_edges.clone();
    pairs.extend_from_slice(&negatives);
    let y: Vec<bool> = (0..pairs.len()).map(|i| i < split.train_edges.len()).collect();
    let x = hadamard_features(emb, dim, &pairs);
    let clf = LinearClassifier::fit_binary(Features::new(&x, dim), &y, &FitConfig::default())?;

    let score = |set: &[(u32, u32)]| -> Vec<f64> {
        let f = hadamard_features(emb, dim, set);
        f.chunks_exact(dim).map(|row| clf.score(row)).collect()
    };
    auc(&score(&split.test_edges), &score(&split.test_negatives))
}

/// Accuracy of a one-vs-rest classifier on a stratified hold-out.
pub fn node_classification(emb: &[f64], dim: usize, labels: &Labels, train_ratio: f64, seed: u64) -> Result<f64> {
    let n = check_shape(emb, dim)?;
    if n != labels.node_count() {
        return Err(Error::Config(format!("{n} embedding rows for {} labelled-graph nodes", labels.node_count())));
    }
    let split = split_classification(labels, train_ratio, seed)?;
    if split.test.is_empty() {
        return Err(Error::Labels("no test nodes".into()));
    }
    let gather = |set: &[(usize, u32)]| -> Vec<f64> {
        set.iter()
            .flat_map(|&(v, _)| emb[v * dim..(v + 1) * dim].iter().copied())
            .collect()
    };
    let x = gather(&split.train);
    let y: Vec<u32> = split.train.iter().map(|&(_, c)| c).collect();
    let clf = LinearClassifier::fit_ovr(Features::new(&x, dim), &y, labels.class_count(), &FitConfig::default())?;
    let test = gather(&split.test);
    let hits = test
        .chunks_exact(dim)
        .zip(&split.test)
        .filter(|(row, &(_, c))| clf.predict(row) == c)
        .count();
    Ok(hits as f64 / split.test.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMode {
    /// Along the gradient of the full-corpus loss.
    Adversarial,
    /// Along standard-normal directions.
    Random,
}

impl AttackMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackMode::Adversarial => "adversarial",
            AttackMode::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackPoint {
    pub eps: f64,
    pub accuracy: f64,
}

/// Unit attack direction per node (zero rows where the gradient vanishes).
pub fn attack_directions(model: &EmbeddingModel, graph: &Graph, walk: &WalkConfig, mode: AttackMode, seed: u64) -> Vec<f64> {
    let d = model.dim();
    let n = model.nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, Stream::Attack, 0));
    let mut dirs = vec![0.0; n * d];
    match mode {
        AttackMode::Random => {
            for x in dirs.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
        }
        AttackMode::Adversarial => {
            let pairs = epoch_pairs(graph, walk, &mut rng);
            let batch = attach_negatives(&pairs, &graph.negative_distribution(), walk.negatives, &mut rng);
            let idx = BatchIndex::new(&batch, n);
            let (_, grads) = parameter_gradients(model, &batch, &idx, None, false);
            for (slot, &v) in idx.target_nodes.iter().enumerate() {
                dirs[v as usize * d..(v as usize + 1) * d].copy_from_slice(grads.target_row(slot));
            }
        }
    }
    for row in dirs.chunks_exact_mut(d) {
        let len = norm(row);
        if len < ZERO_GRADIENT {
            row.iter_mut().for_each(|x| *x = 0.0);
        } else {
            row.iter_mut().for_each(|x| *x /= len);
        }
    }
    dirs
}

/// Moves every target embedding by `eps` along its attack direction and
/// reruns node classification, once per grid value. One direction draw is
/// shared across the grid.
#[allow(clippy::too_many_arguments)]
pub fn attack(
    model: &EmbeddingModel,
    graph: &Graph,
    labels: &Labels,
    eps_grid: &[f64],
    mode: AttackMode,
    train_ratio: f64,
    seed: u64,
    walk: &WalkConfig,
) -> Result<Vec<AttackPoint>> {
    if model.nodes() != graph.node_count() {
        return Err(Error::Config("model and graph disagree on node count".into()));
    }
    let d = model.dim();
    let dirs = attack_directions(model, graph, walk, mode, seed);
    let clean = model.target();
    let mut out = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let accuracy = if eps == 0.0 {
            node_classification(clean, d, labels, train_ratio, seed)?
        } else {
            let moved: Vec<f64> = clean.iter().zip(&dirs).map(|(x, g)| x + eps * g).collect();
            node_classification(&moved, d, labels, train_ratio, seed)?
        };
        out.push(AttackPoint { eps, accuracy });
    }
    Ok(out)
}
