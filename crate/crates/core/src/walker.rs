//! Truncated random walks and the positive/negative pairs built from them.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Attempts made to replace a negative that collides with the true context.
pub const NEGATIVE_REDRAWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    pub negatives: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            walks_per_node: 1,
            walk_length: 40,
            window: 5,
            negatives: 5,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node < 1 {
            return Err(Error::Config("walks_per_node must be >= 1".into()));
        }
        if self.walk_length < 2 {
            return Err(Error::Config("walk_length must be >= 2".into()));
        }
        if self.window < 1 || self.window >= self.walk_length {
            return Err(Error::Config("window must satisfy 1 <= window < walk_length".into()));
        }
        if self.negatives < 1 {
            return Err(Error::Config("negatives must be >= 1".into()));
        }
        Ok(())
    }
}

/// Positive pairs with their negatives and per-pair perturbation scales.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairBatch {
    pub targets: Vec<u32>,
    pub contexts: Vec<u32>,
    /// `k` consecutive entries per pair.
    pub negatives: Vec<u32>,
    /// Scale factor per pair; 1.0 when no scale matrix is in use.
    pub scale: Vec<f64>,
    pub k: usize,
}

impl PairBatch {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn negatives_of(&self, pair: usize) -> &[u32] {
        &self.negatives[pair * self.k..(pair + 1) * self.k]
    }

    /// Largest node id referenced plus one.
    pub fn max_node(&self) -> usize {
        self.targets
            .iter()
            .chain(&self.contexts)
            .chain(&self.negatives)
            .map(|&v| v as usize + 1)
            .max()
            .unwrap_or(0)
    }
}

/// Samples `walks_per_node` walks from every node. Each pass visits all start
/// nodes in a freshly shuffled order.
pub fn generate_walks<R: Rng + ?Sized>(graph: &Graph, cfg: &WalkConfig, rng: &mut R) -> Vec<Vec<u32>> {
    let n = graph.node_count();
    let mut walks = Vec::with_capacity(n * cfg.walks_per_node);
    let mut starts: Vec<u32> = (0..n as u32).collect();
    for _ in 0..cfg.walks_per_node {
        starts.shuffle(rng);
        for &start in &starts {
            walks.push(walk_from(graph, start as usize, cfg.walk_length, rng));
        }
    }
    walks
}

pub fn walk_from<R: Rng + ?Sized>(graph: &Graph, start: usize, length: usize, rng: &mut R) -> Vec<u32> {
    let mut walk = Vec::with_capacity(length);
    let mut cur = start;
    walk.push(cur as u32);
    while walk.len() < length {
        if graph.out_degree(cur) == 0 {
            break;
        }
        cur = graph.sample_neighbor(cur, rng);
        walk.push(cur as u32);
    }
    walk
}

/// All `(s_i, s_j)` with `0 < |i - j| <= window`, in walk order. Repeated
/// nodes inside a window yield `(v, v)` pairs, which are kept.
pub fn build_pairs(walks: &[Vec<u32>], window: usize) -> Vec<(u32, u32)> {
    let mut pairs = Vec::new();
    for walk in walks {
        for (i, &target) in walk.iter().enumerate() {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(walk.len() - 1);
            for (j, &context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                if j != i {
                    pairs.push((target, context));
                }
            }
        }
    }
    pairs
}

/// Draws `k` negatives per pair from `table`. A draw equal to the pair's
/// context is retried up to [`NEGATIVE_REDRAWS`] times.
pub fn attach_negatives<R: Rng + ?Sized>(
    pairs: &[(u32, u32)],
    table: &AliasTable,
    k: usize,
    rng: &mut R,
) -> PairBatch {
    let mut batch = PairBatch {
        targets: Vec::with_capacity(pairs.len()),
        contexts: Vec::with_capacity(pairs.len()),
        negatives: Vec::with_capacity(pairs.len() * k),
        scale: vec![1.0; pairs.len()],
        k,
    };
    for &(target, context) in pairs {
        batch.targets.push(target);
        batch.contexts.push(context);
        for _ in 0..k {
            let mut neg = table.sample(rng) as u32;
            let mut tries = 0;
            while neg == context && tries < NEGATIVE_REDRAWS {
                neg = table.sample(rng) as u32;
                tries += 1;
            }
            batch.negatives.push(neg);
        }
    }
    batch
}

/// One epoch's worth of shuffled positive pairs.
pub fn epoch_pairs<R: Rng + ?Sized>(graph: &Graph, cfg: &WalkConfig, rng: &mut R) -> Vec<(u32, u32)> {
    let walks = generate_walks(graph, cfg, rng);
    let mut pairs = build_pairs(&walks, cfg.window);
    pairs.shuffle(rng);
    pairs
}
