//! Negative-sampling loss over a pair batch, optionally evaluated at
//! perturbed embeddings, together with its analytic gradients.
//!
//! For a pair `(i, j)` with negatives `k_1..k_K` and scale `phi`:
//!
//! ```text
//! loss = softplus(-(u'_j + phi n'_j) . (u_i + phi n_i))
//!      + sum_k softplus((u'_k + n'_k) . (u_i + n_i))
//! ```
//!
//! The scale only enters the positive term. Without perturbations this is the
//! plain skip-gram negative-sampling loss.

use crate::model::EmbeddingModel;
use crate::walker::PairBatch;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `ln sigma(x)`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    // Four independent accumulators let the compiler vectorize the loop.
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Maps the node ids of a batch onto dense local slots. Target-side slots
/// cover pair targets; context-side slots cover contexts and negatives.
#[derive(Debug, Clone, Default)]
pub struct BatchIndex {
    pub target_nodes: Vec<u32>,
    pub context_nodes: Vec<u32>,
    pub target_slot: Vec<u32>,
    pub context_slot: Vec<u32>,
    pub negative_slot: Vec<u32>,
}

impl BatchIndex {
    pub fn new(batch: &PairBatch, nodes: usize) -> Self {
        let mut lookup = vec![u32::MAX; nodes.max(batch.max_node())];
        Self::with_lookup(batch, &mut lookup)
    }

    /// `lookup` must hold `u32::MAX` everywhere and is restored before return.
    pub fn with_lookup(batch: &PairBatch, lookup: &mut [u32]) -> Self {
        let mut idx = BatchIndex::default();
        idx.target_slot = intern(&batch.targets, &mut idx.target_nodes, lookup);
        for &v in &idx.target_nodes {
            lookup[v as usize] = u32::MAX;
        }
        idx.context_slot = intern(&batch.contexts, &mut idx.context_nodes, lookup);
        idx.negative_slot = intern(&batch.negatives, &mut idx.context_nodes, lookup);
        for &v in &idx.context_nodes {
            lookup[v as usize] = u32::MAX;
        }
        idx
    }
}

fn intern(ids: &[u32], nodes: &mut Vec<u32>, lookup: &mut [u32]) -> Vec<u32> {
    ids.iter()
        .map(|&v| {
            let slot = &mut lookup[v as usize];
            if *slot == u32::MAX {
                *slot = nodes.len() as u32;
                nodes.push(v);
            }
            *slot
        })
        .collect()
}

/// Per-node perturbation vectors aligned with a [`BatchIndex`].
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSet {
    pub dim: usize,
    /// One row per target-side slot.
    pub target: Vec<f64>,
    /// One row per context-side slot.
    pub context: Vec<f64>,
    /// Rows left at zero because their gradient vanished.
    pub zero_count: usize,
}

impl PerturbationSet {
    pub fn zeros(idx: &BatchIndex, dim: usize) -> Self {
        Self {
            dim,
            target: vec![0.0; idx.target_nodes.len() * dim],
            context: vec![0.0; idx.context_nodes.len() * dim],
            zero_count: 0,
        }
    }

    #[inline]
    pub fn target_row(&self, slot: usize) -> &[f64] {
        &self.target[slot * self.dim..(slot + 1) * self.dim]
    }

    #[inline]
    pub fn context_row(&self, slot: usize) -> &[f64] {
        &self.context[slot * self.dim..(slot + 1) * self.dim]
    }

    pub fn target_rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.target.chunks_exact(self.dim)
    }

    pub fn context_rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.context.chunks_exact(self.dim)
    }
}

/// Gradient rows aligned with a [`BatchIndex`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub dim: usize,
    pub target: Vec<f64>,
    pub context: Vec<f64>,
}

impl Gradients {
    pub fn zeros(idx: &BatchIndex, dim: usize) -> Self {
        Self {
            dim,
            target: vec![0.0; idx.target_nodes.len() * dim],
            context: vec![0.0; idx.context_nodes.len() * dim],
        }
    }

    #[inline]
    pub fn target_row(&self, slot: usize) -> &[f64] {
        &self.target[slot * self.dim..(slot + 1) * self.dim]
    }

    #[inline]
    pub fn context_row(&self, slot: usize) -> &[f64] {
        &self.context[slot * self.dim..(slot + 1) * self.dim]
    }
}

/// What the accumulated gradient is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradTarget {
    /// Embedding rows; perturbations are constants.
    Parameters,
    /// Perturbation rows. Positive-term contributions carry the pair scale.
    Perturbations,
}

/// Evaluates the batch loss and, when `grads` is given, adds
/// `weight * dloss/d(rows)` into it. Returns the unweighted loss.
pub fn accumulate(
    model: &EmbeddingModel,
    batch: &PairBatch,
    idx: &BatchIndex,
    perturb: Option<&PerturbationSet>,
    use_scale: bool,
    mut grads: Option<(&mut Gradients, f64, GradTarget)>,
) -> f64 {
    let d = model.dim();
    let mut a = vec![0.0; d];
    let mut a_neg = vec![0.0; d];
    let mut b = vec![0.0; d];
    let mut grad_a = vec![0.0; d];
    let mut loss = 0.0;

    for p in 0..batch.len() {
        let i = batch.targets[p] as usize;
        let j = batch.contexts[p] as usize;
        let ts = idx.target_slot[p] as usize;
        let cs = idx.context_slot[p] as usize;
        let phi = if use_scale { batch.scale[p] } else { 1.0 };

        a.copy_from_slice(model.target_row(i));
        b.copy_from_slice(model.context_row(j));
        a_neg.copy_from_slice(model.target_row(i));
        if let Some(n) = perturb {
            axpy(phi, n.target_row(ts), &mut a);
            axpy(phi, n.context_row(cs), &mut b);
            axpy(1.0, n.target_row(ts), &mut a_neg);
        }

        let x = dot(&a, &b);
        loss += softplus(-x);

        let Some((g, weight, wrt)) = grads.as_mut() else {
            for (q, &k) in batch.negatives_of(p).iter().enumerate() {
                let ks = idx.negative_slot[p * batch.k + q] as usize;
                let y = if let Some(n) = perturb {
                    neg_score(model.context_row(k as usize), n.context_row(ks), &a_neg)
                } else {
                    dot(model.context_row(k as usize), &a_neg)
                };
                loss += softplus(y);
            }
            continue;
        };

        // d softplus(-x)/dx = sigma(x) - 1
        let pos_coeff = (sigmoid(x) - 1.0)
            * *weight
            * match wrt {
                GradTarget::Parameters => 1.0,
                GradTarget::Perturbations => phi,
            };
        grad_a.iter_mut().for_each(|v| *v = 0.0);
        axpy(pos_coeff, &b, &mut grad_a);
        {
            let row = &mut g.context[cs * d..(cs + 1) * d];
            axpy(pos_coeff, &a, row);
        }

        for (q, &k) in batch.negatives_of(p).iter().enumerate() {
            let ks = idx.negative_slot[p * batch.k + q] as usize;
            let ctx = model.context_row(k as usize);
            let y = match perturb {
                Some(n) => neg_score(ctx, n.context_row(ks), &a_neg),
                None => dot(ctx, &a_neg),
            };
            loss += softplus(y);
            let neg_coeff = sigmoid(y) * *weight;
            match perturb {
                Some(n) => {
                    let nk = n.context_row(ks);
                    for ((ga, &c), &e) in grad_a.iter_mut().zip(ctx).zip(nk) {
                        *ga += neg_coeff * (c + e);
                    }
                }
                None => axpy(neg_coeff, ctx, &mut grad_a),
            }
            let row = &mut g.context[ks * d..(ks + 1) * d];
            axpy(neg_coeff, &a_neg, row);
        }

        let row = &mut g.target[ts * d..(ts + 1) * d];
        axpy(1.0, &grad_a, row);
    }
    loss
}

#[inline]
fn neg_score(ctx: &[f64], pert: &[f64], a: &[f64]) -> f64 {
    ctx.iter()
        .zip(pert)
        .zip(a)
        .map(|((c, e), x)| (c + e) * x)
        .sum()
}

/// Batch loss, clean when `perturb` is `None`.
pub fn batch_loss(
    model: &EmbeddingModel,
    batch: &PairBatch,
    idx: &BatchIndex,
    perturb: Option<&PerturbationSet>,
    use_scale: bool,
) -> f64 {
    accumulate(model, batch, idx, perturb, use_scale, None)
}

/// Gradient of the batch loss with respect to the embedding rows.
pub fn parameter_gradients(
    model: &EmbeddingModel,
    batch: &PairBatch,
    idx: &BatchIndex,
    perturb: Option<&PerturbationSet>,
    use_scale: bool,
) -> (f64, Gradients) {
    let mut g = Gradients::zeros(idx, model.dim());
    let loss = accumulate(
        model,
        batch,
        idx,
        perturb,
        use_scale,
        Some((&mut g, 1.0, GradTarget::Parameters)),
    );
    (loss, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_pair(u: &[f64], v: &[f64]) -> (EmbeddingModel, PairBatch) {
        let d = u.len();
        let mut target = vec![0.0; 2 * d];
        let mut context = vec![0.0; 2 * d];
        target[..d].copy_from_slice(u);
        context[d..].copy_from_slice(v);
        let model = EmbeddingModel::from_matrices(2, d, target, context).unwrap();
        let batch = PairBatch {
            targets: vec![0],
            contexts: vec![1],
            negatives: vec![],
            scale: vec![1.0],
            k: 0,
        };
        (model, batch)
    }

    #[test]
    fn stable_primitives() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0 && softplus(-1000.0) < 1e-300);
        assert!((log_sigmoid(0.0) + std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }

    #[test]
    fn zero_embeddings_give_log2_per_term() {
        let model = EmbeddingModel::from_matrices(4, 3, vec![0.0; 12], vec![0.0; 12]).unwrap();
        let batch = PairBatch {
            targets: vec![0, 1, 2],
            contexts: vec![1, 2, 3],
            negatives: vec![0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3],
            scale: vec![1.0; 3],
            k: 4,
        };
        let idx = BatchIndex::new(&batch, 4);
        let loss = batch_loss(&model, &batch, &idx, None, false);
        assert!((loss - 3.0 * 5.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn closed_form_single_pair() {
        let u = [0.3, -0.4, 1.2];
        let (model, batch) = single_pair(&u, &u);
        let idx = BatchIndex::new(&batch, 2);
        let s = dot(&u, &u);
        let loss = batch_loss(&model, &batch, &idx, None, false);
        assert!((loss + log_sigmoid(s)).abs() < 1e-15);
    }

    #[test]
    fn zero_perturbation_is_bit_identical() {
        let (model, batch) = single_pair(&[0.1, 0.2], &[-0.3, 0.5]);
        let idx = BatchIndex::new(&batch, 2);
        let zero = PerturbationSet::zeros(&idx, 2);
        let clean = batch_loss(&model, &batch, &idx, None, true);
        let pert = batch_loss(&model, &batch, &idx, Some(&zero), true);
        assert_eq!(clean.to_bits(), pert.to_bits());
    }

    #[test]
    fn hand_gradient() {
        let (model, batch) = single_pair(&[1.0, 0.0], &[0.0, 1.0]);
        let idx = BatchIndex::new(&batch, 2);
        let (_, g) = parameter_gradients(&model, &batch, &idx, None, false);
        assert_eq!(g.target_row(0), &[0.0, -0.5]);
        assert_eq!(g.context_row(0), &[-0.5, 0.0]);
    }

    #[test]
    fn batch_index_slots() {
        let batch = PairBatch {
            targets: vec![3, 1, 3],
            contexts: vec![1, 2, 4],
            negatives: vec![2, 0, 1, 1, 0, 0],
            scale: vec![1.0; 3],
            k: 2,
        };
        let idx = BatchIndex::new(&batch, 5);
        assert_eq!(idx.target_nodes, vec![3, 1]);
        assert_eq!(idx.target_slot, vec![0, 1, 0]);
        assert_eq!(idx.context_nodes, vec![1, 2, 4, 0]);
        assert_eq!(idx.negative_slot, vec![1, 3, 0, 0, 3, 3]);
    }
}
