//! Perturbation generators: fast-gradient (adversarial), Gaussian (random),
//! and the interpretable variant restricted to directions toward nearest
//! neighbours in embedding space.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::loss::{accumulate, axpy, dot, norm, BatchIndex, GradTarget, Gradients, PerturbationSet};
use crate::model::EmbeddingModel;
use crate::walker::PairBatch;

/// Gradient norms below this are treated as zero.
pub const ZERO_GRADIENT: f64 = 1e-12;

/// Rescales every row of `rows` to norm `eps` in place. Rows with vanishing
/// norm are zeroed and counted.
fn normalize_rows(rows: &mut [f64], dim: usize, eps: f64) -> usize {
    let mut zeros = 0;
    for row in rows.chunks_exact_mut(dim) {
        let n = norm(row);
        if n < ZERO_GRADIENT {
            row.iter_mut().for_each(|x| *x = 0.0);
            zeros += 1;
        } else {
            let s = eps / n;
            row.iter_mut().for_each(|x| *x *= s);
        }
    }
    zeros
}

/// `eps * g / |g|` per batch node, where `g` is the gradient of the clean
/// batch loss with respect to that node's target (or context) row.
pub fn fast_gradient(model: &EmbeddingModel, batch: &PairBatch, idx: &BatchIndex, eps: f64) -> PerturbationSet {
    let mut g = Gradients::zeros(idx, model.dim());
    accumulate(model, batch, idx, None, false, Some((&mut g, 1.0, GradTarget::Parameters)));
    let d = model.dim();
    let zero_count = normalize_rows(&mut g.target, d, eps) + normalize_rows(&mut g.context, d, eps);
    PerturbationSet {
        dim: d,
        target: g.target,
        context: g.context,
        zero_count,
    }
}

/// Standard-normal directions rescaled to norm `eps`.
pub fn random<R: Rng + ?Sized>(idx: &BatchIndex, dim: usize, eps: f64, rng: &mut R) -> PerturbationSet {
    let mut set = PerturbationSet::zeros(idx, dim);
    for x in set.target.iter_mut().chain(set.context.iter_mut()) {
        *x = rng.sample(StandardNormal);
    }
    set.zero_count = normalize_rows(&mut set.target, dim, eps) + normalize_rows(&mut set.context, dim, eps);
    set
}

/// Nearest-neighbour direction sets for one embedding matrix: for node `t`,
/// up to `k` nodes closest to it and unit vectors pointing at them.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    k: usize,
    dim: usize,
    counts: Vec<usize>,
    neighbors: Vec<u32>,
    directions: Vec<f64>,
}

impl DirectionSet {
    /// Brute-force nearest neighbours by Euclidean distance over the rows of
    /// `rows` (`nodes x dim`). Candidates closer than 1e-12 are skipped.
    pub fn build(rows: &[f64], nodes: usize, dim: usize, k: usize) -> Self {
        let mut counts = vec![0usize; nodes];
        let mut neighbors = vec![0u32; nodes * k];
        let mut directions = vec![0.0; nodes * k * dim];
        let mut cand: Vec<(f64, u32)> = Vec::with_capacity(nodes);
        for t in 0..nodes {
            let ut = &rows[t * dim..(t + 1) * dim];
            cand.clear();
            for v in 0..nodes {
                if v == t {
                    continue;
                }
                let uv = &rows[v * dim..(v + 1) * dim];
                let d2: f64 = ut.iter().zip(uv).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2.sqrt() >= ZERO_GRADIENT {
                    cand.push((d2, v as u32));
                }
            }
            let take = k.min(cand.len());
            if take == 0 {
                continue;
            }
            if take < cand.len() {
                cand.select_nth_unstable_by(take - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            }
            cand[..take].sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            counts[t] = take;
            for (slot, &(_, v)) in cand[..take].iter().enumerate() {
                neighbors[t * k + slot] = v;
                let uv = &rows[v as usize * dim..(v as usize + 1) * dim];
                let dir = &mut directions[(t * k + slot) * dim..(t * k + slot + 1) * dim];
                for ((o, a), b) in dir.iter_mut().zip(uv).zip(ut) {
                    *o = a - b;
                }
                let n = norm(dir);
                dir.iter_mut().for_each(|x| *x /= n);
            }
        }
        Self {
            k,
            dim,
            counts,
            neighbors,
            directions,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self, t: usize) -> &[u32] {
        &self.neighbors[t * self.k..t * self.k + self.counts[t]]
    }

    pub fn direction(&self, t: usize, slot: usize) -> &[f64] {
        let start = (t * self.k + slot) * self.dim;
        &self.directions[start..start + self.dim]
    }

    /// Projects `grad` onto node `t`'s directions: `g_k = v_k . grad`.
    fn project(&self, t: usize, grad: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (slot, o) in out.iter_mut().enumerate().take(self.counts[t]) {
            *o = dot(self.direction(t, slot), grad);
        }
    }

    /// `sum_k w_k v_k` for node `t`.
    fn combine(&self, t: usize, weights: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (slot, &w) in weights.iter().enumerate().take(self.counts[t]) {
            axpy(w, self.direction(t, slot), out);
        }
    }
}

/// Direction sets for both embedding matrices, frozen once built.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborDirections {
    pub target: DirectionSet,
    pub context: DirectionSet,
}

impl NeighborDirections {
    pub fn build(model: &EmbeddingModel, k: usize) -> Self {
        let (n, d) = (model.nodes(), model.dim());
        Self {
            target: DirectionSet::build(model.target(), n, d, k),
            context: DirectionSet::build(model.context(), n, d, k),
        }
    }
}

/// Interpretable perturbations with the weight vectors that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpretable {
    pub set: PerturbationSet,
    /// `k` weights per target-side slot.
    pub target_weights: Vec<f64>,
    /// `k` weights per context-side slot.
    pub context_weights: Vec<f64>,
    pub k: usize,
}

/// Weight gradients `g = dL/dw` at `w = 0` for every batch slot, where the
/// loss is the (optionally scaled) perturbed loss and each node's
/// perturbation is `sum_k w_k v_k`. By the chain rule `g_k = v_k . dL/dn`.
pub fn weight_gradients(
    model: &EmbeddingModel,
    batch: &PairBatch,
    idx: &BatchIndex,
    dirs: &NeighborDirections,
    use_scale: bool,
) -> (Vec<f64>, Vec<f64>) {
    let d = model.dim();
    let k = dirs.target.k();
    let mut g = Gradients::zeros(idx, d);
    accumulate(model, batch, idx, None, use_scale, Some((&mut g, 1.0, GradTarget::Perturbations)));
    let mut tw = vec![0.0; idx.target_nodes.len() * k];
    for (slot, &t) in idx.target_nodes.iter().enumerate() {
        dirs.target
            .project(t as usize, g.target_row(slot), &mut tw[slot * k..(slot + 1) * k]);
    }
    let mut cw = vec![0.0; idx.context_nodes.len() * k];
    for (slot, &t) in idx.context_nodes.iter().enumerate() {
        dirs.context
            .project(t as usize, g.context_row(slot), &mut cw[slot * k..(slot + 1) * k]);
    }
    (tw, cw)
}

pub fn interpretable(
    model: &EmbeddingModel,
    batch: &PairBatch,
    idx: &BatchIndex,
    dirs: &NeighborDirections,
    use_scale: bool,
    eps: f64,
) -> Interpretable {
    let d = model.dim();
    let k = dirs.target.k();
    let (mut tw, mut cw) = weight_gradients(model, batch, idx, dirs, use_scale);
    let zero_count = normalize_rows(&mut tw, k, eps) + normalize_rows(&mut cw, k, eps);
    let mut set = PerturbationSet::zeros(idx, d);
    set.zero_count = zero_count;
    for (slot, &t) in idx.target_nodes.iter().enumerate() {
        dirs.target.combine(
            t as usize,
            &tw[slot * k..(slot + 1) * k],
            &mut set.target[slot * d..(slot + 1) * d],
        );
    }
    for (slot, &t) in idx.context_nodes.iter().enumerate() {
        dirs.context.combine(
            t as usize,
            &cw[slot * k..(slot + 1) * k],
            &mut set.context[slot * d..(slot + 1) * d],
        );
    }
    Interpretable {
        set,
        target_weights: tw,
        context_weights: cw,
        k,
    }
}
