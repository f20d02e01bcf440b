//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use advwalk::loss::{accumulate, batch_loss, BatchIndex, GradTarget, Gradients, PerturbationSet};
use advwalk::perturb::NeighborDirections;
use advwalk::{EmbeddingModel, Graph, PairBatch};
use rand::Rng;

pub const FD_STEP: f64 = 1e-4;

/// Small random model and batch, with random pair scales in [0, 1] and
/// context rows that are not all zero.
pub fn random_instance<R: Rng>(rng: &mut R, max_nodes: usize, max_dim: usize) -> (EmbeddingModel, PairBatch) {
    let n = rng.random_range(2..=max_nodes);
    let d = rng.random_range(1..=max_dim);
    let target: Vec<f64> = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let context: Vec<f64> = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let model = EmbeddingModel::from_matrices(n, d, target, context).unwrap();
    let pairs = rng.random_range(1..=12);
    let k = rng.random_range(0..=4);
    let mut batch = PairBatch {
        targets: Vec::new(),
        contexts: Vec::new(),
        negatives: Vec::new(),
        scale: Vec::new(),
        k,
    };
    for _ in 0..pairs {
        batch.targets.push(rng.random_range(0..n) as u32);
        batch.contexts.push(rng.random_range(0..n) as u32);
        batch.scale.push(rng.random());
        for _ in 0..k {
            batch.negatives.push(rng.random_range(0..n) as u32);
        }
    }
    (model, batch)
}

pub fn random_perturbation<R: Rng>(rng: &mut R, idx: &BatchIndex, dim: usize) -> PerturbationSet {
    let mut set = PerturbationSet::zeros(idx, dim);
    for x in set.target.iter_mut().chain(set.context.iter_mut()) {
        *x = rng.random_range(-0.5..0.5);
    }
    set
}

/// `|a - b| / max(|b|, tiny)` over whole vectors.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    if scale < 1e-10 {
        diff
    } else {
        diff / scale
    }
}

/// Relative error of the analytic parameter gradient of the (optionally
/// perturbed) batch loss against central differences on every model entry
/// that the batch touches.
pub fn parameter_gradient_error(
    model: &EmbeddingModel,
    batch: &PairBatch,
    perturb: Option<&PerturbationSet>,
    use_scale: bool,
) -> f64 {
    let idx = BatchIndex::new(batch, model.nodes());
    let d = model.dim();
    let mut g = Gradients::zeros(&idx, d);
    accumulate(model, batch, &idx, perturb, use_scale, Some((&mut g, 1.0, GradTarget::Parameters)));

    let mut analytic = Vec::new();
    let mut numeric = Vec::new();
    for (slot, &v) in idx.target_nodes.iter().enumerate() {
        for c in 0..d {
            analytic.push(g.target_row(slot)[c]);
            numeric.push(central(|h| {
                let mut m = model.clone();
                m.target_row_mut(v as usize)[c] += h;
                batch_loss(&m, batch, &idx, perturb, use_scale)
            }));
        }
    }
    for (slot, &v) in idx.context_nodes.iter().enumerate() {
        for c in 0..d {
            analytic.push(g.context_row(slot)[c]);
            numeric.push(central(|h| {
                let mut m = model.clone();
                m.context_row_mut(v as usize)[c] += h;
                batch_loss(&m, batch, &idx, perturb, use_scale)
            }));
        }
    }
    relative_error(&analytic, &numeric)
}

/// Same check with respect to the perturbation rows, which is where the
/// pair scale enters the positive term.
pub fn perturbation_gradient_error(
    model: &EmbeddingModel,
    batch: &PairBatch,
    perturb: &PerturbationSet,
    use_scale: bool,
) -> f64 {
    let idx = BatchIndex::new(batch, model.nodes());
    let d = model.dim();
    let mut g = Gradients::zeros(&idx, d);
    accumulate(model, batch, &idx, Some(perturb), use_scale, Some((&mut g, 1.0, GradTarget::Perturbations)));
    let mut analytic = g.target.clone();
    analytic.extend_from_slice(&g.context);
    let mut numeric = Vec::with_capacity(analytic.len());
    for i in 0..perturb.target.len() {
        numeric.push(central(|h| {
            let mut p = perturb.clone();
            p.target[i] += h;
            batch_loss(model, batch, &idx, Some(&p), use_scale)
        }));
    }
    for i in 0..perturb.context.len() {
        numeric.push(central(|h| {
            let mut p = perturb.clone();
            p.context[i] += h;
            batch_loss(model, batch, &idx, Some(&p), use_scale)
        }));
    }
    relative_error(&analytic, &numeric)
}

/// Builds the perturbation `sum_k w_k v_k` per batch slot from raw weights.
pub fn combine(dirs: &NeighborDirections, idx: &BatchIndex, dim: usize, tw: &[f64], cw: &[f64]) -> PerturbationSet {
    let k = dirs.target.k();
    let mut set = PerturbationSet::zeros(idx, dim);
    for (slot, &t) in idx.target_nodes.iter().enumerate() {
        for s in 0..dirs.target.neighbors(t as usize).len() {
            let w = tw[slot * k + s];
            for (o, v) in set.target[slot * dim..(slot + 1) * dim].iter_mut().zip(dirs.target.direction(t as usize, s)) {
                *o += w * v;
            }
        }
    }
    for (slot, &t) in idx.context_nodes.iter().enumerate() {
        for s in 0..dirs.context.neighbors(t as usize).len() {
            let w = cw[slot * k + s];
            for (o, v) in set.context[slot * dim..(slot + 1) * dim].iter_mut().zip(dirs.context.direction(t as usize, s)) {
                *o += w * v;
            }
        }
    }
    set
}

/// Central differences of the perturbed loss in the direction weights at
/// `w = 0`, compared with the chain-rule weight gradients.
pub fn weight_gradient_error(model: &EmbeddingModel, batch: &PairBatch, dirs: &NeighborDirections, use_scale: bool) -> f64 {
    let idx = BatchIndex::new(batch, model.nodes());
    let d = model.dim();
    let (tw, cw) = advwalk::perturb::weight_gradients(model, batch, &idx, dirs, use_scale);
    let mut analytic = tw.clone();
    analytic.extend_from_slice(&cw);
    let zt = vec![0.0; tw.len()];
    let zc = vec![0.0; cw.len()];
    let mut numeric = Vec::with_capacity(analytic.len());
    for i in 0..tw.len() {
        numeric.push(central(|h| {
            let mut w = zt.clone();
            w[i] = h;
            batch_loss(model, batch, &idx, Some(&combine(dirs, &idx, d, &w, &zc)), use_scale)
        }));
    }
    for i in 0..cw.len() {
        numeric.push(central(|h| {
            let mut w = zc.clone();
            w[i] = h;
            batch_loss(model, batch, &idx, Some(&combine(dirs, &idx, d, &zt, &w)), use_scale)
        }));
    }
    relative_error(&analytic, &numeric)
}

fn central(f: impl Fn(f64) -> f64) -> f64 {
    (f(FD_STEP) - f(-FD_STEP)) / (2.0 * FD_STEP)
}

/// Erdos-Renyi graph over `n` nodes, guaranteed to keep them all by
/// chaining consecutive nodes.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64, weighted: bool) -> Graph {
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        if u + 1 < n {
            edges.push((u as u32, (u + 1) as u32, weight(rng, weighted)));
        }
        for v in u + 2..n {
            if rng.random::<f64>() < p {
                edges.push((u as u32, v as u32, weight(rng, weighted)));
            }
        }
    }
    Graph::from_edges(&names, edges, false).unwrap()
}

fn weight<R: Rng>(rng: &mut R, weighted: bool) -> f64 {
    if weighted {
        rng.random_range(0.1..3.0)
    } else {
        1.0
    }
}

/// Shifted PPMI by dense matrix powers, straight from the definition.
pub fn dense_ppmi(graph: &Graph, order: usize, shift: f64) -> Vec<Vec<f64>> {
    let n = graph.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for u in 0..n {
        let total: f64 = graph.neighbor_weights(u).iter().sum();
        for (&v, &w) in graph.neighbors(u).iter().zip(graph.neighbor_weights(u)) {
            a[u][v as usize] += w / total;
        }
    }
    let mut power = a.clone();
    let mut sum = a.clone();
    for _ in 1..order {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                if power[i][k] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    next[i][j] += power[i][k] * a[k][j];
                }
            }
        }
        power = next;
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += power[i][j];
            }
        }
    }
    let col: Vec<f64> = (0..n).map(|j| (0..n).map(|i| sum[i][j]).sum()).collect();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if sum[i][j] > 0.0 {
                m[i][j] = ((sum[i][j] / col[j]).ln() - shift.ln()).max(0.0);
            }
        }
    }
    m
}
