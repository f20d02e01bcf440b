//! Mini-batch SGD over per-epoch random-walk corpora, optionally regularized
//! by the loss at perturbed embeddings.
//!
//! Each epoch draws a fresh corpus. Every batch optionally builds a
//! perturbation set, then takes one SGD step on
//! `clean_loss + lambda * perturbed_loss` with the perturbations held fixed.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::loss::{accumulate, BatchIndex, GradTarget, Gradients, PerturbationSet};
use crate::model::EmbeddingModel;
use crate::perturb::{self, NeighborDirections};
use crate::proximity::ScaleMatrix;
use crate::seed::{sub_seed, Stream};
use crate::walker::{attach_negatives, epoch_pairs, WalkConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Plain negative-sampling DeepWalk.
    Dwns,
    /// Gaussian perturbations in the regularizer.
    Rand,
    /// Fast-gradient adversarial perturbations.
    AdvT,
    /// Adversarial perturbations restricted to nearest-neighbour directions.
    IAdvT,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dwns => "dwns",
            Method::Rand => "rand",
            Method::AdvT => "advt",
            Method::IAdvT => "iadvt",
        }
    }

    pub fn perturbs(self) -> bool {
        self != Method::Dwns
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dwns" => Ok(Method::Dwns),
            "rand" | "dwns_rand" => Ok(Method::Rand),
            "advt" | "dwns_advt" => Ok(Method::AdvT),
            "iadvt" | "dwns_iadvt" => Ok(Method::IAdvT),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub method: Method,
    pub dim: usize,
    /// Total epochs, pretraining included.
    pub epochs: usize,
    /// Leading epochs of plain DeepWalk before the method's regularizer starts.
    pub pretrain_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub eps: f64,
    pub lambda: f64,
    /// Nearest-neighbour set size for the interpretable method.
    pub neighbors: usize,
    /// Apply the connectivity-based scale to positive-pair perturbations.
    pub use_scale: bool,
    /// Order of the transition-power sum behind the scale.
    pub proximity_order: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: Method::Dwns,
            dim: 128,
            epochs: 100,
            pretrain_epochs: 10,
            batch_size: 1024,
            learning_rate: 0.001,
            eps: 0.9,
            lambda: 1.0,
            neighbors: 5,
            use_scale: true,
            proximity_order: 2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.dim < 1 {
            return bad("dim must be >= 1");
        }
        if self.batch_size < 1 {
            return bad("batch_size must be >= 1");
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate must be positive");
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return bad("eps must be >= 0");
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be >= 0");
        }
        if self.method == Method::IAdvT && self.neighbors < 1 {
            return bad("neighbors must be >= 1 for iadvt");
        }
        if self.proximity_order < 1 {
            return bad("proximity_order must be >= 1");
        }
        Ok(())
    }
}

/// Totals for one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// 1-based epoch number.
    pub epoch: usize,
    pub method: Method,
    pub pairs: usize,
    pub clean_loss: f64,
    /// Unweighted regularizer loss; zero when the epoch has no regularizer.
    pub reg_loss: f64,
    pub zero_grad_count: usize,
}

/// Resumable training state.
#[derive(Debug, Clone)]
pub struct Trainer<'g> {
    graph: &'g Graph,
    walk: WalkConfig,
    cfg: TrainConfig,
    model: EmbeddingModel,
    noise: AliasTable,
    scale: Option<ScaleMatrix>,
    directions: Option<NeighborDirections>,
    epoch: usize,
    lookup: Vec<u32>,
}

impl<'g> Trainer<'g> {
    pub fn new(graph: &'g Graph, walk: WalkConfig, cfg: TrainConfig) -> Result<Self> {
        walk.validate()?;
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, Stream::Init, 0));
        let model = EmbeddingModel::init(graph.node_count(), cfg.dim, &mut rng)?;
        Ok(Self {
            graph,
            walk,
            cfg,
            model,
            noise: graph.negative_distribution(),
            scale: None,
            directions: None,
            epoch: 0,
            lookup: vec![u32::MAX; graph.node_count()],
        })
    }

    /// Continues from the current state under a different configuration.
    /// The epoch counter and parameters carry over.
    pub fn fork(&self, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let mut next = self.clone();
        if cfg.method != self.cfg.method || cfg.neighbors != self.cfg.neighbors {
            next.directions = None;
        }
        if cfg.proximity_order != self.cfg.proximity_order {
            next.scale = None;
        }
        next.cfg = cfg;
        Ok(next)
    }

    pub fn model(&self) -> &EmbeddingModel {
        &self.model
    }

    pub fn into_model(self) -> EmbeddingModel {
        self.model
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    pub fn is_done(&self) -> bool {
        self.epoch >= self.cfg.epochs
    }

    pub fn scale(&self) -> Option<&ScaleMatrix> {
        self.scale.as_ref()
    }

    pub fn directions(&self) -> Option<&NeighborDirections> {
        self.directions.as_ref()
    }

    /// Method in effect for the next epoch.
    pub fn current_method(&self) -> Method {
        if self.epoch < self.cfg.pretrain_epochs {
            Method::Dwns
        } else {
            self.cfg.method
        }
    }

    fn prepare(&mut self, method: Method) -> Result<()> {
        let needs_scale = method.perturbs() && self.cfg.use_scale;
        if needs_scale && self.scale.is_none() {
            self.scale = Some(ScaleMatrix::for_graph(self.graph, self.cfg.proximity_order)?);
        }
        if method == Method::IAdvT && self.directions.is_none() {
            self.directions = Some(NeighborDirections::build(&self.model, self.cfg.neighbors));
        }
        Ok(())
    }

    /// Runs one epoch and returns its totals.
    pub fn run_epoch(&mut self) -> Result<EpochStats> {
        let method = self.current_method();
        self.prepare(method)?;
        let epoch = self.epoch;
        let mut corpus_rng = ChaCha8Rng::seed_from_u64(sub_seed(self.cfg.seed, Stream::Corpus, epoch as u64));
        let mut noise_rng = ChaCha8Rng::seed_from_u64(sub_seed(self.cfg.seed, Stream::Perturbation, epoch as u64));

        let pairs = epoch_pairs(self.graph, &self.walk, &mut corpus_rng);
        let mut stats = EpochStats {
            epoch: epoch + 1,
            method,
            pairs: pairs.len(),
            clean_loss: 0.0,
            reg_loss: 0.0,
            zero_grad_count: 0,
        };
        let d = self.cfg.dim;
        let (eps, lambda, lr) = (self.cfg.eps, self.cfg.lambda, self.cfg.learning_rate);
        let use_scale = self.cfg.use_scale && self.scale.is_some();

        for (b, chunk) in pairs.chunks(self.cfg.batch_size).enumerate() {
            let mut batch = attach_negatives(chunk, &self.noise, self.walk.negatives, &mut corpus_rng);
            if use_scale && method.perturbs() {
                if let Some(scale) = &self.scale {
                    batch.scale = scale.scale_pairs(&batch.targets, &batch.contexts);
                }
            }
            let idx = BatchIndex::with_lookup(&batch, &mut self.lookup);

            let perturbation: Option<PerturbationSet> = match method {
                Method::Dwns => None,
                Method::Rand => Some(perturb::random(&idx, d, eps, &mut noise_rng)),
                Method::AdvT => Some(perturb::fast_gradient(&self.model, &batch, &idx, eps)),
                Method::IAdvT => {
                    let dirs = self.directions.as_ref().expect("prepared above");
                    Some(perturb::interpretable(&self.model, &batch, &idx, dirs, use_scale, eps).set)
                }
            };

            let mut grads = Gradients::zeros(&idx, d);
            stats.clean_loss += accumulate(
                &self.model,
                &batch,
                &idx,
                None,
                false,
                Some((&mut grads, 1.0, GradTarget::Parameters)),
            );
            if let Some(n) = &perturbation {
                stats.zero_grad_count += n.zero_count;
                if lambda > 0.0 {
                    stats.reg_loss += accumulate(
                        &self.model,
                        &batch,
                        &idx,
                        Some(n),
                        use_scale,
                        Some((&mut grads, lambda, GradTarget::Parameters)),
                    );
                }
            }

            let mut finite = true;
            for (slot, &v) in idx.target_nodes.iter().enumerate() {
                let row = self.model.target_row_mut(v as usize);
                for (x, g) in row.iter_mut().zip(grads.target_row(slot)) {
                    *x -= lr * g;
                    finite &= x.is_finite();
                }
            }
            for (slot, &v) in idx.context_nodes.iter().enumerate() {
                let row = self.model.context_row_mut(v as usize);
                for (x, g) in row.iter_mut().zip(grads.context_row(slot)) {
                    *x -= lr * g;
                    finite &= x.is_finite();
                }
            }
            if !finite {
                return Err(Error::NonFinite { epoch: epoch + 1, batch: b + 1 });
            }
        }

        self.epoch += 1;
        Ok(stats)
    }

    /// Runs the remaining epochs, handing each epoch's totals to `on_epoch`.
    pub fn run(&mut self, mut on_epoch: impl FnMut(&EpochStats, &EmbeddingModel)) -> Result<()> {
        while !self.is_done() {
            let stats = self.run_epoch()?;
            on_epoch(&stats, &self.model);
        }
        Ok(())
    }
}

/// Trains from scratch and returns the final model with per-epoch totals.
pub fn train(graph: &Graph, walk: WalkConfig, cfg: TrainConfig) -> Result<(EmbeddingModel, Vec<EpochStats>)> {
    let mut trainer = Trainer::new(graph, walk, cfg)?;
    let mut log = Vec::with_capacity(cfg.epochs);
    trainer.run(|s, _| log.push(*s))?;
    Ok((trainer.into_model(), log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LoadOptions;
    use std::path::Path;

    fn ring(n: usize) -> Graph {
        let text: String = (0..n).map(|i| format!("{i} {}\n{i} {}\n", (i + 1) % n, (i + 3) % n)).collect();
        Graph::parse_edge_list(&text, Path::new("ring"), LoadOptions::default()).unwrap()
    }

    fn small(method: Method) -> (WalkConfig, TrainConfig) {
        let walk = WalkConfig { walk_length: 10, window: 3, negatives: 3, ..Default::default() };
        let cfg = TrainConfig {
            method,
            dim: 8,
            epochs: 4,
            pretrain_epochs: 1,
            batch_size: 64,
            learning_rate: 0.05,
            eps: 0.5,
            seed: 3,
            ..Default::default()
        };
        (walk, cfg)
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Dwns, Method::Rand, Method::AdvT, Method::IAdvT] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("svm".parse::<Method>().is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let g = ring(30);
        for method in [Method::Dwns, Method::Rand, Method::AdvT, Method::IAdvT] {
            let (walk, cfg) = small(method);
            let (a, la) = train(&g, walk, cfg).unwrap();
            let (b, lb) = train(&g, walk, cfg).unwrap();
            assert_eq!(a, b, "{method}");
            assert_eq!(la, lb);
            let (c, _) = train(&g, walk, TrainConfig { seed: 4, ..cfg }).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn pretraining_epochs_are_plain() {
        let g = ring(20);
        let (walk, cfg) = small(Method::AdvT);
        let (_, log) = train(&g, walk, cfg).unwrap();
        assert_eq!(log[0].method, Method::Dwns);
        assert_eq!(log[0].reg_loss, 0.0);
        assert!(log[1..].iter().all(|s| s.method == Method::AdvT && s.reg_loss > 0.0));
    }

    #[test]
    fn zero_eps_regularizer_doubles_clean_loss() {
        let g = ring(20);
        let (walk, cfg) = small(Method::AdvT);
        let (_, log) = train(&g, walk, TrainConfig { eps: 0.0, ..cfg }).unwrap();
        for s in &log[1..] {
            assert_eq!(s.reg_loss.to_bits(), s.clean_loss.to_bits());
        }
    }

    #[test]
    fn divergence_is_reported() {
        let g = ring(20);
        let (walk, cfg) = small(Method::Dwns);
        let err = train(&g, walk, TrainConfig { learning_rate: 1e300, ..cfg }).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "{err}");
    }

    #[test]
    fn invalid_config() {
        let (_, cfg) = small(Method::IAdvT);
        assert!(TrainConfig { neighbors: 0, ..cfg }.validate().is_err());
        assert!(TrainConfig { eps: -1.0, ..cfg }.validate().is_err());
        assert!(TrainConfig { lambda: f64::NAN, ..cfg }.validate().is_err());
    }
}
