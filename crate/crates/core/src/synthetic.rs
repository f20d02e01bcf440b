//! Degree-corrected planted-partition graphs with class labels, used as a
//! stand-in for citation benchmarks when the real files are unavailable.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::Labels;
use crate::seed::{sub_seed, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub class_sizes: Vec<usize>,
    /// Number of undirected edges.
    pub edges: usize,
    /// Probability that an edge joins two nodes of the same class.
    pub homophily: f64,
    /// Tail exponent of the Pareto-distributed node propensities.
    pub degree_exponent: f64,
    /// Cap on a node's propensity relative to the minimum.
    pub max_propensity: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// Cora's size, class balance, edge count and approximate edge homophily.
    pub fn cora_like(seed: u64) -> Self {
        Self {
            class_sizes: vec![818, 426, 418, 351, 298, 217, 180],
            edges: 5278,
            homophily: 0.81,
            degree_exponent: 2.6,
            max_propensity: 80.0,
            seed,
        }
    }

    pub fn nodes(&self) -> usize {
        self.class_sizes.iter().sum()
    }
}

/// Generates an undirected graph where every node has degree at least one,
/// plus its class labels. Node names are the decimal ids.
pub fn generate(cfg: &SyntheticConfig) -> Result<(Graph, Labels)> {
    let n = cfg.nodes();
    let classes = cfg.class_sizes.len();
    if classes < 2 || cfg.class_sizes.iter().any(|&s| s < 2) {
        return Err(Error::Config("need at least two classes of two nodes".into()));
    }
    if cfg.edges < n / 2 || cfg.edges > n * (n - 1) / 4 {
        return Err(Error::Config(format!("edge count {} unsuitable for {n} nodes", cfg.edges)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, Stream::Synthetic, 0));

    let mut class_of: Vec<u32> = cfg
        .class_sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat_n(c as u32, s))
        .collect();
    class_of.shuffle(&mut rng);

    let shape = cfg.degree_exponent - 1.0;
    let propensity: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            (1.0 - u).powf(-1.0 / shape).min(cfg.max_propensity)
        })
        .collect();
    let global = AliasTable::new(&propensity)?;
    let members: Vec<Vec<usize>> = (0..classes as u32)
        .map(|c| (0..n).filter(|&v| class_of[v] == c).collect())
        .collect();
    let per_class: Vec<AliasTable> = members
        .iter()
        .map(|m| AliasTable::new(&m.iter().map(|&v| propensity[v]).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;

    let partner = |u: usize, rng: &mut ChaCha8Rng| -> usize {
        let c = class_of[u] as usize;
        if rng.random::<f64>() < cfg.homophily {
            members[c][per_class[c].sample(rng)]
        } else {
            loop {
                let v = global.sample(rng);
                if class_of[v] as usize != c {
                    return v;
                }
            }
        }
    };

    let mut acc = EdgeSet::new(n, cfg.edges);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for &u in &order {
        while acc.degree[u] == 0 {
            let v = partner(u, &mut rng);
            acc.add(u, v);
        }
    }
    while acc.ordered.len() < cfg.edges {
        let u = global.sample(&mut rng);
        let v = partner(u, &mut rng);
        acc.add(u, v);
    }
    let ordered = acc.ordered;

    let names: Vec<String> = (0..n).map(|v| v.to_string()).collect();
    let graph = Graph::from_edges(
        &names,
        ordered.iter().map(|&(u, v)| (u as u32, v as u32, 1.0)),
        false,
    )?;
    debug_assert_eq!(graph.node_count(), n);
    let class_names = (0..classes).map(|c| format!("class{c}")).collect();
    let labels = Labels::from_assignments(class_names, class_of.into_iter().map(Some).collect());
    Ok((graph, labels))
}

struct EdgeSet {
    seen: HashSet<(usize, usize)>,
    ordered: Vec<(usize, usize)>,
    degree: Vec<usize>,
}

impl EdgeSet {
    fn new(n: usize, edges: usize) -> Self {
        Self {
            seen: HashSet::with_capacity(edges),
            ordered: Vec::with_capacity(edges),
            degree: vec![0; n],
        }
    }

    fn add(&mut self, u: usize, v: usize) {
        if u == v {
            return;
        }
        let key = (u.min(v), u.max(v));
        if self.seen.insert(key) {
            self.ordered.push(key);
            self.degree[u] += 1;
            self.degree[v] += 1;
        }
    }
}
