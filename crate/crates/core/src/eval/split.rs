use std::collections::HashSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::Labels;
use crate::seed::{sub_seed, Stream};

/// Edge hold-out for link prediction over an undirected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSplit {
    pub nodes: usize,
    pub keep_ratio: f64,
    pub seed: u64,
    /// Observed edges, `u < v`.
    pub train_edges: Vec<(u32, u32)>,
    /// Hidden edges, `u < v`.
    pub test_edges: Vec<(u32, u32)>,
    /// Non-adjacent pairs, twice as many as `test_edges`.
    pub test_negatives: Vec<(u32, u32)>,
}

fn key(u: u32, v: u32) -> (u32, u32) {
    (u.min(v), u.max(v))
}

/// Hides `1 - keep_ratio` of the edges without leaving any node isolated,
/// and samples twice as many non-edges as test negatives.
pub fn split_link_prediction(graph: &Graph, keep_ratio: f64, seed: u64) -> Result<LinkSplit> {
    if graph.is_directed() {
        return Err(Error::Config("link-prediction splits need an undirected graph".into()));
    }
    if !(keep_ratio > 0.0 && keep_ratio <= 1.0) {
        return Err(Error::Config(format!("keep ratio {keep_ratio} outside (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, Stream::Split, 0));
    let n = graph.node_count();
    let mut edges: Vec<(u32, u32)> = graph
        .edges()
        .into_iter()
        .map(|(u, v, _)| (u as u32, v as u32))
        .collect();
    let total = edges.len();
    let hide = ((1.0 - keep_ratio) * total as f64).round() as usize;

    edges.shuffle(&mut rng);
    let mut degree: Vec<usize> = (0..n).map(|v| graph.out_degree(v)).collect();
    let mut train = Vec::with_capacity(total - hide);
    let mut test = Vec::with_capacity(hide);
    // Degrees only fall, so an edge rejected once can never become removable:
    // one pass decides feasibility.
    for (u, v) in edges {
        if test.len() < hide && degree[u as usize] > 1 && degree[v as usize] > 1 {
            degree[u as usize] -= 1;
            degree[v as usize] -= 1;
            test.push((u, v));
        } else {
            train.push((u, v));
        }
    }
    if test.len() < hide {
        return Err(Error::SplitInfeasible(format!(
            "could hide only {} of {hide} edges without isolating a node",
            test.len()
        )));
    }

    let wanted = 2 * test.len();
    let max_pairs = n * (n - 1) / 2;
    if wanted > max_pairs.saturating_sub(total) {
        return Err(Error::SplitInfeasible("not enough non-adjacent pairs for negatives".into()));
    }
    let mut taken = HashSet::with_capacity(wanted);
    let mut negatives = Vec::with_capacity(wanted);
    while negatives.len() < wanted {
        let u = rng.random_range(0..n) as u32;
        let v = rng.random_range(0..n) as u32;
        if u == v || graph.has_edge(u as usize, v as usize) {
            continue;
        }
        if taken.insert(key(u, v)) {
            negatives.push(key(u, v));
        }
    }

    Ok(LinkSplit {
        nodes: n,
        keep_ratio,
        seed,
        train_edges: train,
        test_edges: test,
        test_negatives: negatives,
    })
}

impl LinkSplit {
    /// The graph of observed edges, over the same node ids and names.
    pub fn residual_graph(&self, graph: &Graph) -> Result<Graph> {
        let residual = Graph::from_edges(
            graph.names(),
            self.train_edges
                .iter()
                .map(|&(u, v)| (u, v, graph.weight(u as usize, v as usize))),
            false,
        )?;
        if residual.node_count() != graph.node_count() {
            return Err(Error::SplitInfeasible("residual graph lost nodes".into()));
        }
        Ok(residual)
    }

    /// Non-adjacent pairs (in the full graph), distinct from the test
    /// negatives, one per training edge.
    pub fn train_negatives(&self, seed: u64) -> Vec<(u32, u32)> {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, Stream::Split, 1));
        let mut blocked: HashSet<(u32, u32)> = self
            .train_edges
            .iter()
            .chain(&self.test_edges)
            .chain(&self.test_negatives)
            .copied()
            .collect();
        let n = self.nodes;
        let wanted = self.train_edges.len();
        let mut out = Vec::with_capacity(wanted);
        let available = (n * (n - 1) / 2).saturating_sub(blocked.len());
        while out.len() < wanted.min(available) {
            let u = rng.random_range(0..n) as u32;
            let v = rng.random_range(0..n) as u32;
            if u != v && blocked.insert(key(u, v)) {
                out.push(key(u, v));
            }
        }
        out
    }

    /// Writes the observed edges as an edge list and the test set as
    /// `src  dst  label` with label 1 for hidden edges and 0 for negatives.
    pub fn write(&self, graph: &Graph, train_path: impl AsRef<Path>, test_path: impl AsRef<Path>) -> Result<()> {
        self.residual_graph(graph)?.write_edge_list(train_path)?;
        let path = test_path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let rows = self
            .test_edges
            .iter()
            .map(|e| (e, 1))
            .chain(self.test_negatives.iter().map(|e| (e, 0)));
        for (&(u, v), label) in rows {
            writeln!(out, "{}\t{}\t{label}", graph.name(u as usize), graph.name(v as usize))
                .map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Rebuilds a split from the files written by [`LinkSplit::write`]; node
    /// ids follow `graph`, which must be the residual graph.
    pub fn read_test(graph: &Graph, test_path: impl AsRef<Path>) -> Result<Self> {
        let path = test_path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let index = graph.name_index();
        let mut test_edges = Vec::new();
        let mut test_negatives = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg,
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(parse_err("expected `src dst label`".into()));
            }
            let id = |name: &str| {
                index
                    .get(name)
                    .map(|&v| v as u32)
                    .ok_or_else(|| parse_err(format!("unknown node {name:?}")))
            };
            let pair = key(id(f[0])?, id(f[1])?);
            match f[2] {
                "1" => test_edges.push(pair),
                "0" => test_negatives.push(pair),
                other => return Err(parse_err(format!("bad label {other:?}"))),
            }
        }
        let train_edges = graph
            .edges()
            .into_iter()
            .map(|(u, v, _)| (u as u32, v as u32))
            .collect::<Vec<_>>();
        let total = train_edges.len() + test_edges.len();
        Ok(Self {
            nodes: graph.node_count(),
            keep_ratio: train_edges.len() as f64 / total.max(1) as f64,
            seed: 0,
            train_edges,
            test_edges,
            test_negatives,
        })
    }
}

/// Stratified train/test partition of the labelled nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSplit {
    pub train: Vec<(usize, u32)>,
    pub test: Vec<(usize, u32)>,
}

/// Per class, `round(ratio * size)` nodes go to training, clamped so every
/// class keeps at least one training and one test node.
pub fn split_classification(labels: &Labels, train_ratio: f64, seed: u64) -> Result<ClassSplit> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::Config(format!("training ratio {train_ratio} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, Stream::Split, 2));
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); labels.class_count()];
    for (v, c) in labels.labelled() {
        by_class[c as usize].push(v);
    }
    let mut split = ClassSplit {
        train: Vec::new(),
        test: Vec::new(),
    };
    for (c, mut members) in by_class.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let size = members.len();
        let take = if size >= 2 {
            ((train_ratio * size as f64).round() as usize).clamp(1, size - 1)
        } else {
            1
        };
        for (i, v) in members.into_iter().enumerate() {
            let item = (v, c as u32);
            if i < take {
                split.train.push(item);
            } else {
                split.test.push(item);
            }
        }
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}
