//! Weighted graph storage in compressed sparse row form, edge-list parsing,
//! and the preprocessing rules (self-loops and dangling nodes removed).

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;

use crate::alias::AliasTable;
use crate::error::{Error, Result};

/// Exponent applied to out-degrees for the negative-sampling noise distribution.
pub const NOISE_EXPONENT: f64 = 0.75;

/// Options controlling how an edge list is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOptions {
    pub directed: bool,
    /// When false, any third column is ignored and every edge has weight 1.
    pub weighted: bool,
}

/// A preprocessed graph. Node ids are dense `0..N` in first-appearance order.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    names: Vec<String>,
    directed: bool,
    neighbor_tables: Vec<AliasTable>,
}

/// Accumulates named edges and applies preprocessing on `build`.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: HashMap<String, u32>,
    edges: Vec<(u32, u32, f64)>,
    directed: bool,
    sum_duplicates: bool,
}

impl GraphBuilder {
    /// `sum_duplicates` merges repeated edges by adding their weights;
    /// otherwise repeats collapse to a single edge keeping the largest weight.
    pub fn new(directed: bool, sum_duplicates: bool) -> Self {
        Self {
            directed,
            sum_duplicates,
            ..Default::default()
        }
    }

    /// Interns a node name, assigning the next id on first sight.
    pub fn node(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn edge(&mut self, src: &str, dst: &str, weight: f64) {
        let s = self.node(src);
        let d = self.node(dst);
        self.edge_ids(s, d, weight);
    }

    pub fn edge_ids(&mut self, src: u32, dst: u32, weight: f64) {
        if src == dst || weight <= 0.0 {
            return;
        }
        let (s, d) = if self.directed || src < dst {
            (src, dst)
        } else {
            (dst, src)
        };
        self.edges.push((s, d, weight));
    }

    pub fn build(mut self) -> Result<Graph> {
        self.edges
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(self.edges.len());
        for (s, d, w) in self.edges {
            match merged.last_mut() {
                Some(last) if last.0 == s && last.1 == d => {
                    if self.sum_duplicates {
                        last.2 += w;
                    } else {
                        last.2 = last.2.max(w);
                    }
                }
                _ => merged.push((s, d, w)),
            }
        }

        let n = self.names.len();
        let mut arcs: Vec<(u32, u32, f64)> = Vec::with_capacity(merged.len() * 2);
        for &(s, d, w) in &merged {
            arcs.push((s, d, w));
            if !self.directed {
                arcs.push((d, s, w));
            }
        }

        // Drop nodes without out-arcs until none remain; in directed graphs a
        // removal can strand a predecessor.
        let mut alive = vec![true; n];
        loop {
            let mut out_deg = vec![0usize; n];
            for &(s, d, _) in &arcs {
                if alive[s as usize] && alive[d as usize] {
                    out_deg[s as usize] += 1;
                }
            }
            let mut changed = false;
            for v in 0..n {
                if alive[v] && out_deg[v] == 0 {
                    alive[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            arcs.retain(|&(s, d, _)| alive[s as usize] && alive[d as usize]);
        }

        let mut remap = vec![u32::MAX; n];
        let mut names = Vec::new();
        for (old, name) in self.names.into_iter().enumerate() {
            if alive[old] {
                remap[old] = names.len() as u32;
                names.push(name);
            }
        }
        if names.is_empty() {
            return Err(Error::EmptyGraph);
        }

        for arc in &mut arcs {
            arc.0 = remap[arc.0 as usize];
            arc.1 = remap[arc.1 as usize];
        }
        arcs.sort_unstable_by_key(|a| (a.0, a.1));

        let nodes = names.len();
        let mut offsets = vec![0usize; nodes + 1];
        for &(s, _, _) in &arcs {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..nodes {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<u32> = arcs.iter().map(|a| a.1).collect();
        let weights: Vec<f64> = arcs.iter().map(|a| a.2).collect();
        let neighbor_tables = (0..nodes)
            .map(|v| AliasTable::new(&weights[offsets[v]..offsets[v + 1]]))
            .collect::<Result<Vec<_>>>()?;

        Ok(Graph {
            offsets,
            targets,
            weights,
            names,
            directed: self.directed,
            neighbor_tables,
        })
    }
}

impl Graph {
    /// Builds a graph over an explicit node list. Ids follow `names` order,
    /// restricted to nodes that survive preprocessing.
    pub fn from_edges(
        names: &[String],
        edges: impl IntoIterator<Item = (u32, u32, f64)>,
        directed: bool,
    ) -> Result<Self> {
        let mut builder = GraphBuilder::new(directed, true);
        for name in names {
            builder.node(name);
        }
        for (s, d, w) in edges {
            builder.edge_ids(s, d, w);
        }
        builder.build()
    }

    pub fn load_edge_list(path: impl AsRef<Path>, options: LoadOptions) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_edge_list(&text, path, options)
    }

    /// Parses edge-list text. `origin` is only used in error messages.
    pub fn parse_edge_list(text: &str, origin: &Path, options: LoadOptions) -> Result<Self> {
        let mut builder = GraphBuilder::new(options.directed, options.weighted);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_err = |msg: String| Error::Parse {
                path: origin.to_path_buf(),
                line: lineno + 1,
                msg,
            };
            let weight = match fields.len() {
                2 => 1.0,
                3 if !options.weighted => 1.0,
                3 => {
                    let w: f64 = fields[2]
                        .parse()
                        .map_err(|_| parse_err(format!("bad weight {:?}", fields[2])))?;
                    if !w.is_finite() {
                        return Err(parse_err(format!("non-finite weight {w}")));
                    }
                    if w < 0.0 {
                        return Err(Error::NegativeWeight {
                            path: origin.to_path_buf(),
                            line: lineno + 1,
                            weight: w,
                        });
                    }
                    w
                }
                k => return Err(parse_err(format!("expected 2 or 3 fields, found {k}"))),
            };
            builder.edge(fields[0], fields[1], weight);
        }
        builder.build()
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    /// Number of stored arcs; an undirected edge counts twice.
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    /// Number of edges as given in the input: arcs for directed graphs,
    /// unordered pairs for undirected ones.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.arc_count()
        } else {
            self.arc_count() / 2
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn neighbor_weights(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Arc weight `A_uv`, zero when absent.
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        let nbrs = self.neighbors(u);
        match nbrs.binary_search(&(v as u32)) {
            Ok(pos) => self.weights[self.offsets[u] + pos],
            Err(_) => 0.0,
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Draws a successor of `v` with probability proportional to arc weight.
    #[inline]
    pub fn sample_neighbor<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> usize {
        let slot = self.neighbor_tables[v].sample(rng);
        self.targets[self.offsets[v] + slot] as usize
    }

    /// Iterates `(src, dst, weight)` over all arcs.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .zip(self.neighbor_weights(u))
                .map(move |(&v, &w)| (u, v as usize, w))
        })
    }

    /// Undirected edges as `(u, v, w)` with `u < v`; for directed graphs, every arc.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.arcs()
            .filter(|&(u, v, _)| self.directed || u < v)
            .collect()
    }

    /// Writes the graph as a canonical edge list. Lines are ordered by node
    /// name so the output does not depend on id assignment, which makes
    /// re-preprocessing the output a no-op.
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut lines: Vec<(&str, &str, f64)> = self
            .arcs()
            .filter_map(|(u, v, w)| {
                let (a, b) = (self.name(u), self.name(v));
                if self.directed || a < b {
                    Some((a, b, w))
                } else {
                    None
                }
            })
            .collect();
        lines.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for (a, b, w) in lines {
            writeln!(out, "{a}\t{b}\t{w}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Writes `id<TAB>name` for every node.
    pub fn write_node_map(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for (id, name) in self.names.iter().enumerate() {
            writeln!(out, "{id}\t{name}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Looks up a node id by name.
    pub fn id_of(&self, name: &str) -> Option<usize> {
        // Linear scan is fine for the occasional lookup; bulk callers use `name_index`.
        self.names.iter().position(|n| n == name)
    }

    pub fn name_index(&self) -> HashMap<&str, usize> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect()
    }

    /// Noise distribution for negative sampling: `out_degree^0.75`.
    pub fn negative_distribution(&self) -> AliasTable {
        let weights: Vec<f64> = (0..self.node_count())
            .map(|v| (self.out_degree(v) as f64).powf(NOISE_EXPONENT))
            .collect();
        AliasTable::new(&weights).expect("preprocessed graphs have positive out-degrees")
    }
}
