//! Multi-step transition proximity, shifted positive PMI, and the per-pair
//! scale factors that shrink perturbations on strongly connected pairs.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Square sparse matrix in CSR layout with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j as usize, v))
        })
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.iter() {
            dense[i][j] = v;
        }
        dense
    }

    fn from_rows(n: usize, rows: impl Iterator<Item = Vec<(u32, f64)>>) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        debug_assert_eq!(offsets.len(), n + 1);
        Self { n, offsets, cols, vals }
    }

    /// `n x n` matrix from `(row, col, value)` entries; duplicates add up and
    /// zeros are dropped.
    pub fn from_triplets(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in entries {
            assert!(i < n && j < n, "entry ({i},{j}) outside {n}x{n}");
            rows[i].push((j as u32, v));
        }
        Self::from_rows(
            n,
            rows.into_iter().map(|mut row| {
                row.sort_by_key(|e| e.0);
                let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
                for (j, v) in row {
                    match merged.last_mut() {
                        Some(last) if last.0 == j => last.1 += v,
                        _ => merged.push((j, v)),
                    }
                }
                merged.retain(|e| e.1 != 0.0);
                merged
            }),
        )
    }

    /// Sparse product `self * rhs`.
    pub fn matmul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        let n = self.n;
        let mut acc = vec![0.0f64; n];
        let mut seen = vec![false; n];
        let mut touched: Vec<u32> = Vec::new();
        let rows = (0..n).map(|i| {
            let (cols, vals) = self.row(i);
            for (&k, &a) in cols.iter().zip(vals) {
                let (rc, rv) = rhs.row(k as usize);
                for (&j, &b) in rc.iter().zip(rv) {
                    if !seen[j as usize] {
                        seen[j as usize] = true;
                        touched.push(j);
                    }
                    acc[j as usize] += a * b;
                }
            }
            touched.sort_unstable();
            let row: Vec<(u32, f64)> = touched
                .iter()
                .map(|&j| {
                    let v = acc[j as usize];
                    acc[j as usize] = 0.0;
                    seen[j as usize] = false;
                    (j, v)
                })
                .collect();
            touched.clear();
            row
        });
        let rows: Vec<_> = rows.collect();
        SparseMatrix::from_rows(n, rows.into_iter())
    }

    /// Elementwise sum of two matrices of equal dimension.
    pub fn add(&self, rhs: &SparseMatrix) -> SparseMatrix {
        let rows = (0..self.n).map(|i| {
            let (ac, av) = self.row(i);
            let (bc, bv) = rhs.row(i);
            let mut out = Vec::with_capacity(ac.len() + bc.len());
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                if q == bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                    out.push((ac[p], av[p]));
                    p += 1;
                } else if p == ac.len() || bc[q] < ac[p] {
                    out.push((bc[q], bv[q]));
                    q += 1;
                } else {
                    out.push((ac[p], av[p] + bv[q]));
                    p += 1;
                    q += 1;
                }
            }
            out
        });
        let rows: Vec<_> = rows.collect();
        SparseMatrix::from_rows(self.n, rows.into_iter())
    }
}

/// Row-normalized adjacency: entry `(i, j)` is `A_ij / sum_k A_ik`.
pub fn transition_matrix(graph: &Graph) -> SparseMatrix {
    let n = graph.node_count();
    let rows = (0..n).map(|i| {
        let w = graph.neighbor_weights(i);
        let total: f64 = w.iter().sum();
        graph
            .neighbors(i)
            .iter()
            .zip(w)
            .map(|(&j, &a)| (j, a / total))
            .collect::<Vec<_>>()
    });
    let rows: Vec<_> = rows.collect();
    SparseMatrix::from_rows(n, rows.into_iter())
}

/// Shifted positive PMI over `T + T^2 + ... + T^order` where `T` is the
/// transition matrix. Only strictly positive entries are stored.
pub fn shifted_ppmi(graph: &Graph, order: usize, shift: f64) -> Result<SparseMatrix> {
    if order < 1 {
        return Err(Error::Config("proximity order must be >= 1".into()));
    }
    if !(shift > 0.0) {
        return Err(Error::Config("shift must be > 0".into()));
    }
    let step = transition_matrix(graph);
    let mut power = step.clone();
    let mut total = step.clone();
    for _ in 1..order {
        power = power.matmul(&step);
        total = total.add(&power);
    }

    let n = total.dim();
    let mut col_sums = vec![0.0f64; n];
    for (_, j, v) in total.iter() {
        col_sums[j] += v;
    }
    let log_shift = shift.ln();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let (cols, vals) = total.row(i);
        let mut row = Vec::new();
        for (&j, &v) in cols.iter().zip(vals) {
            if v <= 0.0 {
                continue;
            }
            let col = col_sums[j as usize];
            if col <= 0.0 {
                return Err(Error::DegenerateColumn(j as usize));
            }
            let m = (v / col).ln() - log_shift;
            if m > 0.0 {
                row.push((j, m));
            }
        }
        rows.push(row);
    }
    Ok(SparseMatrix::from_rows(n, rows.into_iter()))
}

/// Adaptive perturbation scale `1 - M_ij / max(M)`, defined for every pair.
#[derive(Debug, Clone)]
pub struct ScaleMatrix {
    ppmi: SparseMatrix,
    max_m: f64,
    order: usize,
    shift: f64,
}

impl ScaleMatrix {
    pub fn from_ppmi(ppmi: SparseMatrix, order: usize, shift: f64) -> Self {
        let max_m = ppmi.iter().map(|(_, _, v)| v).fold(0.0, f64::max);
        Self {
            ppmi,
            max_m,
            order,
            shift,
        }
    }

    /// Builds the matrix from the graph with order `order` and shift `1/N`.
    pub fn for_graph(graph: &Graph, order: usize) -> Result<Self> {
        let shift = 1.0 / graph.node_count() as f64;
        Ok(Self::from_ppmi(shifted_ppmi(graph, order, shift)?, order, shift))
    }

    pub fn max_m(&self) -> f64 {
        self.max_m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn ppmi(&self) -> &SparseMatrix {
        &self.ppmi
    }

    #[inline]
    pub fn phi(&self, i: usize, j: usize) -> f64 {
        if self.max_m <= 0.0 || i >= self.ppmi.dim() || j >= self.ppmi.dim() {
            return 1.0;
        }
        1.0 - self.ppmi.get(i, j) / self.max_m
    }

    pub fn scale_pairs(&self, targets: &[u32], contexts: &[u32]) -> Vec<f64> {
        targets
            .iter()
            .zip(contexts)
            .map(|(&i, &j)| self.phi(i as usize, j as usize))
            .collect()
    }

    /// Writes `i  j  M_ij  phi_ij` for every stored entry, using node names.
    pub fn write_tsv(&self, graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for (i, j, m) in self.ppmi.iter() {
            writeln!(out, "{}\t{}\t{}\t{}", graph.name(i), graph.name(j), m, self.phi(i, j))
                .map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LoadOptions;

    fn graph(text: &str) -> Graph {
        Graph::parse_edge_list(text, Path::new("t"), LoadOptions { directed: false, weighted: true }).unwrap()
    }

    #[test]
    fn triangle_transition() {
        let t = transition_matrix(&graph("a b\nb c\nc a\n"));
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 0.0 } else { 0.5 };
                assert_eq!(t.get(i, j), expected);
            }
        }
    }

    #[test]
    fn star_transition_row() {
        let g = graph("c x 1\nc y 3\n");
        let t = transition_matrix(&g);
        assert_eq!(t.get(0, 1), 0.25);
        assert_eq!(t.get(0, 2), 0.75);
        for i in 0..3 {
            assert!((t.row_sum(i) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_node_ppmi() {
        let m = shifted_ppmi(&graph("a b\n"), 1, 0.5).unwrap();
        assert_eq!(m.nnz(), 2);
        assert!((m.get(0, 1) - 2f64.ln()).abs() < 1e-15);
        assert!((m.get(1, 0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn large_shift_zeroes_everything() {
        let g = graph("a b\nb c\nc d\nd a\na c\n");
        let m = shifted_ppmi(&g, 2, 1.0).unwrap();
        assert_eq!(m.nnz(), 0);
        let scale = ScaleMatrix::from_ppmi(m, 2, 1.0);
        assert_eq!(scale.phi(0, 1), 1.0);
    }

    #[test]
    fn phi_arithmetic() {
        let m = SparseMatrix::from_rows(
            3,
            vec![vec![(1, 0.5)], vec![(2, 1.0)], vec![(0, 2.0)]].into_iter(),
        );
        let s = ScaleMatrix::from_ppmi(m, 2, 1.0);
        assert_eq!(s.phi(0, 1), 0.75);
        assert_eq!(s.phi(1, 2), 0.5);
        assert_eq!(s.phi(2, 0), 0.0);
        assert_eq!(s.phi(0, 0), 1.0);
        assert_eq!(s.phi(7, 0), 1.0);
    }

    #[test]
    fn bad_parameters() {
        let g = graph("a b\n");
        assert!(shifted_ppmi(&g, 0, 0.5).is_err());
        assert!(shifted_ppmi(&g, 2, 0.0).is_err());
    }
}
