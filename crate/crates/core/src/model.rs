//! Target and context embedding matrices plus their text persistence format.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    nodes: usize,
    dim: usize,
    target: Vec<f64>,
    context: Vec<f64>,
}

impl EmbeddingModel {
    /// Target entries uniform in `[-0.5/d, 0.5/d]`, context entries zero.
    pub fn init<R: Rng + ?Sized>(nodes: usize, dim: usize, rng: &mut R) -> Result<Self> {
        if nodes < 2 || dim < 1 {
            return Err(Error::Config(format!(
                "model needs at least 2 nodes and dimension 1 (got {nodes}x{dim})"
            )));
        }
        let bound = 0.5 / dim as f64;
        let target = (0..nodes * dim)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        Ok(Self {
            nodes,
            dim,
            target,
            context: vec![0.0; nodes * dim],
        })
    }

    pub fn from_matrices(nodes: usize, dim: usize, target: Vec<f64>, context: Vec<f64>) -> Result<Self> {
        if target.len() != nodes * dim || context.len() != nodes * dim {
            return Err(Error::Config(format!(
                "matrix sizes {} / {} do not match {nodes}x{dim}",
                target.len(),
                context.len()
            )));
        }
        Ok(Self {
            nodes,
            dim,
            target,
            context,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn target_row(&self, v: usize) -> &[f64] {
        &self.target[v * self.dim..(v + 1) * self.dim]
    }

    #[inline]
    pub fn context_row(&self, v: usize) -> &[f64] {
        &self.context[v * self.dim..(v + 1) * self.dim]
    }

    #[inline]
    pub fn target_row_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.target[v * self.dim..(v + 1) * self.dim]
    }

    #[inline]
    pub fn context_row_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.context[v * self.dim..(v + 1) * self.dim]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn context(&self) -> &[f64] {
        &self.context
    }

    pub fn target_mut(&mut self) -> &mut [f64] {
        &mut self.target
    }

    pub fn context_mut(&mut self) -> &mut [f64] {
        &mut self.context
    }

    pub fn is_finite(&self) -> bool {
        self.target.iter().chain(&self.context).all(|x| x.is_finite())
    }
}

/// Writes `N d` then one `name v_1 .. v_d` line per row.
pub fn write_matrix(path: impl AsRef<Path>, names: &[String], dim: usize, data: &[f64]) -> Result<()> {
    let path = path.as_ref();
    assert_eq!(names.len() * dim, data.len(), "matrix shape mismatch");
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{} {}", names.len(), dim).map_err(io)?;
    for (name, row) in names.iter().zip(data.chunks_exact(dim.max(1))) {
        write!(out, "{name}").map_err(io)?;
        for x in row {
            // `{}` on f64 prints the shortest string that parses back to the same bits.
            write!(out, " {x}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// An embedding matrix read from disk, rows keyed by node name.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedMatrix {
    pub names: Vec<String>,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl NamedMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Reorders rows to follow `order`; every name in `order` must be present.
    pub fn aligned_to(&self, order: &[String]) -> Result<Vec<f64>> {
        let index: std::collections::HashMap<&str, usize> = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut out = Vec::with_capacity(order.len() * self.dim);
        for name in order {
            let &i = index
                .get(name.as_str())
                .ok_or_else(|| Error::MissingNode(name.clone()))?;
            out.extend_from_slice(self.row(i));
        }
        Ok(out)
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<NamedMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(|f| f.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(1, format!("bad header {header:?}")))?;
    let [rows, dim] = head[..] else {
        return Err(parse_err(1, format!("expected `N d`, found {header:?}")));
    };

    let mut names = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dim);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let name = fields.next().unwrap_or_default();
        let before = data.len();
        for f in fields {
            data.push(
                f.parse::<f64>()
                    .map_err(|_| parse_err(idx + 1, format!("bad value {f:?}")))?,
            );
        }
        if data.len() - before != dim {
            return Err(parse_err(
                idx + 1,
                format!("expected {dim} values, found {}", data.len() - before),
            ));
        }
        names.push(name.to_owned());
    }
    if names.len() != rows {
        return Err(parse_err(1, format!("header says {rows} rows, found {}", names.len())));
    }
    Ok(NamedMatrix { names, dim, data })
}
