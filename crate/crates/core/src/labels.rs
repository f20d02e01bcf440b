use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Single-label class assignment for graph nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    classes: Vec<String>,
    of_node: Vec<Option<u32>>,
}

impl Labels {
    /// Reads `node<TAB>label` lines. The first field names the node and the
    /// last field the label, so wider rows (e.g. feature dumps that end in a
    /// label column) also load. Nodes absent from `graph` are ignored.
    pub fn load(path: impl AsRef<Path>, graph: &Graph) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, graph)
    }

    pub fn parse(text: &str, graph: &Graph) -> Result<Self> {
        let index = graph.name_index();
        let mut class_ids: HashMap<&str, u32> = HashMap::new();
        let mut classes = Vec::new();
        let mut of_node = vec![None; graph.node_count()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 {
                return Err(Error::Labels(format!("line {}: expected `node label`", lineno + 1)));
            }
            let (node, label) = (fields[0], fields[fields.len() - 1]);
            let Some(&v) = index.get(node) else {
                continue;
            };
            let next = classes.len() as u32;
            let class = *class_ids.entry(label).or_insert_with(|| {
                classes.push(label.to_owned());
                next
            });
            match of_node[v] {
                Some(prev) if prev != class => {
                    return Err(Error::Labels(format!(
                        "line {}: node {node:?} already labelled {:?}",
                        lineno + 1,
                        classes[prev as usize]
                    )))
                }
                _ => of_node[v] = Some(class),
            }
        }
        let labels = Self { classes, of_node };
        if labels.classes.len() < 2 {
            return Err(Error::Labels(format!(
                "need at least 2 classes among graph nodes, found {}",
                labels.classes.len()
            )));
        }
        Ok(labels)
    }

    pub fn from_assignments(classes: Vec<String>, of_node: Vec<Option<u32>>) -> Self {
        Self { classes, of_node }
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn of(&self, node: usize) -> Option<u32> {
        self.of_node[node]
    }

    pub fn node_count(&self) -> usize {
        self.of_node.len()
    }

    /// `(node, class)` for every labelled node in id order.
    pub fn labelled(&self) -> Vec<(usize, u32)> {
        self.of_node
            .iter()
            .enumerate()
            .filter_map(|(v, c)| c.map(|c| (v, c)))
            .collect()
    }
}
