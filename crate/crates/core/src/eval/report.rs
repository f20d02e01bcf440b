//! Result rows and their per-cell aggregation over seeds.

use std::collections::BTreeMap;

/// One measurement: `ratio_or_eps` is the training ratio for
/// classification, the keep ratio for link prediction, or the attack
/// strength.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub dataset: String,
    pub method: String,
    pub task: String,
    pub ratio_or_eps: f64,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub dataset: String,
    pub method: String,
    pub task: String,
    pub ratio_or_eps: f64,
    pub metric: String,
    pub runs: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub std: f64,
}

/// Groups rows by everything except the seed. Output follows first
/// appearance of each group.
pub fn aggregate(rows: &[MetricRow]) -> Vec<AggregateRow> {
    let mut order: Vec<(String, String, String, u64, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String, String, u64, String), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let key = (
            r.dataset.clone(),
            r.method.clone(),
            r.task.clone(),
            r.ratio_or_eps.to_bits(),
            r.metric.clone(),
        );
        let values = groups.entry(key.clone()).or_default();
        if values.is_empty() {
            order.push(key);
        }
        values.push(r.value);
    }
    order
        .into_iter()
        .map(|key| {
            let values = &groups[&key];
            let (mean, std) = mean_std(values);
            let (dataset, method, task, bits, metric) = key;
            AggregateRow {
                dataset,
                method,
                task,
                ratio_or_eps: f64::from_bits(bits),
                metric,
                runs: values.len(),
                mean,
                std,
            }
        })
        .collect()
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
