//! Area under the ROC curve from real-valued scores.

use crate::error::{Error, Result};

/// Mann-Whitney estimate: the probability that a random positive outscores
/// a random negative, counting ties as one half (average ranks).
pub fn auc(positive: &[f64], negative: &[f64]) -> Result<f64> {
    if positive.is_empty() || negative.is_empty() {
        return Err(Error::SingleClass);
    }
    let mut all: Vec<(f64, bool)> = positive
        .iter()
        .map(|&s| (s, true))
        .chain(negative.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // Ranks i+1..=j share their mean.
        let mean_rank = (i + 1 + j) as f64 / 2.0;
        let hits = all[i..j].iter().filter(|e| e.1).count();
        rank_sum += mean_rank * hits as f64;
        i = j;
    }
    let p = positive.len() as f64;
    let n = negative.len() as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}
