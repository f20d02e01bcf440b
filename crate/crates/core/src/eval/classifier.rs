//! L2-regularized logistic regression, one-vs-rest for multi-class, fitted
//! by full-batch accelerated gradient descent with backtracking.
//!
//! Each binary problem minimizes
//! `0.5 |w|^2 + C * sum_i ln(1 + exp(-y_i (w . x_i + b)))` with an
//! unpenalized bias.

use crate::error::{Error, Result};
use crate::loss::{dot, sigmoid, softplus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

/// Rows of a dense feature matrix.
#[derive(Debug, Clone, Copy)]
pub struct Features<'a> {
    pub data: &'a [f64],
    pub dim: usize,
}

impl<'a> Features<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0 && data.len().is_multiple_of(dim), "feature matrix shape");
        Self { data, dim }
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Linear scorer: one weight vector and bias per class.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    dim: usize,
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl LinearClassifier {
    /// Binary fit; `score` is positive for the `true` class.
    pub fn fit_binary(x: Features<'_>, y: &[bool], cfg: &FitConfig) -> Result<Self> {
        if !y.iter().any(|&t| t) || y.iter().all(|&t| t) {
            return Err(Error::SingleClass);
        }
        let (w, b) = fit_logistic(x, y, cfg);
        Ok(Self {
            dim: x.dim,
            weights: vec![w],
            bias: vec![b],
        })
    }

    /// One-vs-rest over labels `0..classes`.
    pub fn fit_ovr(x: Features<'_>, y: &[u32], classes: usize, cfg: &FitConfig) -> Result<Self> {
        let present = (0..classes as u32).filter(|c| y.contains(c)).count();
        if present < 2 {
            return Err(Error::SingleClass);
        }
        let mut weights = Vec::with_capacity(classes);
        let mut bias = Vec::with_capacity(classes);
        for c in 0..classes as u32 {
            let target: Vec<bool> = y.iter().map(|&l| l == c).collect();
            if target.iter().any(|&t| t) {
                let (w, b) = fit_logistic(x, &target, cfg);
                weights.push(w);
                bias.push(b);
            } else {
                // Absent class never wins the argmax.
                weights.push(vec![0.0; x.dim]);
                bias.push(f64::NEG_INFINITY);
            }
        }
        Ok(Self {
            dim: x.dim,
            weights,
            bias,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Real-valued score of the first (or only) class.
    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.weights[0], x) + self.bias[0]
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect()
    }

    /// Highest-scoring class; ties go to the lower index.
    pub fn predict(&self, x: &[f64]) -> u32 {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (c, s) in self.scores(x).into_iter().enumerate() {
            if s > best_score {
                best = c;
                best_score = s;
            }
        }
        best as u32
    }
}

fn objective(x: Features<'_>, y: &[bool], c: f64, w: &[f64], b: f64) -> f64 {
    let data: f64 = (0..x.rows())
        .map(|i| {
            let z = dot(w, x.row(i)) + b;
            softplus(if y[i] { -z } else { z })
        })
        .sum();
    0.5 * dot(w, w) + c * data
}

fn gradient(x: Features<'_>, y: &[bool], c: f64, w: &[f64], b: f64, gw: &mut [f64]) -> (f64, f64) {
    gw.copy_from_slice(w);
    let mut gb = 0.0;
    let mut data = 0.0;
    for i in 0..x.rows() {
        let row = x.row(i);
        let z = dot(w, row) + b;
        let (margin, sign) = if y[i] { (z, 1.0) } else { (-z, -1.0) };
        data += softplus(-margin);
        // d/dz softplus(-sign z) = -sign * sigmoid(-margin)
        let coeff = -sign * sigmoid(-margin) * c;
        for (g, xv) in gw.iter_mut().zip(row) {
            *g += coeff * xv;
        }
        gb += coeff;
    }
    (0.5 * dot(w, w) + c * data, gb)
}

fn fit_logistic(x: Features<'_>, y: &[bool], cfg: &FitConfig) -> (Vec<f64>, f64) {
    let d = x.dim;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    // Nesterov look-ahead point.
    let mut v = w.clone();
    let mut vb = b;
    let mut gw = vec![0.0; d];
    let mut step = 1.0;
    let mut momentum = 1.0f64;
    let mut f_prev = objective(x, y, cfg.c, &w, b);
    let mut g0 = None;

    for _ in 0..cfg.max_iter {
        let (fv, gb) = gradient(x, y, cfg.c, &v, vb, &mut gw);
        let gnorm2 = dot(&gw, &gw) + gb * gb;
        let g0 = *g0.get_or_insert(gnorm2.sqrt());
        if gnorm2.sqrt() <= cfg.tol * g0.max(1.0) {
            w.copy_from_slice(&v);
            b = vb;
            break;
        }
        // Backtracking on the sufficient-decrease condition.
        let (mut nw, mut nb, mut fn_);
        loop {
            nw = v.iter().zip(&gw).map(|(a, g)| a - step * g).collect::<Vec<_>>();
            nb = vb - step * gb;
            fn_ = objective(x, y, cfg.c, &nw, nb);
            if fn_ <= fv - 0.5 * step * gnorm2 || step < 1e-20 {
                break;
            }
            step *= 0.5;
        }
        // Restart momentum when the objective goes up.
        let next_momentum = if fn_ > f_prev {
            1.0
        } else {
            0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt())
        };
        let beta = if fn_ > f_prev { 0.0 } else { (momentum - 1.0) / next_momentum };
        for ((vi, &ni), &wi) in v.iter_mut().zip(&nw).zip(&w) {
            *vi = ni + beta * (ni - wi);
        }
        vb = nb + beta * (nb - b);
        let converged = (f_prev - fn_).abs() <= cfg.tol * f_prev.abs().max(1.0);
        w = nw;
        b = nb;
        f_prev = fn_;
        momentum = next_momentum;
        step *= 2.0;
        if converged {
            break;
        }
    }
    (w, b)
}
