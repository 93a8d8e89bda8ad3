use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::vec2::Vec2;

/// Kernel contributions beyond this many bandwidths are below 3e-18 of the
/// peak and are skipped.
const KERNEL_REACH: f64 = 9.0;

/// Rectangular lattice `x_min + i·dx`, `y_min + j·dy` including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, nodes: usize) -> GridSpec {
        GridSpec {
            x_min: -half_width,
            x_max: half_width,
            nx: nodes,
            y_min: -half_width,
            y_max: half_width,
            ny: nodes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(LabError::config("analysis.grid", "need at least 2 nodes per axis"));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(LabError::config("analysis.grid", "empty grid extent"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }

    /// Node of flat index `k` (row-major in `y`).
    pub fn point(&self, k: usize) -> Vec2 {
        Vec2::new(self.x(k % self.nx), self.y(k / self.nx))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn translated(&self, w: Vec2) -> GridSpec {
        GridSpec {
            x_min: self.x_min + w.x,
            x_max: self.x_max + w.x,
            y_min: self.y_min + w.y,
            y_max: self.y_max + w.y,
            ..*self
        }
    }

    /// Square-celled grid around the samples, padded by `pad`.
    pub fn covering(samples: &[Vec2], pad: f64, spacing: f64) -> Result<GridSpec> {
        if samples.is_empty() {
            return Err(LabError::Estimation("no samples to cover".into()));
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for s in samples {
            x0 = x0.min(s.x);
            x1 = x1.max(s.x);
            y0 = y0.min(s.y);
            y1 = y1.max(s.y);
        }
        let nx = (((x1 - x0 + 2.0 * pad) / spacing).ceil() as usize).max(1) + 1;
        let ny = (((y1 - y0 + 2.0 * pad) / spacing).ceil() as usize).max(1) + 1;
        Ok(GridSpec {
            x_min: x0 - pad,
            x_max: x0 - pad + (nx - 1) as f64 * spacing,
            nx,
            y_min: y0 - pad,
            y_max: y0 - pad + (ny - 1) as f64 * spacing,
            ny,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub grid: GridSpec,
    pub bandwidth: f64,
    /// Row-major in `y`: index `j·nx + i`.
    pub values: Vec<f64>,
    pub n_samples: usize,
    pub weights_used: bool,
}

impl DensityEstimate {
    /// Lattice sum times cell area.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn points(&self) -> impl Iterator<Item = (Vec2, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.grid.point(k), v))
    }
}

/// `σ̂ · N^{-1/6}` with `σ̂` the pooled per-coordinate standard deviation.
pub fn silverman_bandwidth(samples: &[Vec2]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(LabError::Estimation("bandwidth needs at least two samples".into()));
    }
    let n = samples.len() as f64;
    let mean = (1.0 / n) * samples.iter().fold(Vec2::ZERO, |a, &s| a + s);
    let var = samples.iter().map(|&s| (s - mean).norm_sq()).sum::<f64>() / (2.0 * (n - 1.0));
    let sigma = var.sqrt();
    if !(sigma > 0.0) {
        return Err(LabError::Estimation("samples are degenerate (zero spread)".into()));
    }
    Ok(sigma * n.powf(-1.0 / 6.0))
}

/// Gaussian product-kernel density estimate on `grid`.
///
/// With weights the estimate is normalised by their sum, not by the sample
/// count. Each grid row is reduced in a fixed order, so values do not
/// depend on the number of worker threads.
pub fn kde(
    samples: &[Vec2],
    weights: Option<&[f64]>,
    bandwidth: f64,
    grid: &GridSpec,
) -> Result<DensityEstimate> {
    if samples.is_empty() {
        return Err(LabError::Estimation("kde needs at least one sample".into()));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(LabError::Estimation(format!("bandwidth must be positive, got {bandwidth}")));
    }
    grid.validate()?;
    if let Some(w) = weights {
        if w.len() != samples.len() {
            return Err(LabError::Estimation("weights and samples differ in length".into()));
        }
        if w.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(LabError::Estimation("weights must lie in [0, 1]".into()));
        }
    }
    let mut pts: Vec<(f64, f64, f64)> = samples
        .iter()
        .enumerate()
        .map(|(k, s)| (s.x, s.y, weights.map_or(1.0, |w| w[k])))
        .filter(|p| p.2 > 0.0)
        .collect();
    let total_weight: f64 = pts.iter().map(|p| p.2).sum();
    if !(total_weight > 0.0) {
        return Err(LabError::Estimation("all weights are zero".into()));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let reach = KERNEL_REACH * bandwidth;
    let inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    let norm = 1.0 / (total_weight * 2.0 * PI * bandwidth * bandwidth);
    let columns: Vec<(usize, usize)> = (0..grid.nx)
        .map(|i| {
            let x = grid.x(i);
            let lo = pts.partition_point(|p| p.0 < x - reach);
            let hi = pts.partition_point(|p| p.0 <= x + reach);
            (lo, hi)
        })
        .collect();

    let values: Vec<f64> = (0..grid.ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            let y = grid.y(j);
            let pts = &pts;
            columns.iter().enumerate().map(move |(i, &(lo, hi))| {
                let x = grid.x(i);
                let mut acc = 0.0;
                for &(px, py, w) in &pts[lo..hi] {
                    let dy = py - y;
                    if dy.abs() > reach {
                        continue;
                    }
                    let dx = px - x;
                    acc += w * (-(dx * dx + dy * dy) * inv_two_h2).exp();
                }
                acc * norm
            })
        })
        .collect();

    Ok(DensityEstimate {
        grid: *grid,
        bandwidth,
        values,
        n_samples: samples.len(),
        weights_used: weights.is_some(),
    })
}
