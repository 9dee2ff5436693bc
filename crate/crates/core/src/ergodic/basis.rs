use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::model::Vec2;
use crate::painter::TargetDistribution;

/// Cosine basis on the unit square, truncated to `order` modes per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisConfig {
    order: usize,
    normalizers: Vec<f64>,
    weights: Vec<f64>,
}

/// Spatial dimension of the arena.
pub const SPATIAL_DIM: usize = 2;

impl BasisConfig {
    /// Normalizers make each mode unit-norm on `[0,1]^2`; weights are
    /// `(1 + |k|^2)^(-(d+1)/2)` so low frequencies dominate the metric.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "basis order must be at least 1");
        let exponent = -((SPATIAL_DIM as f64) + 1.0) / 2.0;
        let mut normalizers = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for k1 in 0..order {
            for k2 in 0..order {
                let axis = |k: usize| -> f64 { if k == 0 { 1.0 } else { 0.5 } };
                normalizers.push((axis(k1) * axis(k2)).sqrt());
                let k_sq = (k1 * k1 + k2 * k2) as f64;
                weights.push((1.0 + k_sq).powf(exponent));
            }
        }
        Self {
            order,
            normalizers,
            weights,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order * self.order
    }

    pub fn is_empty(&self) -> bool {
        self.order == 0
    }

    #[inline]
    pub fn index(&self, k: (usize, usize)) -> usize {
        k.0 * self.order + k.1
    }

    pub fn normalizer(&self, k: (usize, usize)) -> f64 {
        self.normalizers[self.index(k)]
    }

    pub fn weight(&self, k: (usize, usize)) -> f64 {
        self.weights[self.index(k)]
    }

    pub fn normalizers(&self) -> &[f64] {
        &self.normalizers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn modes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.order).flat_map(move |k1| (0..self.order).map(move |k2| (k1, k2)))
    }
}

/// `F_k(s) = cos(k1 pi x) cos(k2 pi y) / h_k`.
pub fn basis_eval(k: (usize, usize), s: Vec2, cfg: &BasisConfig) -> f64 {
    (k.0 as f64 * PI * s.x).cos() * (k.1 as f64 * PI * s.y).cos() / cfg.normalizer(k)
}

pub fn basis_grad(k: (usize, usize), s: Vec2, cfg: &BasisConfig) -> Vec2 {
    let (a, b) = (k.0 as f64 * PI, k.1 as f64 * PI);
    let h = cfg.normalizer(k);
    Vec2::new(
        -a * (a * s.x).sin() * (b * s.y).cos() / h,
        -b * (a * s.x).cos() * (b * s.y).sin() / h,
    )
}

/// Per-axis trig tables at one point, shared by every mode.
#[derive(Debug, Clone)]
pub(crate) struct AxisTables {
    pub cos_x: Vec<f64>,
    pub sin_x: Vec<f64>,
    pub cos_y: Vec<f64>,
    pub sin_y: Vec<f64>,
}

impl AxisTables {
    pub fn new(order: usize) -> Self {
        Self {
            cos_x: vec![0.0; order],
            sin_x: vec![0.0; order],
            cos_y: vec![0.0; order],
            sin_y: vec![0.0; order],
        }
    }

    pub fn fill(&mut self, s: Vec2) {
        for k in 0..self.cos_x.len() {
            let a = k as f64 * PI;
            let (sx, cx) = (a * s.x).sin_cos();
            let (sy, cy) = (a * s.y).sin_cos();
            self.cos_x[k] = cx;
            self.sin_x[k] = sx;
            self.cos_y[k] = cy;
            self.sin_y[k] = sy;
        }
    }

    /// `sum_k weights[k] * F_k(s)` for the point the tables were filled at.
    pub fn weighted_value(&self, weights: &[f64], cfg: &BasisConfig) -> f64 {
        let n = cfg.order();
        let mut acc = 0.0;
        for k1 in 0..n {
            for k2 in 0..n {
                let i = k1 * n + k2;
                acc += weights[i] * self.cos_x[k1] * self.cos_y[k2] / cfg.normalizers[i];
            }
        }
        acc
    }

    /// `sum_k weights[k] * grad F_k(s)`.
    pub fn weighted_grad(&self, weights: &[f64], cfg: &BasisConfig) -> Vec2 {
        let n = cfg.order();
        let mut gx = 0.0;
        let mut gy = 0.0;
        for k1 in 0..n {
            let a = k1 as f64 * PI;
            for k2 in 0..n {
                let i = k1 * n + k2;
                let w = weights[i] / cfg.normalizers[i];
                if w == 0.0 {
                    continue;
                }
                let b = k2 as f64 * PI;
                gx -= w * a * self.sin_x[k1] * self.cos_y[k2];
                gy -= w * b * self.cos_x[k1] * self.sin_y[k2];
            }
        }
        Vec2::new(gx, gy)
    }
}

/// A `K x K` array of basis coefficients, flattened as `k1 * K + k2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    order: usize,
    values: Vec<f64>,
}

impl Coefficients {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            values: vec![0.0; order * order],
        }
    }

    pub fn from_values(order: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), order * order, "coefficient array shape");
        Self { order, values }
    }

    /// `F_k(s)` for every mode.
    pub fn at_point(s: Vec2, cfg: &BasisConfig) -> Self {
        let mut tables = AxisTables::new(cfg.order());
        tables.fill(s);
        let n = cfg.order();
        let values = (0..n * n)
            .map(|i| tables.cos_x[i / n] * tables.cos_y[i % n] / cfg.normalizers[i])
            .collect();
        Self { order: n, values }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, k: (usize, usize)) -> f64 {
        self.values[k.0 * self.order + k.1]
    }

    pub fn max_abs_diff(&self, other: &Coefficients) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Midpoint-rule projection of a density grid onto the basis.
pub fn grid_coeffs(density: &Grid, cfg: &BasisConfig) -> Coefficients {
    let g = density.size();
    let n = cfg.order();
    let table = |k: usize| -> Vec<f64> {
        (0..g)
            .map(|i| (k as f64 * PI * (i as f64 + 0.5) / g as f64).cos())
            .collect()
    };
    let cos_tables: Vec<Vec<f64>> = (0..n).map(table).collect();

    let mut values = vec![0.0; n * n];
    for (k1, cx) in cos_tables.iter().enumerate() {
        // Collapse x first: row_sums[iy] = sum_ix phi(ix, iy) cos(k1 pi x_ix).
        let row_sums: Vec<f64> = density
            .cells()
            .chunks(g)
            .map(|row| row.iter().zip(cx).map(|(p, c)| p * c).sum())
            .collect();
        for (k2, cy) in cos_tables.iter().enumerate() {
            let i = k1 * n + k2;
            let s: f64 = row_sums.iter().zip(cy).map(|(r, c)| r * c).sum();
            values[i] = s / cfg.normalizers[i];
        }
    }
    Coefficients { order: n, values }
}

pub fn target_coeffs(target: &TargetDistribution, cfg: &BasisConfig) -> Coefficients {
    grid_coeffs(target.density(), cfg)
}
