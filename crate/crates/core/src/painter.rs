//! Gesture strokes to target densities.
//!
//! Strokes are stamped onto a signed raw layer (attract adds, repel
//! subtracts), then the layer is Gaussian-smoothed, floored and normalized
//! into a density. The raw layer is kept so later strokes overlay earlier
//! ones until the player clears.

use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::model::Vec2;
use crate::PainterError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Brush {
    Attract,
    Repel,
}

impl Brush {
    fn sign(self) -> f64 {
        match self {
            Brush::Attract => 1.0,
            Brush::Repel => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub brush: Brush,
    pub radius: f64,
    pub points: Vec<Vec2>,
}

impl Stroke {
    pub fn new(brush: Brush, radius: f64, points: Vec<Vec2>) -> Self {
        Self { brush, radius, points }
    }

    pub fn dot(brush: Brush, radius: f64, at: Vec2) -> Self {
        Self::new(brush, radius, vec![at])
    }

    pub fn validate(&self) -> Result<(), PainterError> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(PainterError::InvalidRadius(self.radius));
        }
        if self.points.is_empty() {
            return Err(PainterError::EmptyStroke);
        }
        if let Some(p) = self.points.iter().find(|p| !(p.is_finite() && p.in_unit_box())) {
            return Err(PainterError::PointOutOfBounds(*p));
        }
        Ok(())
    }

    /// Distance from `p` to the polyline through the stroke's points.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        if self.points.len() == 1 {
            return (p - self.points[0]).norm();
        }
        self.points
            .windows(2)
            .map(|seg| segment_distance(p, seg[0], seg[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PainterConfig {
    pub grid_size: usize,
    /// Gaussian width in cells.
    pub sigma_cells: f64,
    /// Kernel truncation in multiples of sigma.
    pub truncate: f64,
    pub floor: f64,
}

impl Default for PainterConfig {
    fn default() -> Self {
        Self {
            grid_size: 50,
            sigma_cells: 1.5,
            truncate: 4.0,
            floor: 1e-6,
        }
    }
}

impl PainterConfig {
    pub fn validate(&self) -> Result<(), PainterError> {
        if self.grid_size == 0 {
            return Err(PainterError::InvalidConfig("grid_size must be positive".into()));
        }
        if !(self.sigma_cells > 0.0 && self.truncate > 0.0) {
            return Err(PainterError::InvalidConfig("sigma and truncation must be positive".into()));
        }
        if !(self.floor > 0.0) {
            return Err(PainterError::InvalidConfig("floor must be positive".into()));
        }
        Ok(())
    }

    /// Half-width of the truncated kernel in cells.
    pub fn kernel_radius(&self) -> usize {
        (self.truncate * self.sigma_cells).ceil() as usize
    }

    /// Normalized 1-D Gaussian weights for offsets `-r..=r`.
    pub fn kernel(&self) -> Vec<f64> {
        let r = self.kernel_radius() as isize;
        let two_var = 2.0 * self.sigma_cells * self.sigma_cells;
        let raw: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / two_var).exp()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

/// A normalized target density plus the raw stroke layer it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDistribution {
    density: Grid,
    raw: Grid,
    generation: u64,
}

impl TargetDistribution {
    pub fn uniform(grid_size: usize) -> Self {
        let g = grid_size as f64;
        Self {
            density: Grid::filled(grid_size, 1.0 / (g * g)),
            raw: Grid::zeros(grid_size),
            generation: 0,
        }
    }

    pub fn density(&self) -> &Grid {
        &self.density
    }

    pub fn raw(&self) -> &Grid {
        &self.raw
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn with_generation(mut self, generation: u64) -> Self {
        self.generation = generation;
        self
    }

    pub fn grid_size(&self) -> usize {
        self.density.size()
    }
}

/// Stamps strokes onto a signed layer.
///
/// Each stroke adds its brush sign once to every cell whose center lies
/// within `radius` of the stroke's polyline. Starts from `base` when given.
pub fn rasterize(
    strokes: &[Stroke],
    base: Option<&Grid>,
    grid_size: usize,
) -> Result<Grid, PainterError> {
    let mut layer = match base {
        Some(b) if b.size() != grid_size => {
            return Err(PainterError::InvalidConfig(format!(
                "base layer is {}x{}, expected {grid_size}x{grid_size}",
                b.size(),
                b.size()
            )))
        }
        Some(b) => b.clone(),
        None => Grid::zeros(grid_size),
    };
    for stroke in strokes {
        stroke.validate()?;
        stamp(&mut layer, stroke);
    }
    Ok(layer)
}

fn stamp(layer: &mut Grid, stroke: &Stroke) {
    let g = layer.size();
    let sign = stroke.brush.sign();
    // Only scan the bounding box of the stroke dilated by its radius.
    let (mut lo, mut hi) = (stroke.points[0], stroke.points[0]);
    for p in &stroke.points {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let gf = g as f64;
    let span = |a: f64, b: f64| {
        let first = ((a - stroke.radius) * gf - 0.5).floor().max(0.0) as usize;
        let last = (((b + stroke.radius) * gf - 0.5).ceil().max(0.0) as usize).min(g - 1);
        first..=last
    };
    for iy in span(lo.y, hi.y) {
        for ix in span(lo.x, hi.x) {
            if stroke.distance_to(layer.cell_center(ix, iy)) <= stroke.radius {
                layer.add(ix, iy, sign);
            }
        }
    }
}

#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

/// Separable Gaussian blur with mirrored edges (`d c b a | a b c d`).
pub fn gaussian_smooth(raw: &Grid, cfg: &PainterConfig) -> Grid {
    let g = raw.size();
    let kernel = cfg.kernel();
    let r = cfg.kernel_radius() as isize;

    let mut horizontal = Grid::zeros(g);
    for iy in 0..g {
        for ix in 0..g {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                acc += w * raw.get(reflect(ix as isize + k as isize - r, g), iy);
            }
            horizontal.set(ix, iy, acc);
        }
    }
    let mut out = Grid::zeros(g);
    for iy in 0..g {
        for ix in 0..g {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                acc += w * horizontal.get(ix, reflect(iy as isize + k as isize - r, g));
            }
            out.set(ix, iy, acc);
        }
    }
    out
}

/// Smooths, floors and normalizes a raw layer into a density summing to 1.
///
/// An empty or all-repel layer floors everywhere and so yields the uniform
/// density.
pub fn smooth_and_normalize(raw: &Grid, cfg: &PainterConfig) -> Result<TargetDistribution, PainterError> {
    if raw.cells().iter().any(|v| !v.is_finite()) {
        return Err(PainterError::NonFinite);
    }
    let mut density = gaussian_smooth(raw, cfg);
    density.cells_mut().iter_mut().for_each(|c| *c = c.max(cfg.floor));
    let total = density.sum();
    density.scale(1.0 / total);
    Ok(TargetDistribution {
        density,
        raw: raw.clone(),
        generation: 0,
    })
}

/// Overlays `strokes` on `base` (if any) and produces the new density.
pub fn paint(
    strokes: &[Stroke],
    base: Option<&TargetDistribution>,
    cfg: &PainterConfig,
) -> Result<TargetDistribution, PainterError> {
    let raw = rasterize(strokes, base.map(|b| b.raw()), cfg.grid_size)?;
    smooth_and_normalize(&raw, cfg)
}
