//! Square scalar grids over the unit arena.
//!
//! Cell `(ix, iy)` covers `[ix/G, (ix+1)/G) x [iy/G, (iy+1)/G)` and is stored
//! row-major with rows indexed by `iy`, so `cells[iy * G + ix]`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::Vec2;
use crate::GridError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    size: usize,
    cells: Vec<f64>,
}

impl Grid {
    pub fn zeros(size: usize) -> Self {
        Self::filled(size, 0.0)
    }

    pub fn filled(size: usize, value: f64) -> Self {
        Self {
            size,
            cells: vec![value; size * size],
        }
    }

    pub fn from_cells(size: usize, cells: Vec<f64>) -> Result<Self, GridError> {
        if cells.len() != size * size {
            return Err(GridError::Shape {
                expected: size * size,
                got: cells.len(),
            });
        }
        Ok(Self { size, cells })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [f64] {
        &mut self.cells
    }

    pub fn into_cells(self) -> Vec<f64> {
        self.cells
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.cells[iy * self.size + ix]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, value: f64) {
        self.cells[iy * self.size + ix] = value;
    }

    #[inline]
    pub fn add(&mut self, ix: usize, iy: usize, value: f64) {
        self.cells[iy * self.size + ix] += value;
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Vec2 {
        cell_center(self.size, ix, iy)
    }

    /// Cell containing `p`; points on the far walls fall in the last cell.
    pub fn cell_of(&self, p: Vec2) -> (usize, usize) {
        cell_of(self.size, p)
    }

    pub fn sum(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.cells.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scale(&mut self, factor: f64) {
        self.cells.iter_mut().for_each(|c| *c *= factor);
    }

    /// Plain text: `G` lines of `G` space-separated reals, first line is `iy = 0`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.cells.chunks(self.size) {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GridError> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| GridError::Parse {
                        line: lineno + 1,
                        token: tok.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        let size = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != size) {
            return Err(GridError::Ragged {
                line: i + 1,
                expected: size,
                got: row.len(),
            });
        }
        Self::from_cells(size, rows.into_iter().flatten().collect())
    }
}

pub fn cell_center(size: usize, ix: usize, iy: usize) -> Vec2 {
    let g = size as f64;
    Vec2::new((ix as f64 + 0.5) / g, (iy as f64 + 0.5) / g)
}

pub fn cell_of(size: usize, p: Vec2) -> (usize, usize) {
    let g = size as f64;
    let ix = ((p.x * g).floor().max(0.0) as usize).min(size - 1);
    let iy = ((p.y * g).floor().max(0.0) as usize).min(size - 1);
    (ix, iy)
}
