//! The three per-glyph feature vectors: raw binary pixels, zoning ink
//! densities over a 5x5 window grid, and the fuzzy membership map
//! S_ij = max over ink cells (x, y) of exp(-beta^2 ((i-x)^2 + (j-y)^2)).

use crate::error::{OcrError, Result};
use crate::preprocess::{Glyph, GLYPH_CELLS, GLYPH_COLS, GLYPH_ROWS};

/// Row-major copy of the glyph bits, length 500.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryFeature {
    values: [u8; GLYPH_CELLS],
}

impl BinaryFeature {
    pub fn values(&self) -> &[u8; GLYPH_CELLS] {
        &self.values
    }
}

/// Ink fraction per window of the 5x5 zoning grid, row-major, each value a
/// multiple of 1/20 in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ZoningFeature {
    values: [f64; ZONING_WINDOWS],
}

pub const ZONING_GRID_ROWS: usize = 5;
pub const ZONING_GRID_COLS: usize = 5;
pub const ZONING_WINDOWS: usize = ZONING_GRID_ROWS * ZONING_GRID_COLS;

impl ZoningFeature {
    pub fn values(&self) -> &[f64; ZONING_WINDOWS] {
        &self.values
    }

    pub fn from_values(values: [f64; ZONING_WINDOWS]) -> Result<Self> {
        for &v in &values {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(OcrError::InvalidConfig {
                    detail: format!("zoning value {v} outside [0, 1]"),
                });
            }
        }
        Ok(ZoningFeature { values })
    }
}

/// 25x20 fuzzy membership map, row-major, values in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyFeature {
    values: [f64; GLYPH_CELLS],
}

impl FuzzyFeature {
    pub fn values(&self) -> &[f64; GLYPH_CELLS] {
        &self.values
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * GLYPH_COLS + col]
    }

    pub fn from_values(values: [f64; GLYPH_CELLS]) -> Result<Self> {
        for &v in &values {
            if !v.is_finite() || v <= 0.0 || v > 1.0 {
                return Err(OcrError::InvalidConfig {
                    detail: format!("fuzzy value {v} outside (0, 1]"),
                });
            }
        }
        Ok(FuzzyFeature { values })
    }
}

/// Width parameter of the fuzzy membership function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyParams {
    pub beta: f64,
}

impl Default for FuzzyParams {
    fn default() -> Self {
        FuzzyParams { beta: 0.3 }
    }
}

impl FuzzyParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(OcrError::InvalidConfig {
                detail: format!("beta must be > 0, got {beta}"),
            });
        }
        Ok(FuzzyParams { beta })
    }
}

pub fn binary_features(glyph: &Glyph) -> BinaryFeature {
    BinaryFeature {
        values: *glyph.bits(),
    }
}

/// Ink density per window: the glyph is split into a 5x5 grid of 5x4-pixel
/// windows and each feature is (ink count in window) / 20.
pub fn zoning_features(glyph: &Glyph) -> ZoningFeature {
    let counts = zoning_counts(glyph, ZONING_GRID_ROWS, ZONING_GRID_COLS)
        .expect("default grid divides the glyph");
    let window_area = (GLYPH_CELLS / ZONING_WINDOWS) as f64;
    let mut values = [0.0; ZONING_WINDOWS];
    for (v, c) in values.iter_mut().zip(counts) {
        *v = c as f64 / window_area;
    }
    ZoningFeature { values }
}

/// Per-window ink counts for an arbitrary equal-partition grid. The grid
/// must divide the 25x20 glyph evenly.
pub fn zoning_counts(glyph: &Glyph, grid_rows: usize, grid_cols: usize) -> Result<Vec<usize>> {
    if grid_rows == 0
        || grid_cols == 0
        || !GLYPH_ROWS.is_multiple_of(grid_rows)
        || !GLYPH_COLS.is_multiple_of(grid_cols)
    {
        return Err(OcrError::InvalidConfig {
            detail: format!("{grid_rows}x{grid_cols} grid does not evenly partition 25x20"),
        });
    }
    let win_h = GLYPH_ROWS / grid_rows;
    let win_w = GLYPH_COLS / grid_cols;
    let mut counts = vec![0usize; grid_rows * grid_cols];
    for r in 0..GLYPH_ROWS {
        for c in 0..GLYPH_COLS {
            if glyph.is_ink(r, c) {
                counts[(r / win_h) * grid_cols + (c / win_w)] += 1;
            }
        }
    }
    Ok(counts)
}

/// Membership weight w[m, n] = exp(-beta^2 (m^2 + n^2)).
pub fn fuzzy_weight(row_offset: i64, col_offset: i64, params: FuzzyParams) -> f64 {
    let d2 = (row_offset * row_offset + col_offset * col_offset) as f64;
    (-params.beta * params.beta * d2).exp()
}

/// Fuzzy membership map. For binary input the max over ink cells collapses
/// to exp(-beta^2 D^2) where D^2 is the squared distance to the nearest ink
/// cell, computed here with an exact two-pass distance transform.
pub fn fuzzy_features(glyph: &Glyph, params: FuzzyParams) -> FuzzyFeature {
    let d2 = squared_distance_to_ink(glyph);
    let neg_b2 = -params.beta * params.beta;
    let mut values = [0.0; GLYPH_CELLS];
    for (v, &d) in values.iter_mut().zip(d2.iter()) {
        *v = (neg_b2 * d as f64).exp();
    }
    FuzzyFeature { values }
}

/// Exact squared Euclidean distance to the nearest ink cell, per cell.
/// Two 1D envelope passes (columns then rows); all arithmetic stays in
/// integers so results are exact.
fn squared_distance_to_ink(glyph: &Glyph) -> [i64; GLYPH_CELLS] {
    const INF: i64 = i64::MAX / 4;

    // Pass 1: per column, squared vertical distance to the nearest ink row.
    let mut vert = [INF; GLYPH_CELLS];
    for c in 0..GLYPH_COLS {
        let mut nearest: Option<i64> = None;
        for r in 0..GLYPH_ROWS {
            if glyph.is_ink(r, c) {
                nearest = Some(r as i64);
            }
            if let Some(n) = nearest {
                vert[r * GLYPH_COLS + c] = (r as i64 - n) * (r as i64 - n);
            }
        }
        nearest = None;
        for r in (0..GLYPH_ROWS).rev() {
            if glyph.is_ink(r, c) {
                nearest = Some(r as i64);
            }
            if let Some(n) = nearest {
                let d = (n - r as i64) * (n - r as i64);
                let cell = &mut vert[r * GLYPH_COLS + c];
                *cell = (*cell).min(d);
            }
        }
    }

    // Pass 2: per row, lower envelope of the parabolas (c - c')^2 + vert(c').
    let mut out = [INF; GLYPH_CELLS];
    for r in 0..GLYPH_ROWS {
        let row = &vert[r * GLYPH_COLS..(r + 1) * GLYPH_COLS];
        for c in 0..GLYPH_COLS {
            let mut best = INF;
            for (cp, &g) in row.iter().enumerate() {
                if g >= INF {
                    continue;
                }
                let dc = c as i64 - cp as i64;
                best = best.min(dc * dc + g);
            }
            out[r * GLYPH_COLS + c] = best;
        }
    }
    out
}
