//! Ternary image construction, neighbour-scored refinement and seed
//! extraction.

use rayon::prelude::*;

use crate::colorspace::rgb_to_ycbcr;
use crate::error::{Error, Result};
use crate::raster::{Grid, RgbImage, SkinMask};
use crate::skinmodel::SkinClusterModel;

pub const WHITE: u8 = 255;
pub const GRAY: u8 = 128;
pub const BLACK: u8 = 0;

/// Per-pixel map over `{0, 128, 255}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TernaryImage(Grid<u8>);

impl TernaryImage {
    pub fn new(grid: Grid<u8>) -> Result<Self> {
        if let Some(v) = grid
            .as_slice()
            .iter()
            .find(|&&v| v != WHITE && v != GRAY && v != BLACK)
        {
            return Err(Error::InvalidImage(format!("ternary value {v} not in {{0,128,255}}")));
        }
        Ok(TernaryImage(grid))
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        TernaryImage::new(Grid::filled(width, height, value)).expect("valid ternary level")
    }

    pub fn grid(&self) -> &Grid<u8> {
        &self.0
    }

    pub fn into_grid(self) -> Grid<u8> {
        self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        *self.0.get(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedParams {
    /// Weight of the inner 3x3 ring.
    pub k: f64,
    /// Scores below this turn the pixel black.
    pub th1: f64,
    /// Scores above this turn the pixel white.
    pub th2: f64,
}

impl Default for SeedParams {
    fn default() -> Self {
        SeedParams {
            k: 2.0,
            th1: -6.0,
            th2: 6.0,
        }
    }
}

impl SeedParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) {
            return Err(Error::InvalidParams(format!("seed K must be > 0, got {}", self.k)));
        }
        if !(self.th1 < self.th2) {
            return Err(Error::InvalidParams(format!(
                "seed th1 ({}) must be below th2 ({})",
                self.th1, self.th2
            )));
        }
        Ok(())
    }
}

/// Classifies every pixel against the model: T1 -> 255, T2 -> 128, T3 -> 0.
pub fn make_ternary(img: &RgbImage, model: &SkinClusterModel) -> TernaryImage {
    let tables = model.lookup_tables();
    TernaryImage(img.map(|&px| tables.classify(rgb_to_ycbcr(px)).level()))
}

#[inline]
fn vote(v: u8) -> i32 {
    match v {
        WHITE => 1,
        BLACK => -1,
        _ => 0,
    }
}

/// Signed ring sums `(inner 3x3 ring, outer 5x5 ring)` around `(x, y)`.
fn ring_votes(t: &TernaryImage, x: usize, y: usize) -> (i32, i32) {
    let mut inner = 0;
    let mut outer = 0;
    for dy in -2i32..=2 {
        for dx in -2i32..=2 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let v = vote(t.get((x as i32 + dx) as usize, (y as i32 + dy) as usize));
            if dx.abs() <= 1 && dy.abs() <= 1 {
                inner += v;
            } else {
                outer += v;
            }
        }
    }
    (inner, outer)
}

#[inline]
fn is_interior(t: &TernaryImage, x: usize, y: usize) -> bool {
    x >= 2 && y >= 2 && x + 2 < t.width() && y + 2 < t.height()
}

/// `K * T + Phi`, where white neighbours vote +1, black -1 and gray 0.
pub fn neighbor_score(t: &TernaryImage, x: usize, y: usize, k: f64) -> Result<f64> {
    if !is_interior(t, x, y) {
        return Err(Error::InvalidParams(format!(
            "({x}, {y}) is within 2 pixels of the border of a {}x{} image",
            t.width(),
            t.height()
        )));
    }
    let (inner, outer) = ring_votes(t, x, y);
    Ok(k * inner as f64 + outer as f64)
}

fn refined_value(t: &TernaryImage, x: usize, y: usize, p: &SeedParams) -> u8 {
    let v = t.get(x, y);
    if v == WHITE || !is_interior(t, x, y) {
        return v;
    }
    let (inner, outer) = ring_votes(t, x, y);
    let score = p.k * inner as f64 + outer as f64;
    if score > p.th2 {
        WHITE
    } else if score < p.th1 {
        BLACK
    } else {
        v
    }
}

/// Pixel visiting order for [`refine_ternary_ordered`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanOrder {
    Forward,
    Reverse,
}

/// One hysteresis pass that reads only the input image.
pub fn refine_ternary(t: &TernaryImage, p: &SeedParams) -> Result<TernaryImage> {
    p.validate()?;
    let w = t.width();
    let mut out = t.grid().clone();
    out.as_mut_slice()
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, cell) in row.iter_mut().enumerate() {
                *cell = refined_value(t, x, y, p);
            }
        });
    Ok(TernaryImage(out))
}

/// Sequential variant of [`refine_ternary`] with an explicit traversal
/// order. The result does not depend on the order.
pub fn refine_ternary_ordered(
    t: &TernaryImage,
    p: &SeedParams,
    order: ScanOrder,
) -> Result<TernaryImage> {
    p.validate()?;
    let (w, h) = (t.width(), t.height());
    let mut out = t.grid().clone();
    let mut visit = |i: usize| {
        let (x, y) = (i % w, i / w);
        out.set(x, y, refined_value(t, x, y, p));
    };
    match order {
        ScanOrder::Forward => (0..w * h).for_each(&mut visit),
        ScanOrder::Reverse => (0..w * h).rev().for_each(&mut visit),
    }
    Ok(TernaryImage(out))
}

pub fn extract_seed(t: &TernaryImage) -> SkinMask {
    t.grid().map(|&v| v == WHITE)
}
