//! Canny edge detection for the diffusion barrier.
//!
//! Smoothing and Sobel gradients are computed in fixed point with a
//! symmetric integer kernel, so gradient magnitudes of mirror-symmetric
//! inputs are bit-identical and non-maximum suppression is exact.

use std::collections::VecDeque;

use crate::colorspace::luminance_gray;
use crate::error::{Error, Result};
use crate::raster::{EdgeMap, Grid, RgbImage, ScalarPlane};

const KERNEL_SCALE: f64 = 16384.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    /// Gaussian standard deviation in pixels.
    pub sigma: f64,
    /// Weak threshold on the unnormalized Sobel magnitude.
    pub low: f64,
    /// Strong threshold on the unnormalized Sobel magnitude.
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            sigma: 1.4,
            low: 40.0,
            high: 100.0,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("canny sigma must be > 0, got {}", self.sigma)));
        }
        if !(0.0 <= self.low && self.low <= self.high) {
            return Err(Error::InvalidParams(format!(
                "canny thresholds must satisfy 0 <= low <= high, got {} / {}",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

/// Integer Gaussian weights for offsets `-r..=r` and their sum.
fn gaussian_kernel(sigma: f64) -> (Vec<i64>, i64) {
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|j| (-((j * j) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    // Build from |j| so the kernel is exactly symmetric.
    let weights: Vec<i64> = (-radius..=radius)
        .map(|j| (raw[(j.abs() + radius) as usize] / total * KERNEL_SCALE).round() as i64)
        .collect();
    let sum = weights.iter().sum();
    (weights, sum)
}

/// Fixed-point gradients of the smoothed plane; border entries are zero.
struct Gradients {
    gx: Vec<i64>,
    gy: Vec<i64>,
    /// Squared magnitude in fixed point.
    mag2: Vec<i128>,
    /// Fixed-point scale of one intensity unit (kernel sum squared).
    scale: f64,
}

fn gradients(gray: &ScalarPlane, sigma: f64) -> Gradients {
    let (w, h) = gray.dims();
    let (kernel, ksum) = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as i64;
    let px = gray.as_slice();

    let mut horiz = vec![0i64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0i64;
            for (k, &wt) in kernel.iter().enumerate() {
                let xx = (x as i64 + k as i64 - r).clamp(0, w as i64 - 1) as usize;
                acc += wt * px[y * w + xx] as i64;
            }
            horiz[y * w + x] = acc;
        }
    }
    let mut smooth = vec![0i64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0i64;
            for (k, &wt) in kernel.iter().enumerate() {
                let yy = (y as i64 + k as i64 - r).clamp(0, h as i64 - 1) as usize;
                acc += wt * horiz[yy * w + x];
            }
            smooth[y * w + x] = acc;
        }
    }

    let mut gx = vec![0i64; w * h];
    let mut gy = vec![0i64; w * h];
    let mut mag2 = vec![0i128; w * h];
    let s = |x: usize, y: usize| smooth[y * w + x];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let dx = (s(x + 1, y - 1) + 2 * s(x + 1, y) + s(x + 1, y + 1))
                - (s(x - 1, y - 1) + 2 * s(x - 1, y) + s(x - 1, y + 1));
            let dy = (s(x - 1, y + 1) + 2 * s(x, y + 1) + s(x + 1, y + 1))
                - (s(x - 1, y - 1) + 2 * s(x, y - 1) + s(x + 1, y - 1));
            let i = y * w + x;
            gx[i] = dx;
            gy[i] = dy;
            mag2[i] = dx as i128 * dx as i128 + dy as i128 * dy as i128;
        }
    }
    Gradients {
        gx,
        gy,
        mag2,
        scale: (ksum * ksum) as f64,
    }
}

/// Sobel magnitude (`sqrt(gx^2 + gy^2)` on the 0..255 scale) of the
/// smoothed plane. Border pixels are zero.
pub fn gradient_magnitude(gray: &ScalarPlane, sigma: f64) -> Grid<f64> {
    let g = gradients(gray, sigma);
    let data = g
        .mag2
        .iter()
        .map(|&m| (m as f64).sqrt() / g.scale)
        .collect();
    Grid::from_vec(gray.width(), gray.height(), data).expect("same dims")
}

/// Neighbour offsets `(negative side, positive side)` along the quantized
/// gradient direction. Image y points down.
fn direction_offsets(gx: i64, gy: i64) -> ((i64, i64), (i64, i64)) {
    let mut angle = (gy as f64).atan2(gx as f64).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if !(22.5..157.5).contains(&angle) {
        ((-1, 0), (1, 0))
    } else if angle < 67.5 {
        ((-1, -1), (1, 1))
    } else if angle < 112.5 {
        ((0, -1), (0, 1))
    } else {
        ((1, -1), (-1, 1))
    }
}

pub fn canny(gray: &ScalarPlane, p: &CannyParams) -> Result<EdgeMap> {
    p.validate()?;
    let (w, h) = gray.dims();
    if w < 3 || h < 3 {
        return Err(Error::PlaneTooSmall { width: w, height: h });
    }
    let g = gradients(gray, p.sigma);
    let mag = |i: usize| (g.mag2[i] as f64).sqrt() / g.scale;

    // Non-maximum suppression: strictly above the negative-side neighbour,
    // at least the positive-side one, so plateaus keep a single pixel.
    let mut survivor = vec![false; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = g.mag2[i];
            if m == 0 {
                continue;
            }
            let (neg, pos) = direction_offsets(g.gx[i], g.gy[i]);
            let at = |(dx, dy): (i64, i64)| {
                g.mag2[((y as i64 + dy) as usize) * w + (x as i64 + dx) as usize]
            };
            survivor[i] = m > at(neg) && m >= at(pos);
        }
    }

    let mut edges = vec![false; w * h];
    let mut queue = VecDeque::new();
    for i in 0..w * h {
        if survivor[i] && mag(i) >= p.high {
            edges[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let (nx, ny) = (x + dx, y + dy);
                if nx <= 0 || ny <= 0 || nx >= w as i64 - 1 || ny >= h as i64 - 1 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !edges[j] && survivor[j] && mag(j) >= p.low {
                    edges[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Grid::from_vec(w, h, edges)
}

pub fn image_edges(img: &RgbImage, p: &CannyParams) -> Result<EdgeMap> {
    canny(&luminance_gray(img), p)
}
