//! Two-stage ray diffusion of skin labels from seed pixels.
//!
//! From every origin pixel 36 rays are cast at 10 degree steps. Each pixel
//! along a ray is skipped if already skin, stops the ray if it is an edge,
//! and is otherwise scored against the origin (the master pixel). Accepted
//! pixels join the mask and the ray continues; a rejected pixel ends it.
//!
//! Stage 1 scans the image once in raster order with feedback: pixels
//! accepted ahead of the scan become origins themselves. Stage 2 casts rays
//! from a fixed snapshot (the stage-1 output) and reads only that snapshot
//! while walking rays, so its result is a function of the snapshot alone.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::otsuseg::ChannelClassMaps;
use crate::raster::{EdgeMap, Grid, SkinMask};
use crate::seedgen::{TernaryImage, BLACK};

/// Ray directions in degrees, counter-clockwise from +x.
pub const RAY_ANGLES: [u32; 36] = {
    let mut a = [0u32; 36];
    let mut i = 0;
    while i < 36 {
        a[i] = i as u32 * 10;
        i += 1;
    }
    a
};

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionConfig {
    pub w_gray: f64,
    pub w_black: f64,
    /// One weight per class-map channel, in channel order.
    pub channel_weights: Vec<f64>,
    /// Minimum score for a pixel to be accepted.
    pub s_min: f64,
    /// Maximum ray length in pixels; 0 means unbounded.
    pub max_ray_len: usize,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            w_gray: 2.0,
            w_black: 0.0,
            channel_weights: vec![2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            s_min: 7.0,
            max_ray_len: 0,
        }
    }
}

impl DiffusionConfig {
    pub fn validate(&self, channels: usize) -> Result<()> {
        if self.channel_weights.len() != channels {
            return Err(Error::InvalidParams(format!(
                "{} channel weights for {} channels",
                self.channel_weights.len(),
                channels
            )));
        }
        let all = [self.w_gray, self.w_black]
            .into_iter()
            .chain(self.channel_weights.iter().copied());
        for w in all {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParams(format!("weight {w} must be finite and >= 0")));
            }
        }
        if self.s_min.is_nan() {
            return Err(Error::InvalidParams("s_min is NaN".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    One,
    Two,
}

/// Unit step along the dominant axis and the per-step slope of the minor
/// axis for `angle` degrees (y down).
fn ray_direction(angle: u32) -> (bool, i32, i32, f64) {
    let rad = (angle as f64).to_radians();
    let snap = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    let dx = snap(rad.cos());
    let dy = snap(-rad.sin());
    let diagonal = (dx.abs() - dy.abs()).abs() < 1e-12;
    if diagonal || dx.abs() > dy.abs() {
        let slope = if diagonal { dy.signum() } else { dy / dx.abs() };
        (true, dx.signum() as i32, 0, slope)
    } else {
        let slope = dx / dy.abs();
        (false, 0, dy.signum() as i32, slope)
    }
}

/// Offset of the `i`-th ray pixel from the origin.
#[inline]
fn ray_offset(dir: (bool, i32, i32, f64), i: i32) -> (i32, i32) {
    let (x_major, sx, sy, slope) = dir;
    let minor = (i as f64 * slope).round() as i32;
    if x_major {
        (sx * i, minor)
    } else {
        (minor, sy * i)
    }
}

/// Pixels on the ray from `origin` at `angle` degrees, origin excluded,
/// stopping at the image border or after `max_len` pixels (0 = no limit).
pub fn ray_pixels(
    origin: (usize, usize),
    angle: u32,
    dims: (usize, usize),
    max_len: usize,
) -> Vec<(usize, usize)> {
    let dir = ray_direction(angle);
    let (w, h) = (dims.0 as i64, dims.1 as i64);
    let mut out = Vec::new();
    for i in 1.. {
        if max_len > 0 && i as usize > max_len {
            break;
        }
        let (ox, oy) = ray_offset(dir, i);
        let (x, y) = (origin.0 as i64 + ox as i64, origin.1 as i64 + oy as i64);
        if x < 0 || y < 0 || x >= w || y >= h {
            break;
        }
        out.push((x as usize, y as usize));
    }
    out
}

/// Origin-independent ray offsets for all 36 angles.
struct RayTable {
    rays: Vec<Vec<(i32, i32)>>,
}

impl RayTable {
    fn new(dims: (usize, usize), max_len: usize) -> Self {
        // The dominant coordinate advances by one per step, so no ray stays
        // in bounds longer than the larger dimension.
        let mut len = dims.0.max(dims.1);
        if max_len > 0 {
            len = len.min(max_len);
        }
        let rays = RAY_ANGLES
            .iter()
            .map(|&a| {
                let dir = ray_direction(a);
                (1..=len as i32).map(|i| ray_offset(dir, i)).collect()
            })
            .collect();
        RayTable { rays }
    }
}

#[inline]
fn agreement_sum(master: &[u8], utp: &[u8], k: usize, weights: &[f64]) -> f64 {
    let span = (k - 1) as f64;
    let mut s = 0.0;
    for ((&m, &u), &w) in master.iter().zip(utp).zip(weights) {
        let d = (m as i32 - u as i32).abs() as f64;
        s += w * (1.0 - d / span).max(0.0);
    }
    s
}

#[inline]
fn score(utp_ternary: u8, master: &[u8], utp: &[u8], k: usize, cfg: &DiffusionConfig) -> f64 {
    let base = if utp_ternary == BLACK {
        cfg.w_black
    } else {
        cfg.w_gray
    };
    base + agreement_sum(master, utp, k, &cfg.channel_weights)
}

/// Diffusion score of an under-test pixel against its master pixel.
///
/// Black pixels earn `w_black`; gray pixels (and white pixels that are not
/// yet in the mask) earn `w_gray`. Each channel adds its weight scaled by
/// `1 - |label difference| / (k - 1)`, floored at 0.
pub fn diffusion_score(
    utp_ternary: u8,
    master_labels: &[u8],
    utp_labels: &[u8],
    k: usize,
    cfg: &DiffusionConfig,
) -> Result<f64> {
    if master_labels.len() != cfg.channel_weights.len()
        || utp_labels.len() != cfg.channel_weights.len()
    {
        return Err(Error::InvalidParams(format!(
            "label vectors of length {} / {} for {} channel weights",
            master_labels.len(),
            utp_labels.len(),
            cfg.channel_weights.len()
        )));
    }
    if k < 2 {
        return Err(Error::ClassCountOutOfRange(k));
    }
    Ok(score(utp_ternary, master_labels, utp_labels, k, cfg))
}

struct Inputs<'a> {
    ternary: &'a [u8],
    classes: &'a ChannelClassMaps,
    edges: &'a [bool],
    cfg: &'a DiffusionConfig,
    width: usize,
    height: usize,
    rays: RayTable,
}

impl<'a> Inputs<'a> {
    fn new(
        mask: &SkinMask,
        t: &'a TernaryImage,
        classes: &'a ChannelClassMaps,
        edges: &'a EdgeMap,
        cfg: &'a DiffusionConfig,
    ) -> Result<Self> {
        mask.check_dims(t.grid())?;
        mask.check_dims(edges)?;
        if classes.dims() != mask.dims() {
            return Err(Error::DimensionMismatch {
                expected: mask.dims(),
                found: classes.dims(),
            });
        }
        cfg.validate(classes.channels().len())?;
        Ok(Inputs {
            ternary: t.grid().as_slice(),
            classes,
            edges: edges.as_slice(),
            cfg,
            width: mask.width(),
            height: mask.height(),
            rays: RayTable::new(mask.dims(), cfg.max_ray_len),
        })
    }

    /// Walks every ray from `origin`, consulting and updating `mask`.
    #[inline]
    fn cast(&self, origin: usize, mask: &mut impl RayMask) {
        let (ox, oy) = ((origin % self.width) as i32, (origin / self.width) as i32);
        let master = self.classes.pixel_labels(origin);
        let k = self.classes.k();
        for ray in &self.rays.rays {
            for &(dx, dy) in ray {
                let (x, y) = (ox + dx, oy + dy);
                if x < 0 || y < 0 || x >= self.width as i32 || y >= self.height as i32 {
                    break;
                }
                let i = y as usize * self.width + x as usize;
                if mask.is_skin(i) {
                    continue;
                }
                if self.edges[i] {
                    break;
                }
                let s = score(self.ternary[i], master, self.classes.pixel_labels(i), k, self.cfg);
                if s >= self.cfg.s_min {
                    mask.accept(i);
                } else {
                    break;
                }
            }
        }
    }
}

/// What a ray sees as skin and where its acceptances go.
trait RayMask {
    fn is_skin(&self, i: usize) -> bool;
    fn accept(&mut self, i: usize);
}

/// Stage 1: acceptances are visible to later rays immediately.
impl RayMask for Vec<bool> {
    fn is_skin(&self, i: usize) -> bool {
        self[i]
    }
    fn accept(&mut self, i: usize) {
        self[i] = true;
    }
}

/// Stage 2: rays see only the origin snapshot; acceptances are collected.
struct Snapshot<'a> {
    view: &'a [bool],
    accepted: Vec<usize>,
}

impl RayMask for Snapshot<'_> {
    fn is_skin(&self, i: usize) -> bool {
        self.view[i]
    }
    fn accept(&mut self, i: usize) {
        self.accepted.push(i);
    }
}

fn stage_one(seed: &SkinMask, inputs: &Inputs) -> SkinMask {
    let mut work: Vec<bool> = seed.as_slice().to_vec();
    for origin in 0..work.len() {
        if work[origin] {
            inputs.cast(origin, &mut work);
        }
    }
    Grid::from_vec(seed.width(), seed.height(), work).expect("same dims")
}

fn stage_two(working: &SkinMask, origins: &SkinMask, inputs: &Inputs) -> SkinMask {
    let view = origins.as_slice();
    let accepted: Vec<Vec<usize>> = view
        .par_iter()
        .enumerate()
        .filter(|(_, &o)| o)
        .map(|(origin, _)| {
            let mut snap = Snapshot { view, accepted: Vec::new() };
            inputs.cast(origin, &mut snap);
            snap.accepted
        })
        .collect();
    let mut out = working.clone();
    let cells = out.as_mut_slice();
    for i in accepted.into_iter().flatten() {
        cells[i] = true;
    }
    out
}

/// Runs one diffusion stage starting from `seed`.
pub fn diffuse_stage(
    seed: &SkinMask,
    t: &TernaryImage,
    classes: &ChannelClassMaps,
    edges: &EdgeMap,
    cfg: &DiffusionConfig,
    stage: Stage,
) -> Result<SkinMask> {
    let inputs = Inputs::new(seed, t, classes, edges, cfg)?;
    Ok(match stage {
        Stage::One => stage_one(seed, &inputs),
        Stage::Two => stage_two(seed, seed, &inputs),
    })
}

/// Stage 2 with an explicit origin snapshot applied on top of `working`.
pub fn diffuse_stage_two_from(
    working: &SkinMask,
    origins: &SkinMask,
    t: &TernaryImage,
    classes: &ChannelClassMaps,
    edges: &EdgeMap,
    cfg: &DiffusionConfig,
) -> Result<SkinMask> {
    working.check_dims(origins)?;
    let inputs = Inputs::new(working, t, classes, edges, cfg)?;
    Ok(stage_two(working, origins, &inputs))
}

/// Both stages; returns `(stage-1 mask, final mask)`.
pub fn diffuse_stages(
    seed: &SkinMask,
    t: &TernaryImage,
    classes: &ChannelClassMaps,
    edges: &EdgeMap,
    cfg: &DiffusionConfig,
) -> Result<(SkinMask, SkinMask)> {
    let inputs = Inputs::new(seed, t, classes, edges, cfg)?;
    let first = stage_one(seed, &inputs);
    let second = stage_two(&first, &first, &inputs);
    Ok((first, second))
}

pub fn diffuse(
    seed: &SkinMask,
    t: &TernaryImage,
    classes: &ChannelClassMaps,
    edges: &EdgeMap,
    cfg: &DiffusionConfig,
) -> Result<SkinMask> {
    diffuse_stages(seed, t, classes, edges, cfg).map(|(_, m)| m)
}
