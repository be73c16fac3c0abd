//! Independent reference implementations and instance generators shared by
//! the integration tests.

#![allow(dead_code)]

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use skinseg::colorspace::ChannelId;
use skinseg::diffusion::DiffusionConfig;
use skinseg::otsuseg::ChannelClassMaps;
use skinseg::seedgen::TernaryImage;
use skinseg::{Grid, RgbImage, SkinMask};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Otsu: between-class variance evaluated exactly as a fraction.
//
// sigma_B^2 * N^3 = sum_i (N s_i - S n_i)^2 / n_i over non-empty classes,
// where n_i, s_i are the class count and intensity sum, N and S the totals.

struct Fraction {
    num: BigInt,
    den: BigInt,
}

impl Fraction {
    fn cmp(&self, o: &Fraction) -> Ordering {
        (&self.num * &o.den).cmp(&(&o.num * &self.den))
    }
}

fn between_class_variance(bins: &[u64; 256], cuts: &[usize]) -> Fraction {
    let n_total: u64 = bins.iter().sum();
    let s_total: u64 = bins.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let mut classes = Vec::new();
    let mut lo = 0usize;
    for &hi in cuts.iter().chain(std::iter::once(&255)) {
        let n: u64 = bins[lo..=hi].iter().sum();
        let s: u64 = (lo..=hi).map(|v| v as u64 * bins[v]).sum();
        classes.push((n, s));
        lo = hi + 1;
    }
    let mut num = BigInt::zero();
    let mut den = BigInt::from(1);
    for &(n, s) in classes.iter().filter(|(n, _)| *n > 0) {
        let a = BigInt::from(n_total) * BigInt::from(s) - BigInt::from(s_total) * BigInt::from(n);
        let term_num = &a * &a;
        let term_den = BigInt::from(n);
        num = num * &term_den + term_num * &den;
        den *= term_den;
    }
    Fraction { num, den }
}

/// Smallest `t` in `0..=254` maximizing between-class variance.
pub fn oracle_otsu(bins: &[u64; 256]) -> u8 {
    let mut best_t = 0usize;
    let mut best = between_class_variance(bins, &[0]);
    for t in 1..=254 {
        let v = between_class_variance(bins, &[t]);
        if v.cmp(&best) == Ordering::Greater {
            best = v;
            best_t = t;
        }
    }
    best_t as u8
}

/// Lexicographically smallest pair `t1 < t2` maximizing between-class
/// variance.
pub fn oracle_otsu_pair(bins: &[u64; 256]) -> [u8; 2] {
    let mut best_t = [0usize, 1];
    let mut best = between_class_variance(bins, &best_t);
    for t1 in 0..=253 {
        for t2 in t1 + 1..=254 {
            let v = between_class_variance(bins, &[t1, t2]);
            if v.cmp(&best) == Ordering::Greater {
                best = v;
                best_t = [t1, t2];
            }
        }
    }
    [best_t[0] as u8, best_t[1] as u8]
}

// ---------------------------------------------------------------------------
// Diffusion: plain sequential simulation of the scan and rays.

/// Pixels of one ray, origin excluded, clipped to the image and `max_len`.
pub fn oracle_ray(
    (ox, oy): (usize, usize),
    angle: u32,
    (w, h): (usize, usize),
    max_len: usize,
) -> Vec<(usize, usize)> {
    // Direction with y pointing down; exact for multiples of 45 degrees.
    let (dx, dy): (f64, f64) = match angle {
        0 => (1.0, 0.0),
        45 => (1.0, -1.0),
        90 => (0.0, -1.0),
        135 => (-1.0, -1.0),
        180 => (-1.0, 0.0),
        225 => (-1.0, 1.0),
        270 => (0.0, 1.0),
        315 => (1.0, 1.0),
        a => {
            let r = (a as f64).to_radians();
            (r.cos(), -r.sin())
        }
    };
    let mut out = Vec::new();
    let mut i = 1i64;
    loop {
        if max_len > 0 && i as usize > max_len {
            break;
        }
        let (x, y) = if dx.abs() >= dy.abs() {
            (
                ox as i64 + i * dx.signum() as i64,
                oy as i64 + (i as f64 * dy / dx.abs()).round() as i64,
            )
        } else {
            (
                ox as i64 + (i as f64 * dx / dy.abs()).round() as i64,
                oy as i64 + i * dy.signum() as i64,
            )
        };
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            break;
        }
        out.push((x as usize, y as usize));
        i += 1;
    }
    out
}

/// Plain-data diffusion instance.
#[derive(Clone, Debug)]
pub struct DiffusionCase {
    pub width: usize,
    pub height: usize,
    pub ternary: Vec<u8>,
    /// `labels[c][pixel]`.
    pub labels: Vec<Vec<u8>>,
    pub k: usize,
    pub edges: Vec<bool>,
    pub seed: Vec<bool>,
}

impl DiffusionCase {
    pub fn ternary_image(&self) -> TernaryImage {
        TernaryImage::new(Grid::from_vec(self.width, self.height, self.ternary.clone()).unwrap())
            .unwrap()
    }

    pub fn classes(&self) -> ChannelClassMaps {
        let maps: Vec<Grid<u8>> = self
            .labels
            .iter()
            .map(|l| Grid::from_vec(self.width, self.height, l.clone()).unwrap())
            .collect();
        let channels = ChannelId::ALL[..self.labels.len()].to_vec();
        ChannelClassMaps::from_maps(channels, self.k, &maps).unwrap()
    }

    pub fn edge_map(&self) -> SkinMask {
        Grid::from_vec(self.width, self.height, self.edges.clone()).unwrap()
    }

    pub fn seed_mask(&self) -> SkinMask {
        Grid::from_vec(self.width, self.height, self.seed.clone()).unwrap()
    }
}

fn oracle_score(case: &DiffusionCase, cfg: &DiffusionConfig, master: usize, utp: usize) -> f64 {
    let mut s = if case.ternary[utp] == 0 {
        cfg.w_black
    } else {
        cfg.w_gray
    };
    for (c, w) in cfg.channel_weights.iter().enumerate() {
        let d = (case.labels[c][master] as f64 - case.labels[c][utp] as f64).abs();
        let f = 1.0 - d / (case.k as f64 - 1.0);
        if f > 0.0 {
            s += w * f;
        }
    }
    s
}

/// Stage 1: origins are read from the live mask as the scan reaches them,
/// and rays see every earlier acceptance.
pub fn oracle_stage_one(case: &DiffusionCase, cfg: &DiffusionConfig) -> Vec<bool> {
    let (w, h) = (case.width, case.height);
    let mut mask = case.seed.clone();
    for y in 0..h {
        for x in 0..w {
            let origin = y * w + x;
            if !mask[origin] {
                continue;
            }
            for a in (0..360).step_by(10) {
                for (px, py) in oracle_ray((x, y), a, (w, h), cfg.max_ray_len) {
                    let q = py * w + px;
                    if mask[q] {
                        continue;
                    }
                    if case.edges[q] {
                        break;
                    }
                    if oracle_score(case, cfg, origin, q) >= cfg.s_min {
                        mask[q] = true;
                    } else {
                        break;
                    }
                }
            }
        }
    }
    mask
}

/// Stage 2: origins and the pass-over test both use the fixed snapshot
/// `origins`; acceptances are added on top of `working`.
pub fn oracle_stage_two(
    case: &DiffusionCase,
    cfg: &DiffusionConfig,
    working: &[bool],
    origins: &[bool],
) -> Vec<bool> {
    let (w, h) = (case.width, case.height);
    let mut mask = working.to_vec();
    for y in 0..h {
        for x in 0..w {
            let origin = y * w + x;
            if !origins[origin] {
                continue;
            }
            for a in (0..360).step_by(10) {
                for (px, py) in oracle_ray((x, y), a, (w, h), cfg.max_ray_len) {
                    let q = py * w + px;
                    if origins[q] {
                        continue;
                    }
                    if case.edges[q] {
                        break;
                    }
                    if oracle_score(case, cfg, origin, q) >= cfg.s_min {
                        mask[q] = true;
                    } else {
                        break;
                    }
                }
            }
        }
    }
    mask
}

/// Random instance: patchy labels over 7 channels with k = 3, sparse
/// edges and seeds.
pub fn random_case(rng: &mut ChaCha8Rng, width: usize, height: usize) -> DiffusionCase {
    let n = width * height;
    let ternary = (0..n)
        .map(|_| [0u8, 128, 255][rng.gen_range(0..3)])
        .collect();
    let labels = (0..7)
        .map(|_| {
            let block = rng.gen_range(2..=8usize);
            let bw = width.div_ceil(block);
            let patches: Vec<u8> = (0..bw * height.div_ceil(block))
                .map(|_| rng.gen_range(0..3))
                .collect();
            (0..n)
                .map(|i| {
                    if rng.gen_bool(0.15) {
                        rng.gen_range(0..3)
                    } else {
                        let (x, y) = (i % width, i / width);
                        patches[(y / block) * bw + x / block]
                    }
                })
                .collect()
        })
        .collect();
    let edge_p = rng.gen_range(0.0..0.12);
    let seed_p = rng.gen_range(0.0..0.04);
    let edges = (0..n).map(|_| rng.gen_bool(edge_p)).collect();
    let seed = (0..n).map(|_| rng.gen_bool(seed_p)).collect();
    DiffusionCase {
        width,
        height,
        ternary,
        labels,
        k: 3,
        edges,
        seed,
    }
}

// ---------------------------------------------------------------------------
// Synthetic scene: skin-toned ellipse on a distant background.

pub const SKIN_TONE: [u8; 3] = [212, 152, 124];
pub const BACKGROUND_TONE: [u8; 3] = [46, 96, 168];

/// `size x size` image with an axis-aligned ellipse of skin tone and
/// uniform additive noise of `+-noise` per channel. Returns the image and
/// the ellipse mask.
pub fn skin_scene(seed: u64, size: usize, noise: i32) -> (RgbImage, SkinMask) {
    let mut r = rng(seed);
    let (cx, cy) = (size as f64 * 0.5, size as f64 * 0.48);
    let (ax, ay) = (size as f64 * 0.30, size as f64 * 0.38);
    let gt = Grid::from_fn(size, size, |x, y| {
        let dx = (x as f64 + 0.5 - cx) / ax;
        let dy = (y as f64 + 0.5 - cy) / ay;
        dx * dx + dy * dy <= 1.0
    });
    let img = Grid::from_fn(size, size, |x, y| {
        let base = if *gt.get(x, y) { SKIN_TONE } else { BACKGROUND_TONE };
        base.map(|c| (c as i32 + r.gen_range(-noise..=noise)).clamp(0, 255) as u8)
    });
    (img, gt)
}
