//! Otsu thresholding (binary and exhaustive multi-level) and per-channel
//! ordinal class maps.
//!
//! Candidate splits are ranked by `sum_k s_k^2 / w_k`, where `w_k` is the
//! pixel count and `s_k` the intensity sum of class `k`. For a fixed
//! histogram this differs from the between-class variance only by a
//! positive affine map, so the argmax is the same. Comparisons run in `f64`
//! and fall back to exact big-integer arithmetic when two candidates are
//! within rounding distance, which makes tie-breaking exact.

use std::cmp::Ordering;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::colorspace::{extract_plane, ChannelId};
use crate::error::{Error, Result};
use crate::raster::{Grid, RgbImage, ScalarPlane};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    bins: [u64; 256],
    total: u64,
}

impl Histogram256 {
    pub fn from_counts(bins: [u64; 256]) -> Self {
        let total = bins.iter().sum();
        Histogram256 { bins, total }
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// The single occupied bin, if all mass sits in one.
    pub fn single_bin(&self) -> Option<u8> {
        let mut occupied = self.bins.iter().enumerate().filter(|(_, &c)| c > 0);
        match (occupied.next(), occupied.next()) {
            (Some((v, _)), None) => Some(v as u8),
            _ => None,
        }
    }
}

pub fn histogram(plane: &ScalarPlane) -> Histogram256 {
    let mut bins = [0u64; 256];
    for &v in plane.as_slice() {
        bins[v as usize] += 1;
    }
    Histogram256::from_counts(bins)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ClassStats {
    count: u64,
    sum: u64,
}

/// Prefix sums of counts and first moments.
struct Moments {
    count: [u64; 257],
    sum: [u64; 257],
}

impl Moments {
    fn new(h: &Histogram256) -> Self {
        let mut count = [0u64; 257];
        let mut sum = [0u64; 257];
        for v in 0..256 {
            count[v + 1] = count[v] + h.bins[v];
            sum[v + 1] = sum[v] + h.bins[v] * v as u64;
        }
        Moments { count, sum }
    }

    /// Stats of intensities in `lo..hi`.
    #[inline]
    fn class(&self, lo: usize, hi: usize) -> ClassStats {
        ClassStats {
            count: self.count[hi] - self.count[lo],
            sum: self.sum[hi] - self.sum[lo],
        }
    }

    /// Classes induced by ascending thresholds (class i ends at `t_i`).
    fn split<const N: usize>(&self, thresholds: &[usize]) -> [ClassStats; N] {
        let mut out = [ClassStats { count: 0, sum: 0 }; N];
        let mut lo = 0;
        for (i, slot) in out.iter_mut().enumerate() {
            let hi = if i < thresholds.len() { thresholds[i] + 1 } else { 256 };
            *slot = self.class(lo, hi);
            lo = hi;
        }
        out
    }
}

fn objective_f64(classes: &[ClassStats]) -> f64 {
    classes
        .iter()
        .filter(|c| c.count > 0)
        .map(|c| {
            let s = c.sum as f64;
            s * s / c.count as f64
        })
        .sum()
}

fn objective_exact(classes: &[ClassStats]) -> (BigUint, BigUint) {
    let nonempty: Vec<&ClassStats> = classes.iter().filter(|c| c.count > 0).collect();
    let mut denom = BigUint::from(1u32);
    for c in &nonempty {
        denom *= c.count;
    }
    let mut numer = BigUint::from(0u32);
    for (i, c) in nonempty.iter().enumerate() {
        let mut term = BigUint::from(c.sum) * c.sum;
        for (j, d) in nonempty.iter().enumerate() {
            if i != j {
                term *= d.count;
            }
        }
        numer += term;
    }
    (numer, denom)
}

fn compare_objective(a: &[ClassStats], b: &[ClassStats]) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let (fa, fb) = (objective_f64(a), objective_f64(b));
    let tol = 1e-9 * fa.abs().max(fb.abs()).max(1.0);
    if fa - fb > tol {
        return Ordering::Greater;
    }
    if fb - fa > tol {
        return Ordering::Less;
    }
    let (na, da) = objective_exact(a);
    let (nb, db) = objective_exact(b);
    (na * db).cmp(&(nb * da))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OtsuThreshold {
    /// Pixels `<= threshold` form the lower class.
    pub threshold: u8,
    /// All mass sat in a single bin.
    pub degenerate: bool,
}

/// Smallest threshold maximizing the between-class variance.
pub fn otsu_threshold(h: &Histogram256) -> Result<OtsuThreshold> {
    if h.total == 0 {
        return Err(Error::EmptyHistogram);
    }
    if let Some(v) = h.single_bin() {
        return Ok(OtsuThreshold {
            threshold: v.min(254),
            degenerate: true,
        });
    }
    let m = Moments::new(h);
    let mut best_t = 0usize;
    let mut best: [ClassStats; 2] = m.split(&[0]);
    for t in 1..255 {
        let cand: [ClassStats; 2] = m.split(&[t]);
        if compare_objective(&cand, &best) == Ordering::Greater {
            best = cand;
            best_t = t;
        }
    }
    Ok(OtsuThreshold {
        threshold: best_t as u8,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiThreshold {
    /// Strictly ascending, `k - 1` entries.
    pub thresholds: Vec<u8>,
    pub degenerate: bool,
}

fn search<const N: usize>(m: &Moments) -> Vec<u8> {
    let mut current = [0usize; 4];
    let cuts = N - 1;
    for (i, slot) in current.iter_mut().enumerate().take(cuts) {
        *slot = i;
    }
    let mut best_t = current[..cuts].to_vec();
    let mut best: [ClassStats; N] = m.split(&best_t);
    // Lexicographic enumeration of strictly ascending vectors in 0..=254.
    loop {
        let mut i = cuts;
        loop {
            if i == 0 {
                return best_t.iter().map(|&t| t as u8).collect();
            }
            i -= 1;
            if current[i] < 254 - (cuts - 1 - i) {
                break;
            }
        }
        current[i] += 1;
        for j in i + 1..cuts {
            current[j] = current[j - 1] + 1;
        }
        let cand: [ClassStats; N] = m.split(&current[..cuts]);
        if compare_objective(&cand, &best) == Ordering::Greater {
            best = cand;
            best_t.copy_from_slice(&current[..cuts]);
        }
    }
}

/// Exhaustive `k`-class Otsu. Ties go to the lexicographically smallest
/// threshold vector; `k = 2` agrees with [`otsu_threshold`].
pub fn otsu_multilevel(h: &Histogram256, k: usize) -> Result<MultiThreshold> {
    if !(2..=4).contains(&k) {
        return Err(Error::ClassCountOutOfRange(k));
    }
    if h.total == 0 {
        return Err(Error::EmptyHistogram);
    }
    if let Some(v) = h.single_bin() {
        let first = v.min(255 - (k as u8 - 1));
        return Ok(MultiThreshold {
            thresholds: (0..k as u8 - 1).map(|i| first + i).collect(),
            degenerate: true,
        });
    }
    let m = Moments::new(h);
    let thresholds = match k {
        2 => search::<2>(&m),
        3 => search::<3>(&m),
        _ => search::<4>(&m),
    };
    Ok(MultiThreshold {
        thresholds,
        degenerate: false,
    })
}

/// Ordinal class of `v`: the number of thresholds strictly below it.
#[inline]
pub fn label_of(v: u8, thresholds: &[u8]) -> u8 {
    thresholds.iter().filter(|&&t| v > t).count() as u8
}

/// Ordinal Otsu labels for a list of channels, stored pixel-interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelClassMaps {
    channels: Vec<ChannelId>,
    k: usize,
    width: usize,
    height: usize,
    labels: Vec<u8>,
    thresholds: Vec<MultiThreshold>,
}

impl ChannelClassMaps {
    /// Builds class maps from per-channel label planes.
    pub fn from_maps(channels: Vec<ChannelId>, k: usize, maps: &[Grid<u8>]) -> Result<Self> {
        if !(2..=4).contains(&k) {
            return Err(Error::ClassCountOutOfRange(k));
        }
        if channels.is_empty() || channels.len() != maps.len() {
            return Err(Error::InvalidParams(format!(
                "{} channels for {} label maps",
                channels.len(),
                maps.len()
            )));
        }
        let (width, height) = maps[0].dims();
        for m in maps {
            maps[0].check_dims(m)?;
            if let Some(&l) = m.as_slice().iter().find(|&&l| l as usize >= k) {
                return Err(Error::InvalidParams(format!("label {l} out of range for k={k}")));
            }
        }
        let n = channels.len();
        let mut labels = vec![0u8; width * height * n];
        for (c, m) in maps.iter().enumerate() {
            for (i, &l) in m.as_slice().iter().enumerate() {
                labels[i * n + c] = l;
            }
        }
        Ok(ChannelClassMaps {
            channels,
            k,
            width,
            height,
            labels,
            thresholds: Vec::new(),
        })
    }

    pub fn channels(&self) -> &[ChannelId] {
        &self.channels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Thresholds per channel; empty when built from raw maps.
    pub fn thresholds(&self) -> &[MultiThreshold] {
        &self.thresholds
    }

    /// Labels of pixel `index` (row-major), one per channel.
    #[inline]
    pub fn pixel_labels(&self, index: usize) -> &[u8] {
        let n = self.channels.len();
        &self.labels[index * n..(index + 1) * n]
    }

    pub fn map(&self, channel_index: usize) -> Grid<u8> {
        let n = self.channels.len();
        let data = self
            .labels
            .iter()
            .skip(channel_index)
            .step_by(n)
            .copied()
            .collect();
        Grid::from_vec(self.width, self.height, data).expect("consistent dims")
    }

    /// Labels stretched over `0..=255` for viewing.
    pub fn display_map(&self, channel_index: usize) -> Grid<u8> {
        let k = self.k as u32;
        self.map(channel_index)
            .map(|&l| (l as u32 * 255 / (k - 1)) as u8)
    }
}

/// Thresholds each channel independently and labels every pixel.
pub fn segment_channels(
    img: &RgbImage,
    channels: &[ChannelId],
    k: usize,
) -> Result<ChannelClassMaps> {
    if channels.is_empty() {
        return Err(Error::InvalidParams("channel list is empty".into()));
    }
    if !(2..=4).contains(&k) {
        return Err(Error::ClassCountOutOfRange(k));
    }
    let per_channel: Vec<(Grid<u8>, MultiThreshold)> = channels
        .par_iter()
        .map(|&ch| {
            let plane = extract_plane(img, ch);
            let mt = otsu_multilevel(&histogram(&plane), k)?;
            let labels = if mt.degenerate {
                plane.map(|_| 0)
            } else {
                plane.map(|&v| label_of(v, &mt.thresholds))
            };
            Ok((labels, mt))
        })
        .collect::<Result<_>>()?;
    let (maps, thresholds): (Vec<_>, Vec<_>) = per_channel.into_iter().unzip();
    let mut out = ChannelClassMaps::from_maps(channels.to_vec(), k, &maps)?;
    out.thresholds = thresholds;
    Ok(out)
}
