//! Ground truth, confusion metrics and baseline classifiers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Grid, RgbImage, SkinMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GtLabel {
    Skin,
    NonSkin,
    Ignore,
}

pub type GroundTruth = Grid<GtLabel>;

/// Maximum Euclidean RGB distance to a reference annotation color.
pub const GT_TOLERANCE: f64 = 100.0;

const GT_REFERENCES: [([u8; 3], GtLabel); 3] = [
    ([255, 0, 0], GtLabel::Skin),
    ([0, 0, 0], GtLabel::NonSkin),
    ([0, 0, 255], GtLabel::Ignore),
];

fn nearest_label(rgb: [u8; 3]) -> Option<GtLabel> {
    let dist2 = |r: [u8; 3]| -> i64 {
        (0..3)
            .map(|c| {
                let d = rgb[c] as i64 - r[c] as i64;
                d * d
            })
            .sum()
    };
    let (best, label) = GT_REFERENCES
        .iter()
        .map(|&(r, l)| (dist2(r), l))
        .min_by_key(|&(d, _)| d)
        .expect("non-empty");
    ((best as f64).sqrt() <= GT_TOLERANCE).then_some(label)
}

/// Red marks skin, black non-skin, blue pixels are ignored.
pub fn load_ground_truth(img: &RgbImage) -> Result<GroundTruth> {
    let (w, _) = img.dims();
    let mut labels = Vec::with_capacity(img.len());
    for (i, &rgb) in img.as_slice().iter().enumerate() {
        match nearest_label(rgb) {
            Some(l) => labels.push(l),
            None => {
                return Err(Error::MalformedGroundTruth {
                    x: i % w,
                    y: i / w,
                    rgb,
                })
            }
        }
    }
    Grid::from_vec(img.width(), img.height(), labels)
}

/// Skin layer of a ground truth as a mask.
pub fn gt_skin_mask(gt: &GroundTruth) -> SkinMask {
    gt.map(|&l| l == GtLabel::Skin)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

impl std::ops::Add for Confusion {
    type Output = Confusion;
    fn add(self, o: Confusion) -> Confusion {
        Confusion {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl std::iter::Sum for Confusion {
    fn sum<I: Iterator<Item = Confusion>>(iter: I) -> Confusion {
        iter.fold(Confusion::default(), |a, b| a + b)
    }
}

pub fn confusion(mask: &SkinMask, gt: &GroundTruth) -> Result<Confusion> {
    mask.check_dims(gt)?;
    let mut c = Confusion::default();
    for (&m, &l) in mask.as_slice().iter().zip(gt.as_slice()) {
        match (m, l) {
            (_, GtLabel::Ignore) => {}
            (true, GtLabel::Skin) => c.tp += 1,
            (true, GtLabel::NonSkin) => c.fp += 1,
            (false, GtLabel::Skin) => c.fn_ += 1,
            (false, GtLabel::NonSkin) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(c: &Confusion) -> Metrics {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    Metrics {
        precision,
        recall,
        f_score: f_score(precision, recall),
    }
}

/// Uniform daylight rule.
pub fn kovac_daylight([r, g, b]: [u8; 3]) -> bool {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    r > 95 && g > 40 && b > 20 && max - min > 15 && r.abs_diff(g) > 15 && r > g && r > b
}

/// Flashlight or lateral daylight rule.
pub fn kovac_flashlight([r, g, b]: [u8; 3]) -> bool {
    r > 220 && g > 210 && b > 170 && r.abs_diff(g) < 15 && r > g && r > b
}

pub const LUT_DEFAULT_BINS: usize = 32;

/// Skin color occurrence histogram over quantized RGB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LutModel {
    bins_per_channel: usize,
    total: u64,
    counts: Vec<u64>,
}

impl LutModel {
    pub fn bins_per_channel(&self) -> usize {
        self.bins_per_channel
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn shift(&self) -> u32 {
        (256 / self.bins_per_channel).trailing_zeros()
    }

    fn index(&self, [r, g, b]: [u8; 3]) -> usize {
        let s = self.shift();
        let n = self.bins_per_channel;
        let q = |v: u8| (v as usize) >> s;
        (q(r) * n + q(g)) * n + q(b)
    }

    pub fn count(&self, rgb: [u8; 3]) -> u64 {
        self.counts[self.index(rgb)]
    }

    /// Occurrence probability of the bin containing `rgb`.
    pub fn probability(&self, rgb: [u8; 3]) -> f64 {
        self.count(rgb) as f64 / self.total as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: LutModel =
            serde_json::from_str(text).map_err(|e| Error::ModelMalformed(e.to_string()))?;
        let n = m.bins_per_channel;
        if !valid_bins(n) {
            return Err(Error::ModelMalformed(format!("invalid LUT bin count {n}")));
        }
        if m.counts.len() != n * n * n {
            return Err(Error::ModelMalformed(format!(
                "LUT has {} cells, expected {}",
                m.counts.len(),
                n * n * n
            )));
        }
        if m.total == 0 || m.counts.iter().sum::<u64>() != m.total {
            return Err(Error::ModelMalformed("LUT counts do not sum to total".into()));
        }
        Ok(m)
    }
}

fn valid_bins(n: usize) -> bool {
    n.is_power_of_two() && n <= 256
}

pub fn lut_train(skin_pixels: &[[u8; 3]], bins: usize) -> Result<LutModel> {
    if !valid_bins(bins) {
        return Err(Error::InvalidParams(format!(
            "LUT bins must be a power of two <= 256, got {bins}"
        )));
    }
    if skin_pixels.is_empty() {
        return Err(Error::EmptyTraining);
    }
    let mut m = LutModel {
        bins_per_channel: bins,
        total: skin_pixels.len() as u64,
        counts: vec![0; bins * bins * bins],
    };
    for &px in skin_pixels {
        let i = m.index(px);
        m.counts[i] += 1;
    }
    Ok(m)
}

pub fn lut_classify(model: &LutModel, rgb: [u8; 3], theta: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParams(format!("theta must be in [0, 1], got {theta}")));
    }
    Ok(model.probability(rgb) >= theta)
}

/// One metrics record.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub image: String,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

pub const METRICS_HEADER: &str = "image,tp,fp,tn,fn,precision,recall,f_score";
/// Row label for metrics computed from summed confusion counts.
pub const AGGREGATE_PIXELS: &str = "__aggregate_pixels__";
/// Row label for metrics averaged over images (counts are summed).
pub const AGGREGATE_MEAN: &str = "__mean_over_images__";

/// Per-image rows followed by the two aggregate rows.
pub fn metrics_table(per_image: &[(String, Confusion)]) -> Vec<MetricsRow> {
    let mut rows: Vec<MetricsRow> = per_image
        .iter()
        .map(|(name, c)| MetricsRow {
            image: name.clone(),
            confusion: *c,
            metrics: metrics(c),
        })
        .collect();
    let summed: Confusion = per_image.iter().map(|(_, c)| *c).sum();
    let n = rows.len().max(1) as f64;
    let mean = Metrics {
        precision: rows.iter().map(|r| r.metrics.precision).sum::<f64>() / n,
        recall: rows.iter().map(|r| r.metrics.recall).sum::<f64>() / n,
        f_score: rows.iter().map(|r| r.metrics.f_score).sum::<f64>() / n,
    };
    rows.push(MetricsRow {
        image: AGGREGATE_PIXELS.into(),
        confusion: summed,
        metrics: metrics(&summed),
    });
    rows.push(MetricsRow {
        image: AGGREGATE_MEAN.into(),
        confusion: summed,
        metrics: mean,
    });
    rows
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        let c = &r.confusion;
        let m = &r.metrics;
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6}",
            r.image, c.tp, c.fp, c.tn, c.fn_, m.precision, m.recall, m.f_score
        )
        .expect("string write");
    }
    out
}
