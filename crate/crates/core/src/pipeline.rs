//! End-to-end orchestration behind the `skinseg` subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::colorspace::rgb_to_ycbcr;
use crate::config::PipelineConfig;
use crate::diffusion::diffuse_stages;
use crate::edgemap::image_edges;
use crate::error::{Error, Result};
use crate::evalkit::{
    confusion, kovac_daylight, kovac_flashlight, load_ground_truth, lut_train, metrics_csv,
    metrics_table, GtLabel, LutModel, MetricsRow,
};
use crate::io::{overlay, read_mask, read_rgb, write_gray, write_mask, write_rgb};
use crate::otsuseg::{segment_channels, ChannelClassMaps};
use crate::raster::{EdgeMap, RgbImage, SkinMask};
use crate::seedgen::{extract_seed, make_ternary, refine_ternary, TernaryImage};
use crate::skinmodel::{PlaneId, SkinClusterModel, TrainParams};

/// Every intermediate of one segmentation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub ternary: TernaryImage,
    pub refined: TernaryImage,
    pub seed: SkinMask,
    pub classes: ChannelClassMaps,
    pub edges: EdgeMap,
    pub stage1: SkinMask,
    pub mask: SkinMask,
    pub timings: StageTimings,
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub ternary_ms: f64,
    pub refine_ms: f64,
    pub seed_ms: f64,
    pub otsu_ms: f64,
    pub edges_ms: f64,
    pub diffusion_ms: f64,
    pub total_ms: f64,
}

fn timed<T>(slot: &mut f64, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    *slot = t.elapsed().as_secs_f64() * 1e3;
    out
}

pub fn segment_image(
    img: &RgbImage,
    model: &SkinClusterModel,
    cfg: &PipelineConfig,
) -> Result<Segmentation> {
    cfg.validate()?;
    let start = Instant::now();
    let mut tm = StageTimings::default();
    let ternary = timed(&mut tm.ternary_ms, || make_ternary(img, model));
    let refined = timed(&mut tm.refine_ms, || refine_ternary(&ternary, &cfg.seed))?;
    let seed = timed(&mut tm.seed_ms, || extract_seed(&refined));
    let classes = timed(&mut tm.otsu_ms, || {
        segment_channels(img, &cfg.otsu_channels, cfg.otsu_k)
    })?;
    let edges = timed(&mut tm.edges_ms, || image_edges(img, &cfg.canny))?;
    let (stage1, mask) = timed(&mut tm.diffusion_ms, || {
        diffuse_stages(&seed, &refined, &classes, &edges, &cfg.diffusion)
    })?;
    tm.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Segmentation {
        ternary,
        refined,
        seed,
        classes,
        edges,
        stage1,
        mask,
        timings: tm,
    })
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn is_raster(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("png"))
        .unwrap_or(false)
}

/// PNG files in `dir`, sorted by name.
pub fn list_rasters(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.is_file() && is_raster(&p) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// Expands directories to their PNG files; plain files pass through.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            out.extend(list_rasters(p)?);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn strip_suffix(stem: &str, suffix: &str) -> String {
    stem.strip_suffix(suffix).unwrap_or(stem).to_string()
}

/// GT files keyed by stem with an optional `.gt` suffix removed.
fn ground_truth_index(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    Ok(list_rasters(dir)?
        .into_iter()
        .map(|p| (strip_suffix(&stem_of(&p), ".gt"), p))
        .collect())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Where training pixels come from.
#[derive(Debug, Clone)]
pub enum PixelSource {
    /// Images paired by stem with red/black/blue ground-truth files.
    Annotated { images: PathBuf, ground_truth: PathBuf },
    /// Text file of RGB triplets, one per line.
    Triplets(PathBuf),
}

/// Parses `R G B` or `R,G,B` lines; `#` starts a comment.
pub fn parse_triplets(text: &str) -> Result<Vec<[u8; 3]>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let bad = || Error::InvalidParams(format!("line {}: expected three 0..255 values", n + 1));
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut px = [0u8; 3];
        for (slot, s) in px.iter_mut().zip(parts) {
            *slot = s.parse().map_err(|_| bad())?;
        }
        out.push(px);
    }
    Ok(out)
}

/// RGB pixels marked as skin in the annotated corpus or triplet file.
pub fn harvest_skin_pixels(source: &PixelSource) -> Result<Vec<[u8; 3]>> {
    match source {
        PixelSource::Triplets(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_triplets(&text)
        }
        PixelSource::Annotated {
            images,
            ground_truth,
        } => {
            let gts = ground_truth_index(ground_truth)?;
            let mut pixels = Vec::new();
            for img_path in list_rasters(images)? {
                let stem = stem_of(&img_path);
                let gt_path = gts.get(&stem).ok_or_else(|| {
                    Error::InvalidParams(format!("no ground truth for image {stem:?}"))
                })?;
                let img = read_rgb(&img_path)?;
                let gt = load_ground_truth(&read_rgb(gt_path)?)?;
                img.check_dims(&gt)?;
                pixels.extend(
                    img.as_slice()
                        .iter()
                        .zip(gt.as_slice())
                        .filter(|(_, &l)| l == GtLabel::Skin)
                        .map(|(&px, _)| px),
                );
            }
            Ok(pixels)
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainRequest {
    pub source: PixelSource,
    pub model_out: PathBuf,
    pub params: TrainParams,
    /// Also write a LUT baseline model with this many bins per channel.
    pub lut: Option<(PathBuf, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub pixels: usize,
    /// `(plane, inner vertices, outer vertices)`.
    pub vertex_counts: Vec<(PlaneId, usize, usize)>,
}

pub fn cmd_train(req: &TrainRequest) -> Result<(SkinClusterModel, TrainSummary)> {
    let rgb = harvest_skin_pixels(&req.source)?;
    let ycbcr: Vec<[u8; 3]> = rgb.iter().map(|&p| rgb_to_ycbcr(p)).collect();
    let model = SkinClusterModel::train(&ycbcr, req.params)?;
    write_text(&req.model_out, &(model.to_json() + "\n"))?;
    if let Some((path, bins)) = &req.lut {
        write_text(path, &lut_train(&rgb, *bins)?.to_json())?;
    }
    let vertex_counts = PlaneId::ALL
        .iter()
        .map(|&p| {
            let pair = model.plane(p);
            (p, pair.inner.vertices().len(), pair.outer.vertices().len())
        })
        .collect();
    Ok((
        model,
        TrainSummary {
            pixels: rgb.len(),
            vertex_counts,
        },
    ))
}

pub fn load_model(path: &Path) -> Result<SkinClusterModel> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    SkinClusterModel::load(std::io::BufReader::new(f))
}

/// Report entry for one input image.
#[derive(Debug, Clone, Serialize)]
pub struct ImageReport {
    pub image: PathBuf,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<StageTimings>,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: String,
    pub images: Vec<ImageReport>,
}

impl RunReport {
    pub fn failures(&self) -> usize {
        self.images.iter().filter(|r| !r.ok).count()
    }
}

fn write_artifacts(
    stem: &str,
    img: &RgbImage,
    seg: &Segmentation,
    cfg: &PipelineConfig,
) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    let path = |stage: &str| dir.join(format!("{stem}.{stage}.png"));
    let mut written = Vec::new();
    let mask_path = path("mask");
    write_mask(&mask_path, &seg.mask)?;
    written.push(mask_path);
    if cfg.debug_artifacts {
        let mut emit = |p: PathBuf, r: Result<()>| -> Result<()> {
            r?;
            written.push(p);
            Ok(())
        };
        let p = path("ternary");
        emit(p.clone(), write_gray(&p, seg.ternary.grid()))?;
        let p = path("ternary_refined");
        emit(p.clone(), write_gray(&p, seg.refined.grid()))?;
        let p = path("seed");
        emit(p.clone(), write_mask(&p, &seg.seed))?;
        for (i, ch) in seg.classes.channels().iter().enumerate() {
            let p = path(&format!("class_{}", ch.name()));
            emit(p.clone(), write_gray(&p, &seg.classes.display_map(i)))?;
        }
        let p = path("edges");
        emit(p.clone(), write_mask(&p, &seg.edges))?;
        let p = path("stage1");
        emit(p.clone(), write_mask(&p, &seg.stage1))?;
        let p = path("overlay");
        emit(p.clone(), write_rgb(&p, &overlay(img, &seg.mask)?))?;
    }
    Ok(written)
}

fn segment_one(
    path: &Path,
    model: &SkinClusterModel,
    cfg: &PipelineConfig,
) -> Result<(StageTimings, Vec<PathBuf>)> {
    let img = read_rgb(path)?;
    let seg = segment_image(&img, model, cfg)?;
    let artifacts = write_artifacts(&stem_of(path), &img, &seg, cfg)?;
    Ok((seg.timings, artifacts))
}

/// Runs `work` on a pool of `jobs` threads (0 = rayon default).
pub fn with_jobs<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(work))
}

/// Segments every input; per-image failures are recorded, not fatal.
/// Writes `report.json` into the output directory.
pub fn cmd_segment(
    inputs: &[PathBuf],
    model: &SkinClusterModel,
    cfg: &PipelineConfig,
) -> Result<RunReport> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let images = expand_inputs(inputs)?
        .par_iter()
        .map(|p| match segment_one(p, model, cfg) {
            Ok((t, artifacts)) => ImageReport {
                image: p.clone(),
                ok: true,
                error: None,
                timings: Some(t),
                artifacts,
            },
            Err(e) => ImageReport {
                image: p.clone(),
                ok: false,
                error: Some(e.to_string()),
                timings: None,
                artifacts: Vec::new(),
            },
        })
        .collect();
    let report = RunReport {
        config: cfg.to_text(),
        images,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_text(&cfg.output_dir.join("report.json"), &json)?;
    Ok(report)
}

/// Pairs `<name>.mask.png` (or `<name>.png`) with `<name>.gt.png` (or
/// `<name>.png`) and tallies metrics. Unmatched names are an error.
pub fn cmd_eval(mask_dir: &Path, gt_dir: &Path) -> Result<Vec<MetricsRow>> {
    let gts = ground_truth_index(gt_dir)?;
    let masks: BTreeMap<String, PathBuf> = list_rasters(mask_dir)?
        .into_iter()
        .map(|p| (strip_suffix(&stem_of(&p), ".mask"), p))
        .collect();
    let unmatched: Vec<&String> = masks
        .keys()
        .filter(|k| !gts.contains_key(*k))
        .chain(gts.keys().filter(|k| !masks.contains_key(*k)))
        .collect();
    if !unmatched.is_empty() {
        return Err(Error::InvalidParams(format!(
            "unmatched mask / ground-truth names: {unmatched:?}"
        )));
    }
    let mut per_image = Vec::with_capacity(masks.len());
    for (name, mask_path) in &masks {
        let mask = read_mask(mask_path)?;
        let gt = load_ground_truth(&read_rgb(&gts[name])?)?;
        per_image.push((name.clone(), confusion(&mask, &gt)?));
    }
    Ok(metrics_table(&per_image))
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    write_text(path, &metrics_csv(rows))
}

#[derive(Debug, Clone)]
pub enum BaselineRule {
    Daylight,
    Flashlight,
    Lut { model: LutModel, theta: f64 },
}

pub fn baseline_mask(img: &RgbImage, rule: &BaselineRule) -> Result<SkinMask> {
    Ok(match rule {
        BaselineRule::Daylight => img.map(|&p| kovac_daylight(p)),
        BaselineRule::Flashlight => img.map(|&p| kovac_flashlight(p)),
        BaselineRule::Lut { model, theta } => {
            if !(0.0..=1.0).contains(theta) {
                return Err(Error::InvalidParams(format!(
                    "theta must be in [0, 1], got {theta}"
                )));
            }
            img.map(|&p| model.probability(p) >= *theta)
        }
    })
}

pub fn load_lut(path: &Path) -> Result<LutModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    LutModel::from_json(&text)
}

/// Writes `<stem>.mask.png` per input into `out_dir`, isolating failures.
pub fn cmd_baseline(inputs: &[PathBuf], rule: &BaselineRule, out_dir: &Path) -> Result<RunReport> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let images = expand_inputs(inputs)?
        .par_iter()
        .map(|p| {
            let run = || -> Result<PathBuf> {
                let mask = baseline_mask(&read_rgb(p)?, rule)?;
                let out = out_dir.join(format!("{}.mask.png", stem_of(p)));
                write_mask(&out, &mask)?;
                Ok(out)
            };
            match run() {
                Ok(out) => ImageReport {
                    image: p.clone(),
                    ok: true,
                    error: None,
                    timings: None,
                    artifacts: vec![out],
                },
                Err(e) => ImageReport {
                    image: p.clone(),
                    ok: false,
                    error: Some(e.to_string()),
                    timings: None,
                    artifacts: Vec::new(),
                },
            }
        })
        .collect();
    Ok(RunReport {
        config: String::new(),
        images,
    })
}
