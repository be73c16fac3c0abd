//! Pipeline configuration: flat `key=value` text with dotted keys.
//!
//! Blank lines and lines starting with `#` are skipped. Unknown keys are
//! rejected. Later assignments override earlier ones, so command-line
//! `--set` overrides applied after the file win.

use std::path::{Path, PathBuf};

use crate::colorspace::ChannelId;
use crate::diffusion::DiffusionConfig;
use crate::edgemap::CannyParams;
use crate::error::{Error, Result};
use crate::seedgen::SeedParams;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub model_path: Option<PathBuf>,
    pub seed: SeedParams,
    pub canny: CannyParams,
    pub otsu_k: usize,
    pub otsu_channels: Vec<ChannelId>,
    pub diffusion: DiffusionConfig,
    pub output_dir: PathBuf,
    pub debug_artifacts: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            model_path: None,
            seed: SeedParams::default(),
            canny: CannyParams::default(),
            otsu_k: 3,
            otsu_channels: ChannelId::DIFFUSION_DEFAULT.to_vec(),
            diffusion: DiffusionConfig::default(),
            output_dir: PathBuf::from("out"),
            debug_artifacts: false,
        }
    }
}

pub const CONFIG_KEYS: [&str; 16] = [
    "model.path",
    "seed.K",
    "seed.th1",
    "seed.th2",
    "canny.sigma",
    "canny.low",
    "canny.high",
    "otsu.k",
    "otsu.channels",
    "diffusion.w_gray",
    "diffusion.w_black",
    "diffusion.channel_weights",
    "diffusion.s_min",
    "diffusion.max_ray_len",
    "output.dir",
    "output.debug_artifacts",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

impl PipelineConfig {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "model.path" => self.model_path = Some(PathBuf::from(v)),
            "seed.K" => self.seed.k = parse_num(key, v)?,
            "seed.th1" => self.seed.th1 = parse_num(key, v)?,
            "seed.th2" => self.seed.th2 = parse_num(key, v)?,
            "canny.sigma" => self.canny.sigma = parse_num(key, v)?,
            "canny.low" => self.canny.low = parse_num(key, v)?,
            "canny.high" => self.canny.high = parse_num(key, v)?,
            "otsu.k" => self.otsu_k = parse_num(key, v)?,
            "otsu.channels" => {
                self.otsu_channels = v
                    .split(',')
                    .map(|s| s.trim().parse::<ChannelId>())
                    .collect::<Result<_>>()?
            }
            "diffusion.w_gray" => self.diffusion.w_gray = parse_num(key, v)?,
            "diffusion.w_black" => self.diffusion.w_black = parse_num(key, v)?,
            "diffusion.channel_weights" => self.diffusion.channel_weights = parse_list(key, v)?,
            "diffusion.s_min" => self.diffusion.s_min = parse_num(key, v)?,
            "diffusion.max_ray_len" => self.diffusion.max_ray_len = parse_num(key, v)?,
            "output.dir" => self.output_dir = PathBuf::from(v),
            "output.debug_artifacts" => self.debug_artifacts = parse_bool(key, v)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {assignment:?}")))?;
        self.set(k, v)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.set_assignment(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = PipelineConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.seed.validate()?;
        self.canny.validate()?;
        if !(2..=4).contains(&self.otsu_k) {
            return Err(Error::ClassCountOutOfRange(self.otsu_k));
        }
        if self.otsu_channels.is_empty() {
            return Err(Error::Config("otsu.channels is empty".into()));
        }
        self.diffusion.validate(self.otsu_channels.len())
    }

    /// Renders every key, in the order of [`CONFIG_KEYS`].
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let channels = self
            .otsu_channels
            .iter()
            .map(|c| c.name())
            .collect::<Vec<_>>()
            .join(",");
        let values = [
            self.model_path
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            self.seed.k.to_string(),
            self.seed.th1.to_string(),
            self.seed.th2.to_string(),
            self.canny.sigma.to_string(),
            self.canny.low.to_string(),
            self.canny.high.to_string(),
            self.otsu_k.to_string(),
            channels,
            self.diffusion.w_gray.to_string(),
            self.diffusion.w_black.to_string(),
            join(&self.diffusion.channel_weights),
            self.diffusion.s_min.to_string(),
            self.diffusion.max_ray_len.to_string(),
            self.output_dir.display().to_string(),
            self.debug_artifacts.to_string(),
        ];
        CONFIG_KEYS
            .iter()
            .zip(values)
            .filter(|(k, v)| !(**k == "model.path" && v.is_empty()))
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}
