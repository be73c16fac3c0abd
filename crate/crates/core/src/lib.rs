//! Skin segmentation by seeded ray diffusion over fused Otsu class maps.
//!
//! The pipeline: classify pixels into a ternary image with a trained
//! nested-polygon chrominance model, refine it by neighbourhood voting,
//! take white pixels as seeds, and diffuse them along 36 rays per origin
//! using Otsu class agreement, stopping at Canny edges.

pub mod colorspace;
pub mod config;
pub mod diffusion;
pub mod edgemap;
pub mod evalkit;
pub mod error;
pub mod io;
pub mod otsuseg;
pub mod pipeline;
pub mod raster;
pub mod seedgen;
pub mod skinmodel;

pub use error::{Error, Result};
pub use raster::{EdgeMap, Grid, RgbImage, ScalarPlane, SkinMask};
pub use config::PipelineConfig;
pub use skinmodel::SkinClusterModel;
