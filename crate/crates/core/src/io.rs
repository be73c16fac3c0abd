//! PNG input and output for images, masks and debug planes.

use std::path::Path;

use image::{GrayImage, ImageBuffer, Rgb};

use crate::error::{Error, Result};
use crate::raster::{Grid, RgbImage, SkinMask};

fn image_err(path: &Path, source: image::ImageError) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads any supported raster as 8-bit RGB; alpha is dropped.
pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.into_rgb8();
    let (w, h) = img.dimensions();
    let px = img.pixels().map(|p| p.0).collect();
    Grid::from_vec(w as usize, h as usize, px)
}

pub fn write_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    let flat: Vec<u8> = img.as_slice().iter().flatten().copied().collect();
    let buf: ImageBuffer<Rgb<u8>, _> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, flat).expect("sized buffer");
    buf.save(path).map_err(|e| image_err(path, e))
}

pub fn write_gray(path: &Path, plane: &Grid<u8>) -> Result<()> {
    let buf = GrayImage::from_raw(
        plane.width() as u32,
        plane.height() as u32,
        plane.as_slice().to_vec(),
    )
    .expect("sized buffer");
    buf.save(path).map_err(|e| image_err(path, e))
}

/// Binary mask as 0 / 255 grayscale.
pub fn write_mask(path: &Path, mask: &SkinMask) -> Result<()> {
    write_gray(path, &mask.map(|&b| if b { 255 } else { 0 }))
}

/// Reads a mask; any nonzero luminance counts as set.
pub fn read_mask(path: &Path) -> Result<SkinMask> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.into_luma8();
    let (w, h) = img.dimensions();
    Grid::from_vec(w as usize, h as usize, img.pixels().map(|p| p.0[0] > 0).collect())
}

/// Mask blended in red over the input at 50% opacity.
pub fn overlay(img: &RgbImage, mask: &SkinMask) -> Result<RgbImage> {
    img.check_dims(mask)?;
    let px = img
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .map(|(&[r, g, b], &m)| {
            if m {
                [((r as u16 + 255) / 2) as u8, g / 2, b / 2]
            } else {
                [r, g, b]
            }
        })
        .collect();
    Grid::from_vec(img.width(), img.height(), px)
}
