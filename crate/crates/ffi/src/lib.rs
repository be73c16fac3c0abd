//! C ABI over the skinseg pipeline.
//!
//! Every fallible function returns a [`SkinsegStatus`]. On failure the
//! message is retrievable on the same thread with [`skinseg_last_error`].
//! Handles are opaque and must be released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use skinseg::colorspace::rgb_to_ycbcr;
use skinseg::evalkit::{self, Confusion};
use skinseg::otsuseg::{otsu_threshold, Histogram256};
use skinseg::pipeline::{load_model, segment_image};
use skinseg::skinmodel::TernaryClass;
use skinseg::{Error, PipelineConfig, RgbImage, SkinClusterModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkinsegStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Model = 5,
    Config = 6,
    Image = 7,
    Panic = 8,
}

/// Trained skin cluster model.
pub struct SkinsegModel(SkinClusterModel);

/// Pipeline parameters.
pub struct SkinsegConfig(PipelineConfig);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinsegMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(SkinsegStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => SkinsegStatus::Io,
            Error::Image { .. } | Error::InvalidImage(_) | Error::DimensionMismatch { .. } => {
                SkinsegStatus::Image
            }
            Error::ModelVersion { .. }
            | Error::ModelMalformed(_)
            | Error::ModelMissingPlane(_)
            | Error::EmptyTraining => SkinsegStatus::Model,
            Error::Config(_) => SkinsegStatus::Config,
            _ => SkinsegStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn fail(status: SkinsegStatus, msg: impl Into<String>) -> Fail {
    Fail(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SkinsegStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            SkinsegStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SkinsegStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| fail(SkinsegStatus::NullPointer, format!("{what} is null")))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(SkinsegStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SkinsegStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(fail(SkinsegStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null.
/// The pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn skinseg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn skinseg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a model from a JSON document.
#[no_mangle]
pub unsafe extern "C" fn skinseg_model_from_json(
    json: *const c_char,
    out: *mut *mut SkinsegModel,
) -> SkinsegStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let model = SkinClusterModel::from_json(text)?;
        write_out(out, Box::into_raw(Box::new(SkinsegModel(model))))
    })
}

/// Load a model from a JSON file.
#[no_mangle]
pub unsafe extern "C" fn skinseg_model_load(
    path: *const c_char,
    out: *mut *mut SkinsegModel,
) -> SkinsegStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let model = load_model(Path::new(path))?;
        write_out(out, Box::into_raw(Box::new(SkinsegModel(model))))
    })
}

/// Train a model from `count` packed YCbCr triplets with default parameters.
#[no_mangle]
pub unsafe extern "C" fn skinseg_model_train(
    ycbcr: *const u8,
    count: usize,
    out: *mut *mut SkinsegModel,
) -> SkinsegStatus {
    guard(|| {
        if ycbcr.is_null() {
            return Err(fail(SkinsegStatus::NullPointer, "ycbcr is null"));
        }
        let len = count
            .checked_mul(3)
            .ok_or_else(|| fail(SkinsegStatus::InvalidArgument, "count overflows"))?;
        let bytes = std::slice::from_raw_parts(ycbcr, len);
        let pixels: Vec<[u8; 3]> = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        let model = SkinClusterModel::train(&pixels, Default::default())?;
        write_out(out, Box::into_raw(Box::new(SkinsegModel(model))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn skinseg_model_free(model: *mut SkinsegModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Serialize a model to JSON. Free the result with `skinseg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn skinseg_model_to_json(
    model: *const SkinsegModel,
    out: *mut *mut c_char,
) -> SkinsegStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let s = CString::new(model.0.to_json()).expect("JSON has no nul bytes");
        write_out(out, s.into_raw())
    })
}

#[no_mangle]
pub unsafe extern "C" fn skinseg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Ternary class of an RGB pixel: 2 skin, 1 uncertain, 0 non-skin.
#[no_mangle]
pub unsafe extern "C" fn skinseg_model_classify_rgb(
    model: *const SkinsegModel,
    r: u8,
    g: u8,
    b: u8,
    out_class: *mut u8,
) -> SkinsegStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let class = match model.0.classify(rgb_to_ycbcr([r, g, b])) {
            TernaryClass::T1 => 2,
            TernaryClass::T2 => 1,
            TernaryClass::T3 => 0,
        };
        write_out(out_class, class)
    })
}

/// New configuration holding the defaults.
#[no_mangle]
pub unsafe extern "C" fn skinseg_config_new(out: *mut *mut SkinsegConfig) -> SkinsegStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(SkinsegConfig(PipelineConfig::default())))))
}

/// Parse `key=value` lines on top of the defaults.
#[no_mangle]
pub unsafe extern "C" fn skinseg_config_from_text(
    text: *const c_char,
    out: *mut *mut SkinsegConfig,
) -> SkinsegStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let cfg = PipelineConfig::from_text(text)?;
        write_out(out, Box::into_raw(Box::new(SkinsegConfig(cfg))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn skinseg_config_free(cfg: *mut SkinsegConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Set one dotted key. The config is left unchanged on failure.
#[no_mangle]
pub unsafe extern "C" fn skinseg_config_set(
    cfg: *mut SkinsegConfig,
    key: *const c_char,
    value: *const c_char,
) -> SkinsegStatus {
    guard(|| {
        let cfg = cfg
            .as_mut()
            .ok_or_else(|| fail(SkinsegStatus::NullPointer, "cfg is null"))?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        let mut next = cfg.0.clone();
        next.set(key, value)
            .and_then(|()| next.validate())
            .map_err(|e| fail(SkinsegStatus::Config, e.to_string()))?;
        cfg.0 = next;
        Ok(())
    })
}

/// Segment a packed RGB buffer of `width * height * 3` bytes.
///
/// `out_mask` receives `width * height` bytes, 1 for skin and 0 otherwise.
/// A null `cfg` selects the defaults.
#[no_mangle]
pub unsafe extern "C" fn skinseg_segment_rgb(
    model: *const SkinsegModel,
    cfg: *const SkinsegConfig,
    rgb: *const u8,
    width: usize,
    height: usize,
    out_mask: *mut u8,
) -> SkinsegStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        if rgb.is_null() || out_mask.is_null() {
            return Err(fail(SkinsegStatus::NullPointer, "pixel buffer is null"));
        }
        let n = width
            .checked_mul(height)
            .filter(|&n| n > 0 && n.checked_mul(3).is_some())
            .ok_or_else(|| {
                fail(SkinsegStatus::InvalidArgument, format!("bad dimensions {width}x{height}"))
            })?;
        let bytes = std::slice::from_raw_parts(rgb, n * 3);
        let pixels = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        let img = RgbImage::from_vec(width, height, pixels)?;
        let default_cfg;
        let cfg = match cfg.as_ref() {
            Some(c) => &c.0,
            None => {
                default_cfg = PipelineConfig::default();
                &default_cfg
            }
        };
        let seg = segment_image(&img, &model.0, cfg)?;
        let out = std::slice::from_raw_parts_mut(out_mask, n);
        for (o, &m) in out.iter_mut().zip(seg.mask.as_slice()) {
            *o = m as u8;
        }
        Ok(())
    })
}

/// Binary Otsu threshold of a 256-bin histogram.
#[no_mangle]
pub unsafe extern "C" fn skinseg_otsu_threshold(
    histogram: *const u64,
    out_threshold: *mut u8,
) -> SkinsegStatus {
    guard(|| {
        if histogram.is_null() {
            return Err(fail(SkinsegStatus::NullPointer, "histogram is null"));
        }
        let mut bins = [0u64; 256];
        bins.copy_from_slice(std::slice::from_raw_parts(histogram, 256));
        let t = otsu_threshold(&Histogram256::from_counts(bins))?;
        write_out(out_threshold, t.threshold)
    })
}

#[no_mangle]
pub extern "C" fn skinseg_kovac_daylight(r: u8, g: u8, b: u8) -> bool {
    evalkit::kovac_daylight([r, g, b])
}

#[no_mangle]
pub extern "C" fn skinseg_kovac_flashlight(r: u8, g: u8, b: u8) -> bool {
    evalkit::kovac_flashlight([r, g, b])
}

/// Precision, recall and F-score of a confusion count.
#[no_mangle]
pub extern "C" fn skinseg_metrics(tp: u64, fp: u64, tn: u64, fn_: u64) -> SkinsegMetrics {
    let m = evalkit::metrics(&Confusion { tp, fp, tn, fn_ });
    SkinsegMetrics {
        precision: m.precision,
        recall: m.recall,
        f_score: m.f_score,
    }
}
