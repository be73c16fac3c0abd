use std::ffi::{CStr, CString};
use std::ptr;

use skinseg_ffi::*;

fn last_error() -> String {
    let p = skinseg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn skin_model() -> *mut SkinsegModel {
    let ycc = skinseg::colorspace::rgb_to_ycbcr([200, 140, 110]);
    let mut model = ptr::null_mut();
    let st = unsafe { skinseg_model_train(ycc.as_ptr(), 1, &mut model) };
    assert_eq!(st, SkinsegStatus::Ok);
    model
}

#[test]
fn model_round_trips_through_json() {
    let model = skin_model();
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { skinseg_model_to_json(model, &mut json) }, SkinsegStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { skinseg_model_from_json(json, &mut back) }, SkinsegStatus::Ok);
    let mut class = 9;
    assert_eq!(
        unsafe { skinseg_model_classify_rgb(back, 200, 140, 110, &mut class) },
        SkinsegStatus::Ok
    );
    assert_eq!(class, 2);
    assert_eq!(
        unsafe { skinseg_model_classify_rgb(back, 20, 60, 200, &mut class) },
        SkinsegStatus::Ok
    );
    assert_eq!(class, 0);
    unsafe {
        skinseg_string_free(json);
        skinseg_model_free(back);
        skinseg_model_free(model);
    }
}

#[test]
fn malformed_model_reports_error() {
    let text = CString::new("{\"version\":\"nope\"}").unwrap();
    let mut model = ptr::null_mut();
    let st = unsafe { skinseg_model_from_json(text.as_ptr(), &mut model) };
    assert_eq!(st, SkinsegStatus::Model);
    assert!(model.is_null());
    assert!(!last_error().is_empty());

    let missing = CString::new("/nonexistent/model.json").unwrap();
    assert_eq!(unsafe { skinseg_model_load(missing.as_ptr(), &mut model) }, SkinsegStatus::Io);
    assert_eq!(
        unsafe { skinseg_model_from_json(ptr::null(), &mut model) },
        SkinsegStatus::NullPointer
    );
}

#[test]
fn config_rejects_bad_values_without_mutation() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { skinseg_config_new(&mut cfg) }, SkinsegStatus::Ok);
    let key = CString::new("otsu.k").unwrap();
    let bad = CString::new("9").unwrap();
    assert_eq!(unsafe { skinseg_config_set(cfg, key.as_ptr(), bad.as_ptr()) }, SkinsegStatus::Config);
    let unknown = CString::new("bogus.key").unwrap();
    let one = CString::new("1").unwrap();
    assert_eq!(
        unsafe { skinseg_config_set(cfg, unknown.as_ptr(), one.as_ptr()) },
        SkinsegStatus::Config
    );
    assert!(last_error().contains("bogus.key"));
    let good = CString::new("2").unwrap();
    assert_eq!(unsafe { skinseg_config_set(cfg, key.as_ptr(), good.as_ptr()) }, SkinsegStatus::Ok);
    assert!(skinseg_last_error().is_null());
    unsafe { skinseg_config_free(cfg) };

    let text = CString::new("seed.K=3\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { skinseg_config_from_text(text.as_ptr(), &mut cfg) }, SkinsegStatus::Ok);
    unsafe { skinseg_config_free(cfg) };
}

#[test]
fn segments_solid_skin_and_background() {
    let model = skin_model();
    let (w, h) = (12usize, 10usize);
    let mut rgb = Vec::with_capacity(w * h * 3);
    for _ in 0..h {
        for x in 0..w {
            rgb.extend_from_slice(if x < 6 { &[200, 140, 110] } else { &[20, 60, 200] });
        }
    }
    let mut mask = vec![7u8; w * h];
    let st = unsafe { skinseg_segment_rgb(model, ptr::null(), rgb.as_ptr(), w, h, mask.as_mut_ptr()) };
    assert_eq!(st, SkinsegStatus::Ok, "{}", last_error());
    for y in 0..h {
        for x in 0..w {
            assert_eq!(mask[y * w + x], (x < 6) as u8, "({x}, {y})");
        }
    }
    let st = unsafe { skinseg_segment_rgb(model, ptr::null(), rgb.as_ptr(), 0, h, mask.as_mut_ptr()) };
    assert_eq!(st, SkinsegStatus::InvalidArgument);
    unsafe { skinseg_model_free(model) };
}

#[test]
fn scalar_helpers() {
    let mut hist = [0u64; 256];
    hist[10] = 5;
    hist[200] = 5;
    let mut t = 0;
    assert_eq!(unsafe { skinseg_otsu_threshold(hist.as_ptr(), &mut t) }, SkinsegStatus::Ok);
    assert!((10..200).contains(&t));
    let empty = [0u64; 256];
    assert_eq!(unsafe { skinseg_otsu_threshold(empty.as_ptr(), &mut t) }, SkinsegStatus::InvalidArgument);

    assert!(skinseg_kovac_daylight(150, 80, 60));
    assert!(!skinseg_kovac_daylight(95, 80, 60));
    assert!(skinseg_kovac_flashlight(240, 230, 200));

    let m = skinseg_metrics(1, 1, 0, 1);
    assert_eq!(m, SkinsegMetrics { precision: 0.5, recall: 0.5, f_score: 0.5 });
    assert_eq!(skinseg_metrics(0, 0, 5, 0).f_score, 0.0);

    let v = unsafe { CStr::from_ptr(skinseg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/skinseg.h"))
        .expect("header generated by the build script");
    for name in [
        "skinseg_last_error", "skinseg_model_from_json", "skinseg_model_load", "skinseg_model_train",
        "skinseg_model_free", "skinseg_model_to_json", "skinseg_string_free",
        "skinseg_model_classify_rgb", "skinseg_config_new", "skinseg_config_from_text",
        "skinseg_config_free", "skinseg_config_set", "skinseg_segment_rgb", "skinseg_otsu_threshold",
        "skinseg_kovac_daylight", "skinseg_kovac_flashlight", "skinseg_metrics", "SKINSEG_STATUS_OK",
        "typedef struct SkinsegModel SkinsegModel",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
