mod common;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use skinseg::diffusion::{
    diffuse, diffuse_stage, diffusion_score, ray_pixels, DiffusionConfig, Stage, RAY_ANGLES,
};
use skinseg::seedgen::{BLACK, GRAY};
use skinseg::Grid;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rays_match_reference(
        w in 1usize..40, h in 1usize..40,
        fx in 0.0f64..1.0, fy in 0.0f64..1.0,
        max_len in prop_oneof![Just(0usize), 1usize..20],
    ) {
        let origin = (((w as f64) * fx) as usize, ((h as f64) * fy) as usize);
        for &a in &RAY_ANGLES {
            let got = ray_pixels(origin, a, (w, h), max_len);
            prop_assert_eq!(&got, &oracle_ray(origin, a, (w, h), max_len));
            // 8-connected, one step per pixel, never revisiting the origin.
            let mut prev = origin;
            for &p in &got {
                let (dx, dy) = (p.0.abs_diff(prev.0), p.1.abs_diff(prev.1));
                prop_assert!(dx <= 1 && dy <= 1 && dx + dy > 0);
                prev = p;
            }
        }
    }

    #[test]
    fn gray_scores_at_least_black(
        master in prop::collection::vec(0u8..3, 7),
        utp in prop::collection::vec(0u8..3, 7),
        w_black in 0.0f64..3.0,
        extra in 0.0f64..3.0,
    ) {
        let cfg = DiffusionConfig { w_black, w_gray: w_black + extra, ..DiffusionConfig::default() };
        let g = diffusion_score(GRAY, &master, &utp, 3, &cfg).unwrap();
        let b = diffusion_score(BLACK, &master, &utp, 3, &cfg).unwrap();
        prop_assert!(g >= b);
        // Direct term-by-term evaluation.
        let mut want = cfg.w_gray;
        for c in 0..7 {
            let d = (master[c] as f64 - utp[c] as f64).abs();
            want += cfg.channel_weights[c] * (1.0 - d / 2.0).max(0.0);
        }
        prop_assert!((g - want).abs() < 1e-12);
    }
}

#[test]
fn rays_stay_near_the_ideal_line() {
    for &a in &RAY_ANGLES {
        let (s, c) = (a as f64).to_radians().sin_cos();
        for (x, y) in ray_pixels((50, 50), a, (101, 101), 0) {
            let (dx, dy) = (x as f64 - 50.0, 50.0 - y as f64);
            // Perpendicular distance to the ray's supporting line.
            let off = (dx * s - dy * c).abs();
            assert!(off <= 0.5 * std::f64::consts::SQRT_2 + 1e-9, "angle {a}: ({x},{y}) off by {off}");
            assert!(dx * c + dy * s > 0.0, "angle {a}: ({x},{y}) behind origin");
        }
    }
}

#[test]
fn single_seed_on_uniform_field_matches_reference() {
    let n = 64;
    let case = DiffusionCase {
        width: 8,
        height: 8,
        ternary: vec![GRAY; n],
        labels: vec![vec![1; n]; 7],
        k: 3,
        edges: vec![false; n],
        seed: (0..n).map(|i| i == 3 * 8 + 3).collect(),
    };
    let cfg = DiffusionConfig::default();
    let (t, classes, edges, seed) =
        (case.ternary_image(), case.classes(), case.edge_map(), case.seed_mask());
    let one = diffuse_stage(&seed, &t, &classes, &edges, &cfg, Stage::One).unwrap();
    assert_eq!(one.as_slice(), oracle_stage_one(&case, &cfg).as_slice());
    let full = diffuse(&seed, &t, &classes, &edges, &cfg).unwrap();
    assert_eq!(full.count_true(), n);
}

#[test]
fn random_instances_match_reference_with_varied_weights() {
    let mut r = rng(21);
    for _ in 0..60 {
        let (w, h) = (r.gen_range(3..24), r.gen_range(3..24));
        let case = random_case(&mut r, w, h);
        let cfg = DiffusionConfig {
            w_gray: r.gen_range(0.0..3.0),
            w_black: r.gen_range(0.0..3.0),
            channel_weights: (0..7).map(|_| r.gen_range(0.0..2.5)).collect(),
            s_min: r.gen_range(3.0..10.0),
            max_ray_len: r.gen_range(0..8),
        };
        let (t, classes, edges, seed) =
            (case.ternary_image(), case.classes(), case.edge_map(), case.seed_mask());
        let one = diffuse_stage(&seed, &t, &classes, &edges, &cfg, Stage::One).unwrap();
        assert_eq!(one.as_slice(), oracle_stage_one(&case, &cfg).as_slice());
        let two = diffuse_stage(&seed, &t, &classes, &edges, &cfg, Stage::Two).unwrap();
        assert_eq!(two.as_slice(), oracle_stage_two(&case, &cfg, &case.seed, &case.seed).as_slice());
    }
}

#[test]
fn output_independent_of_thread_count() {
    let mut r = rng(22);
    let case = random_case(&mut r, 64, 48);
    let cfg = DiffusionConfig::default();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            diffuse(
                &case.seed_mask(),
                &case.ternary_image(),
                &case.classes(),
                &case.edge_map(),
                &cfg,
            )
            .unwrap()
        })
    };
    let single = run(1);
    for threads in [2, 4, 8] {
        assert_eq!(run(threads), single);
    }
}

/// Second stage where rays pass over pixels accepted earlier in the same
/// pass (the working mask) instead of only the origin snapshot.
fn live_mask_stage_two(case: &DiffusionCase, cfg: &DiffusionConfig, working: &[bool], origins: &[bool]) -> Vec<bool> {
    let (w, h) = (case.width, case.height);
    let mut mask = working.to_vec();
    for o in (0..w * h).filter(|&o| origins[o]) {
        for a in (0..360).step_by(10) {
            for (x, y) in oracle_ray((o % w, o / w), a, (w, h), cfg.max_ray_len) {
                let q = y * w + x;
                if mask[q] {
                    continue;
                }
                if case.edges[q] {
                    break;
                }
                let mut s = if case.ternary[q] == 0 { cfg.w_black } else { cfg.w_gray };
                for (c, wt) in cfg.channel_weights.iter().enumerate() {
                    let d = (case.labels[c][o] as f64 - case.labels[c][q] as f64).abs();
                    s += wt * (1.0 - d / 2.0).max(0.0);
                }
                if s >= cfg.s_min {
                    mask[q] = true;
                } else {
                    break;
                }
            }
        }
    }
    mask
}

#[test]
fn live_mask_second_stage_is_not_idempotent() {
    // Rays that pass over pixels accepted by other origins reach further on
    // a second application, so that variant cannot be idempotent.
    let mut r = rng(23);
    let cfg = DiffusionConfig::default();
    let mut found = false;
    for _ in 0..200 {
        let case = random_case(&mut r, 32, 32);
        let once = live_mask_stage_two(&case, &cfg, &case.seed, &case.seed);
        let twice = live_mask_stage_two(&case, &cfg, &once, &case.seed);
        if once != twice {
            found = true;
            break;
        }
    }
    assert!(found);
}

#[test]
fn edge_only_seed_still_casts_rays() {
    let n = 25;
    let mut edges = vec![false; n];
    edges[12] = true;
    let case = DiffusionCase {
        width: 5,
        height: 5,
        ternary: vec![GRAY; n],
        labels: vec![vec![0; n]; 7],
        k: 3,
        edges,
        seed: (0..n).map(|i| i == 12).collect(),
    };
    let out = diffuse(
        &case.seed_mask(),
        &case.ternary_image(),
        &case.classes(),
        &case.edge_map(),
        &DiffusionConfig::default(),
    )
    .unwrap();
    assert!(*out.get(2, 2));
    assert_eq!(out, Grid::filled(5, 5, true));
}
