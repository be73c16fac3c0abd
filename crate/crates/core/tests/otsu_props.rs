mod common;

use proptest::prelude::*;

use common::{oracle_otsu, oracle_otsu_pair};
use skinseg::colorspace::{extract_plane, ChannelId};
use skinseg::otsuseg::{otsu_multilevel, otsu_threshold, segment_channels, Histogram256};
use skinseg::RgbImage;

fn histogram_strategy() -> impl Strategy<Value = [u64; 256]> {
    prop_oneof![
        prop::collection::vec(0u64..500, 256),
        prop::collection::vec((0usize..256, 1u64..100), 2..6).prop_map(|spikes| {
            let mut v = vec![0u64; 256];
            for (i, c) in spikes {
                v[i] += c;
            }
            v
        }),
    ]
    .prop_map(|v| v.try_into().unwrap())
    .prop_filter("two occupied bins", |b: &[u64; 256]| {
        b.iter().filter(|&&c| c > 0).count() >= 2
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn binary_matches_reference_and_scales(bins in histogram_strategy(), scale in 1u64..6) {
        let t = otsu_threshold(&Histogram256::from_counts(bins)).unwrap();
        prop_assert_eq!(t.threshold, oracle_otsu(&bins));
        let scaled = bins.map(|c| c * scale);
        prop_assert_eq!(otsu_threshold(&Histogram256::from_counts(scaled)).unwrap(), t);
        let two = otsu_multilevel(&Histogram256::from_counts(bins), 2).unwrap();
        prop_assert_eq!(two.thresholds, vec![t.threshold]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn three_class_matches_reference_and_scales(bins in histogram_strategy(), scale in 2u64..5) {
        let h = Histogram256::from_counts(bins);
        let got = otsu_multilevel(&h, 3).unwrap();
        let want = oracle_otsu_pair(&bins);
        prop_assert_eq!(got.thresholds.as_slice(), want.as_slice());
        let scaled = otsu_multilevel(&Histogram256::from_counts(bins.map(|c| c * scale)), 3).unwrap();
        prop_assert_eq!(scaled, got);
    }
}

#[test]
fn three_spikes_separate_perfectly() {
    let mut bins = [0u64; 256];
    for v in [0, 128, 255] {
        bins[v] = 10;
    }
    let got = otsu_multilevel(&Histogram256::from_counts(bins), 3).unwrap();
    assert_eq!(got.thresholds, vec![0, 128]);
}

#[test]
fn labels_are_ordinal_and_match_reference_thresholds() {
    let (img, _) = common::skin_scene(31, 48, 30);
    let channels = ChannelId::DIFFUSION_DEFAULT;
    let maps = segment_channels(&img, &channels, 3).unwrap();
    for (c, &ch) in channels.iter().enumerate() {
        let plane = extract_plane(&img, ch);
        let h = skinseg::otsuseg::histogram(&plane);
        let th = &maps.thresholds()[c].thresholds;
        if !maps.thresholds()[c].degenerate {
            assert_eq!(th.as_slice(), oracle_otsu_pair(h.bins()).as_slice(), "{ch}");
        }
        let labels = maps.map(c);
        for (&v, &l) in plane.as_slice().iter().zip(labels.as_slice()) {
            for (i, &t) in th.iter().enumerate() {
                assert_eq!(v <= t, l as usize <= i, "{ch}: value {v} label {l}");
            }
        }
    }
}

#[test]
fn two_tone_luma_partitions_by_tone() {
    let img = RgbImage::from_fn(10, 6, |x, _| if x < 4 { [10, 10, 10] } else { [200, 200, 200] });
    let maps = segment_channels(&img, &[ChannelId::Y], 2).unwrap();
    let labels = maps.map(0);
    for y in 0..6 {
        for x in 0..10 {
            assert_eq!(*labels.get(x, y), (x >= 4) as u8);
        }
    }
}

#[test]
fn uniform_image_labels_zero() {
    for rgb in [[0u8, 0, 0], [255, 255, 255], [90, 30, 200]] {
        let img = RgbImage::filled(5, 5, rgb);
        for k in 2..=4 {
            let maps = segment_channels(&img, &ChannelId::ALL, k).unwrap();
            for c in 0..ChannelId::ALL.len() {
                assert!(maps.map(c).as_slice().iter().all(|&l| l == 0));
                assert!(maps.thresholds()[c].degenerate);
            }
        }
    }
}
