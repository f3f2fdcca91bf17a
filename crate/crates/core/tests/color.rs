mod common;

use plateloc::{circular_hue_distance, hsi_to_rgb, rgb_to_hsi, HsiPixel, RgbPixel};
use proptest::prelude::*;
use rand::Rng;

/// Hue, saturation and intensity evaluated straight from the arccos formula.
fn direct_hsi(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let i = (r + g + b) / 3.0;
    let s = 1.0 - 3.0 / (r + g + b) * r.min(g).min(b);
    let theta = ((0.5 * ((r - g) + (r - b))) / ((r - g).powi(2) + (r - b) * (g - b)).sqrt())
        .clamp(-1.0, 1.0)
        .acos()
        .to_degrees();
    let h = if b <= g { theta } else { 360.0 - theta };
    (h, s, i)
}

#[test]
fn matches_direct_formula_on_both_branches() {
    let mut rng = common::rng(11);
    let (mut upper, mut lower) = (0, 0);
    for _ in 0..10_000 {
        let (r, g, b): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let hsi = rgb_to_hsi(RgbPixel::new(r, g, b));
        let (h, s, i) = direct_hsi(r, g, b);
        if b <= g {
            upper += 1;
        } else {
            lower += 1;
        }
        assert!(circular_hue_distance(hsi.h, h) <= 1e-9, "{r} {g} {b}: {} vs {h}", hsi.h);
        assert!((hsi.s - s).abs() <= 1e-9);
        assert!((hsi.i - i).abs() <= 1e-9);
    }
    assert!(upper > 4000 && lower > 4000);
}

#[test]
fn primaries_and_secondaries() {
    let cases = [
        ([1.0, 0.0, 0.0], 0.0),
        ([1.0, 1.0, 0.0], 60.0),
        ([0.0, 1.0, 0.0], 120.0),
        ([0.0, 1.0, 1.0], 180.0),
        ([0.0, 0.0, 1.0], 240.0),
        ([1.0, 0.0, 1.0], 300.0),
    ];
    for ([r, g, b], h) in cases {
        let (r, g, b): (f64, f64, f64) = (r, g, b);
        let hsi = rgb_to_hsi(RgbPixel::new(r, g, b));
        assert!(circular_hue_distance(hsi.h, h) < 1e-9, "{r} {g} {b} -> {}", hsi.h);
        assert!((hsi.s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn round_trip_with_nonzero_saturation() {
    let mut rng = common::rng(12);
    let mut checked = 0;
    while checked < 10_000 {
        let p = RgbPixel::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        let hsi = rgb_to_hsi(p);
        if hsi.s <= 1e-6 {
            continue;
        }
        let q = hsi_to_rgb(hsi);
        let err = (p.r - q.r).abs().max((p.g - q.g).abs()).max((p.b - q.b).abs());
        assert!(err <= 1e-6, "{p:?} -> {hsi:?} -> {q:?}");
        checked += 1;
    }
}

#[test]
fn f32_tracks_f64() {
    let mut rng = common::rng(13);
    for _ in 0..2000 {
        let bytes: [u8; 3] = rng.random();
        let a = RgbPixel::<f64>::from_rgb8(bytes).to_hsi();
        let b = RgbPixel::<f32>::from_rgb8(bytes).to_hsi();
        if a.s > 0.05 {
            assert!(circular_hue_distance(a.h, b.h as f64) < 0.05, "{bytes:?}");
        }
        assert!((a.s - b.s as f64).abs() < 1e-5);
        assert!((a.i - b.i as f64).abs() < 1e-6);
    }
}

proptest! {
    #[test]
    fn hsi_round_trip(h in 0.0f64..360.0, s in 0.01f64..=1.0, i in 0.01f64..=1.0) {
        let p = HsiPixel::new(h, s, i);
        let rgb = hsi_to_rgb(p);
        let back = rgb_to_hsi(rgb);
        prop_assert!(circular_hue_distance(back.h, h) < 1e-6, "{p:?} -> {rgb:?} -> {back:?}");
        prop_assert!((back.s - s).abs() < 1e-9);
        prop_assert!((back.i - i).abs() < 1e-9);
    }

    #[test]
    fn gamut_fit_keeps_hue_and_saturation(h in 0.0f64..360.0, s in 0.01f64..=1.0, i in 0.0f64..=1.0) {
        let fitted = HsiPixel::new(h, s, i).fit_to_gamut();
        prop_assert!(fitted.i <= i);
        let rgb = fitted.to_rgb();
        prop_assert!(rgb.channels().iter().all(|&c| (-1e-12..=1.0 + 1e-12).contains(&c)), "{rgb:?}");
        if fitted.i > 1e-6 {
            let back = rgb_to_hsi(rgb);
            prop_assert!(circular_hue_distance(back.h, h) < 1e-6);
            prop_assert!((back.s - s).abs() < 1e-9);
        }
    }

    #[test]
    fn outputs_stay_in_range(r in 0.0f64..=1.0, g in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let hsi = rgb_to_hsi(RgbPixel::new(r, g, b));
        prop_assert!(hsi.is_valid(), "{hsi:?}");
    }

    #[test]
    fn hue_distance_is_a_metric_on_the_circle(a in 0.0f64..360.0, b in 0.0f64..360.0, c in 0.0f64..360.0) {
        let d = circular_hue_distance::<f64>;
        prop_assert!(d(a, b) >= 0.0 && d(a, b) <= 180.0);
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
        prop_assert!(d(a, a + 360.0) < 1e-9);
    }
}
