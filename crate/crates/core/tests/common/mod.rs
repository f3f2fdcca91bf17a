#![allow(dead_code)]

use plateloc::{Image, Label, LabelMap, RgbPixel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image<f64> {
    let pixels = (0..w * h)
        .map(|_| RgbPixel::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    Image::new(w, h, pixels).unwrap()
}

pub fn random_image8(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image<f64> {
    let bytes: Vec<u8> = (0..w * h * 3).map(|_| rng.random()).collect();
    Image::from_rgb8(w, h, &bytes).unwrap()
}

pub fn random_labels(rng: &mut ChaCha8Rng, w: usize, h: usize, p: f64) -> LabelMap {
    let labels = (0..w * h)
        .map(|_| if rng.random_bool(p) { Label::Plate } else { Label::NonPlate })
        .collect();
    LabelMap::new(w, h, labels)
}
