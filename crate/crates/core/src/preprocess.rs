//! Noise removal and contrast enhancement run on every frame before segmentation.
//!
//! The chain is a per-channel 3x3 median, histogram equalization of the HSI
//! intensity channel over 100 levels, then a small saturation boost.

use crate::color::{HsiPixel, RgbPixel};
use crate::image::Image;
use crate::scalar::Scalar;

/// Number of intensity levels used for equalization (step 0.01).
pub const INTENSITY_LEVELS: usize = 100;

pub const DEFAULT_SATURATION_FACTOR: f64 = 1.1;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("saturation factor must be >= 1, got {0}")]
    SaturationFactor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessConfig<T> {
    pub saturation_factor: T,
}

impl<T: Scalar> Default for PreprocessConfig<T> {
    fn default() -> Self {
        Self {
            saturation_factor: T::lit(DEFAULT_SATURATION_FACTOR),
        }
    }
}

/// Replaces each channel by the median of its 3x3 neighbourhood.
///
/// Channels are filtered independently. Out-of-frame neighbours are taken
/// from the nearest edge pixel.
pub fn median_filter_3x3<T: Scalar>(img: &Image<T>) -> Image<T> {
    let (w, h) = (img.width(), img.height());
    let src = img.pixels();
    let mut out = Vec::with_capacity(src.len());
    let mut rs = [T::zero(); 9];
    let mut gs = [T::zero(); 9];
    let mut bs = [T::zero(); 9];

    for y in 0..h {
        let rows = [y.saturating_sub(1), y, (y + 1).min(h - 1)];
        for x in 0..w {
            let cols = [x.saturating_sub(1), x, (x + 1).min(w - 1)];
            let mut k = 0;
            for &yy in &rows {
                let row = &src[yy * w..(yy + 1) * w];
                for &xx in &cols {
                    let p = row[xx];
                    rs[k] = p.r;
                    gs[k] = p.g;
                    bs[k] = p.b;
                    k += 1;
                }
            }
            out.push(RgbPixel::new(median9(&mut rs), median9(&mut gs), median9(&mut bs)));
        }
    }
    Image::new(w, h, out).expect("same shape as input")
}

#[inline]
fn median9<T: Scalar>(v: &mut [T; 9]) -> T {
    let (_, m, _) = v.select_nth_unstable_by(4, |a, b| a.partial_cmp(b).expect("NaN pixel"));
    *m
}

/// Level index of an intensity in `[0, 1]`; `1.0` falls into the last level.
#[inline]
pub fn intensity_level<T: Scalar>(i: T) -> usize {
    let k = (i * T::lit(INTENSITY_LEVELS as f64)).floor().to_f64_lossy();
    if k <= 0.0 {
        0
    } else {
        (k as usize).min(INTENSITY_LEVELS - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntensityHistogram {
    pub bins: [usize; INTENSITY_LEVELS],
    pub total: usize,
}

impl IntensityHistogram {
    pub fn from_intensities<T: Scalar>(values: impl IntoIterator<Item = T>) -> Self {
        let mut bins = [0usize; INTENSITY_LEVELS];
        let mut total = 0;
        for i in values {
            bins[intensity_level(i)] += 1;
            total += 1;
        }
        Self { bins, total }
    }

    /// `n_k / n` for every level.
    pub fn probabilities<T: Scalar>(&self) -> [T; INTENSITY_LEVELS] {
        let n = T::from_usize_lossy(self.total);
        let mut p = [T::zero(); INTENSITY_LEVELS];
        for (pk, &nk) in p.iter_mut().zip(&self.bins) {
            *pk = T::from_usize_lossy(nk) / n;
        }
        p
    }

    /// Cumulative map: level `k` goes to `sum_{j <= k} n_j / n`.
    pub fn cumulative<T: Scalar>(&self) -> [T; INTENSITY_LEVELS] {
        let n = T::from_usize_lossy(self.total);
        let mut out = [T::zero(); INTENSITY_LEVELS];
        let mut running = 0usize;
        for (ck, &nk) in out.iter_mut().zip(&self.bins) {
            running += nk;
            *ck = T::from_usize_lossy(running) / n;
        }
        out
    }
}

/// Equalized intensity of every pixel, before conversion back to RGB.
pub fn equalized_intensity_map<T: Scalar>(img: &Image<T>) -> Vec<T> {
    let hsi: Vec<HsiPixel<T>> = img.pixels().iter().map(|p| p.to_hsi()).collect();
    let hist = IntensityHistogram::from_intensities(hsi.iter().map(|p| p.i));
    let cdf = hist.cumulative::<T>();
    hsi.iter().map(|p| cdf[intensity_level(p.i)]).collect()
}

/// Histogram-equalizes the HSI intensity channel, leaving hue and saturation alone.
///
/// Where the equalized intensity is not displayable at the pixel's hue and
/// saturation, intensity is lowered to the gamut boundary instead of
/// clipping channels, so H and S survive unchanged.
pub fn equalize_intensity<T: Scalar>(img: &Image<T>) -> Image<T> {
    let hsi: Vec<HsiPixel<T>> = img.pixels().iter().map(|p| p.to_hsi()).collect();
    let hist = IntensityHistogram::from_intensities(hsi.iter().map(|p| p.i));
    let cdf = hist.cumulative::<T>();
    let pixels = hsi
        .into_iter()
        .map(|p| HsiPixel { i: cdf[intensity_level(p.i)], ..p }.to_rgb_in_gamut())
        .collect();
    Image::new(img.width(), img.height(), pixels).expect("same shape as input")
}

/// Multiplies saturation by `factor`, capped at 1.
pub fn boost_saturation<T: Scalar>(img: &Image<T>, factor: T) -> Result<Image<T>, PreprocessError> {
    if !(factor >= T::one()) {
        return Err(PreprocessError::SaturationFactor(factor.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(img.map(|p| {
        let hsi = p.to_hsi();
        HsiPixel {
            s: (hsi.s * factor).min(T::one()),
            ..hsi
        }
        .to_rgb_in_gamut()
    }))
}

/// Median filter, intensity equalization, then saturation boost.
pub fn preprocess<T: Scalar>(img: &Image<T>, cfg: &PreprocessConfig<T>) -> Result<Image<T>, PreprocessError> {
    let filtered = median_filter_3x3(img);
    let equalized = equalize_intensity(&filtered);
    boost_saturation(&equalized, cfg.saturation_factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(v: u8) -> RgbPixel<f64> {
        RgbPixel::from_rgb8([v, v, v])
    }

    #[test]
    fn median_of_constant_is_identity() {
        let img = Image::<f64>::filled(5, 4, RgbPixel::from_rgb8([10, 200, 37])).unwrap();
        assert_eq!(median_filter_3x3(&img), img);
    }

    #[test]
    fn median_removes_impulse() {
        let mut img = Image::<f64>::filled(7, 7, gray(128)).unwrap();
        img.set(3, 3, gray(255));
        let out = median_filter_3x3(&img);
        assert!(out.pixels().iter().all(|&p| p == gray(128)));
    }

    #[test]
    fn median_handles_corner_impulse() {
        // replicated border: the corner appears 4 times in its own window
        let mut img = Image::<f64>::filled(4, 4, gray(10)).unwrap();
        img.set(0, 0, gray(250));
        let out = median_filter_3x3(&img);
        assert_eq!(out.get(0, 0), gray(10));
    }

    #[test]
    fn one_pixel_image() {
        let img = Image::<f64>::filled(1, 1, gray(3)).unwrap();
        assert_eq!(median_filter_3x3(&img), img);
    }

    #[test]
    fn level_edges() {
        assert_eq!(intensity_level(0.0), 0);
        assert_eq!(intensity_level(0.0099), 0);
        assert_eq!(intensity_level(0.01), 1);
        assert_eq!(intensity_level(0.999), 99);
        assert_eq!(intensity_level(1.0), 99);
    }

    #[test]
    fn histogram_sums_to_total() {
        let h = IntensityHistogram::from_intensities([0.0f64, 0.5, 0.5, 1.0]);
        assert_eq!(h.bins.iter().sum::<usize>(), h.total);
        assert_eq!(h.bins[50], 2);
        assert_eq!(h.bins[99], 1);
        let p = h.probabilities::<f64>();
        assert_eq!(p[50], 0.5);
    }

    #[test]
    fn constant_image_equalizes_to_one() {
        let img = Image::<f64>::filled(6, 6, RgbPixel::from_rgb8([90, 60, 30])).unwrap();
        assert!(equalized_intensity_map(&img).iter().all(|&i| i == 1.0));
        let g = Image::<f64>::filled(3, 3, gray(77)).unwrap();
        let out = equalize_intensity(&g);
        assert!(out.pixels().iter().all(|p| p.to_rgb8() == [255, 255, 255]));
    }

    #[test]
    fn two_level_image() {
        // intensities 0.105 (level 10) and 0.805 (level 80)
        let lo = RgbPixel::new(0.105, 0.105, 0.105);
        let hi = RgbPixel::new(0.805, 0.805, 0.805);
        let pixels: Vec<_> = (0..16).map(|k| if k % 2 == 0 { lo } else { hi }).collect();
        let img = Image::new(4, 4, pixels).unwrap();
        let map = equalized_intensity_map(&img);
        for (k, &i) in map.iter().enumerate() {
            assert_eq!(i, if k % 2 == 0 { 0.5 } else { 1.0 });
        }
    }

    #[test]
    fn saturation_factor_checks() {
        let img = Image::<f64>::filled(2, 2, gray(100)).unwrap();
        assert!(matches!(boost_saturation(&img, 0.9f64), Err(PreprocessError::SaturationFactor(_))));
        let px = HsiPixel::new(30.0f64, 0.5, 0.4).to_rgb();
        let out = boost_saturation(&Image::<f64>::filled(1, 1, px).unwrap(), 1.1).unwrap();
        assert!((out.get(0, 0).to_hsi().s - 0.55).abs() < 1e-12);
        let full = HsiPixel::new(200.0f64, 1.0, 0.3).to_rgb();
        let out = boost_saturation(&Image::<f64>::filled(1, 1, full).unwrap(), 1.7).unwrap();
        assert!((out.get(0, 0).to_hsi().s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_factor_is_identity() {
        let px = RgbPixel::from_rgb8([200, 140, 20]);
        let img = Image::<f64>::filled(2, 3, px).unwrap();
        let out = boost_saturation(&img, 1.0).unwrap();
        for p in out.pixels() {
            assert!((p.r - px.r).abs() < 1e-12 && (p.g - px.g).abs() < 1e-12 && (p.b - px.b).abs() < 1e-12);
        }
    }

    #[test]
    fn preprocess_constant_image() {
        let img = Image::<f64>::filled(5, 5, gray(40)).unwrap();
        let out = preprocess(&img, &PreprocessConfig::default()).unwrap();
        assert_eq!((out.width(), out.height()), (5, 5));
        assert!(out.pixels().iter().all(|p| p.to_rgb8() == [255, 255, 255]));

        let hue_px = RgbPixel::from_rgb8([120, 80, 20]);
        let out = preprocess(&Image::<f64>::filled(4, 4, hue_px).unwrap(), &PreprocessConfig::default()).unwrap();
        let h_in = hue_px.to_hsi().h;
        for p in out.pixels() {
            assert!((p.to_hsi().h - h_in).abs() < 1e-9);
        }
    }
}
