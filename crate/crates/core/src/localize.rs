//! B3 selection from scored B2 candidates, and the end-to-end pipeline.

use crate::cluster::merge_overlapping_boxes;
use crate::contrast::{score_boxes, DEFAULT_C_TH};
use crate::image::Image;
use crate::preprocess::{preprocess, PreprocessConfig, PreprocessError};
use crate::scalar::Scalar;
use crate::segment::{classify_pixels, connected_components, LabelMap, PixelBox, Tier, DEFAULT_MIN_COMPONENT_SIZE};
use crate::stats::SeedConfig;

/// Smallest frame the 3x3 median window is defined on.
pub const MIN_IMAGE_SIDE: usize = 3;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LocalizeError {
    #[error("image is {width}x{height}; both sides must be at least {MIN_IMAGE_SIDE}")]
    ImageTooSmall { width: usize, height: usize },
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
}

/// Plate selection thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds<T> {
    /// Minimum 8-bit channel-difference sum for a pixel pair to count as an edge.
    pub c_th: T,
    pub min_area_px: usize,
    pub aspect_min: T,
    pub aspect_max: T,
    /// Relative contrast band: keep boxes with at least `(1 - c_diff)` of the
    /// best box's average contrast.
    pub c_diff: T,
    pub max_fractional_area: T,
}

impl<T: Scalar> Default for Thresholds<T> {
    fn default() -> Self {
        Self {
            c_th: T::lit(DEFAULT_C_TH),
            min_area_px: 2000,
            aspect_min: T::lit(1.2),
            aspect_max: T::lit(10.0),
            c_diff: T::lit(0.2),
            max_fractional_area: T::lit(0.3),
        }
    }
}

impl<T: Scalar> Thresholds<T> {
    pub fn validate(&self) -> Result<(), LocalizeError> {
        let bad = |m: &str| Err(LocalizeError::InvalidThresholds(m.to_string()));
        if !(self.aspect_min < self.aspect_max) {
            return bad("aspect_min must be below aspect_max");
        }
        if !(self.c_diff >= T::zero() && self.c_diff <= T::one()) {
            return bad("c_diff must lie in [0, 1]");
        }
        if self.min_area_px == 0 {
            return bad("min_area_px must be positive");
        }
        if !(self.c_th >= T::zero()) {
            return bad("c_th must be non-negative");
        }
        if !(self.max_fractional_area > T::zero()) {
            return bad("max_fractional_area must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateFeatures<T> {
    /// Inclusive width over inclusive height.
    pub aspect_ratio: T,
    /// Inclusive pixel count of the box.
    pub area_px: usize,
    pub fractional_area: T,
    pub avg_contrast: T,
}

impl<T: Scalar> CandidateFeatures<T> {
    pub fn of_box(b: &PixelBox, avg_contrast: T, image_width: usize, image_height: usize) -> Self {
        let area_px = b.area();
        Self {
            aspect_ratio: T::from_usize_lossy(b.width()) / T::from_usize_lossy(b.height()),
            area_px,
            fractional_area: T::from_usize_lossy(area_px) / T::from_usize_lossy(image_width * image_height),
            avg_contrast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<T> {
    pub bbox: PixelBox,
    pub features: CandidateFeatures<T>,
}

/// Whether one candidate passes every plate predicate.
pub fn is_plate<T: Scalar>(f: &CandidateFeatures<T>, th: &Thresholds<T>, max_contrast: T) -> bool {
    f.area_px >= th.min_area_px
        && f.aspect_ratio >= th.aspect_min
        && f.aspect_ratio <= th.aspect_max
        && f.fractional_area <= th.max_fractional_area
        && f.avg_contrast >= (T::one() - th.c_diff) * max_contrast
}

/// Candidates accepted as plates, highest contrast first, tagged B3.
pub fn select_plate_boxes<T: Scalar>(candidates: &[Candidate<T>], th: &Thresholds<T>, max_contrast: T) -> Vec<Candidate<T>> {
    let mut out: Vec<Candidate<T>> = candidates
        .iter()
        .filter(|c| is_plate(&c.features, th, max_contrast))
        .map(|c| Candidate {
            bbox: c.bbox.with_tier(Tier::B3),
            features: c.features,
        })
        .collect();
    out.sort_by(|a, b| {
        b.features
            .avg_contrast
            .partial_cmp(&a.features.avg_contrast)
            .expect("finite contrast")
            .then_with(|| a.bbox.raster_key().cmp(&b.bbox.raster_key()))
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig<T> {
    pub preprocess: PreprocessConfig<T>,
    pub min_component_size: usize,
    pub thresholds: Thresholds<T>,
}

impl<T: Scalar> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            preprocess: PreprocessConfig::default(),
            min_component_size: DEFAULT_MIN_COMPONENT_SIZE,
            thresholds: Thresholds::default(),
        }
    }
}

/// All three localization levels for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationResult<T> {
    pub width: usize,
    pub height: usize,
    pub b1: Vec<PixelBox>,
    /// B2 boxes in `(y_min, x_min)` order with their features.
    pub b2: Vec<Candidate<T>>,
    /// Accepted plates, highest contrast first.
    pub b3: Vec<Candidate<T>>,
    pub max_contrast: T,
}

/// Intermediate products of [`localize_plates`], kept for inspection.
#[derive(Debug, Clone)]
pub struct PipelineTrace<T> {
    pub preprocessed: Image<T>,
    pub labels: LabelMap,
    pub result: LocalizationResult<T>,
}

pub fn localize_plates<T: Scalar>(
    img: &Image<T>,
    seeds: &SeedConfig<T>,
    cfg: &PipelineConfig<T>,
) -> Result<LocalizationResult<T>, LocalizeError> {
    localize_plates_traced(img, seeds, cfg).map(|t| t.result)
}

/// Runs preprocess, segmentation, B1 extraction, B2 merging, contrast scoring
/// and B3 selection.
pub fn localize_plates_traced<T: Scalar>(
    img: &Image<T>,
    seeds: &SeedConfig<T>,
    cfg: &PipelineConfig<T>,
) -> Result<PipelineTrace<T>, LocalizeError> {
    let (width, height) = (img.width(), img.height());
    if width < MIN_IMAGE_SIDE || height < MIN_IMAGE_SIDE {
        return Err(LocalizeError::ImageTooSmall { width, height });
    }
    let th = &cfg.thresholds;
    th.validate()?;

    let preprocessed = preprocess(img, &cfg.preprocess)?;
    let labels = classify_pixels(&preprocessed, seeds);
    let b1: Vec<PixelBox> = connected_components(&labels, cfg.min_component_size)
        .into_iter()
        .map(|c| c.bbox)
        .collect();
    let b2_boxes = merge_overlapping_boxes(&b1);
    let report = score_boxes(&preprocessed, &labels, &b2_boxes, th.c_th);

    let b2: Vec<Candidate<T>> = b2_boxes
        .iter()
        .zip(&report.scores)
        .map(|(b, s)| Candidate {
            bbox: *b,
            features: CandidateFeatures::of_box(b, s.avg_contrast, width, height),
        })
        .collect();
    // A frame with no prominent edge anywhere has no plate; the relative band
    // alone would accept every flat box when the maximum is zero.
    let b3 = if report.max_contrast > T::zero() {
        select_plate_boxes(&b2, th, report.max_contrast)
    } else {
        Vec::new()
    };

    Ok(PipelineTrace {
        preprocessed,
        labels,
        result: LocalizationResult {
            width,
            height,
            b1,
            b2,
            b3,
            max_contrast: report.max_contrast,
        },
    })
}
