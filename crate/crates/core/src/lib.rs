//! License plate localization for yellow-background commercial plates.
//!
//! The pipeline runs per image:
//!
//! 1. [`preprocess`]: 3x3 median filter, HSI intensity equalization, saturation boost.
//! 2. [`segment`]: label pixels whose hue and saturation fall within the seed
//!    tolerances, then take 8-connected components and their bounding boxes (B1).
//! 3. [`cluster`]: merge overlapping B1 boxes into candidate regions (B2).
//! 4. [`contrast`]: score each B2 box by thresholded horizontal contrast density.
//! 5. [`localize`]: keep B2 boxes whose aspect ratio, area, fractional area and
//!    contrast pass the thresholds (B3).
//!
//! Seeds come from a corpus of cropped plates via [`stats`]. [`eval`] and
//! [`synth`] provide image-level scoring and a synthetic scene generator.
//!
//! All pixel math is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.
//!
//! ```
//! use plateloc::{synth, localize_plates, PipelineConfig, SceneParams, SeedConfig};
//!
//! let scene = synth::synth_generate::<f64>(1, &SceneParams::noiseless()).unwrap();
//! let (h, s) = synth::rgb8_hue_saturation(scene.plates[0].background);
//! let seeds = SeedConfig::from_hue_saturation(h, 4.0, s * 1.1, 0.06);
//! let result = localize_plates(&scene.image, &seeds, &PipelineConfig::default()).unwrap();
//! assert_eq!(result.b3.len(), 1);
//! ```

pub mod cluster;
pub mod color;
pub mod contrast;
pub mod eval;
pub mod image;
pub mod localize;
pub mod preprocess;
pub mod scalar;
pub mod segment;
pub mod stats;
pub mod synth;

pub use cluster::merge_overlapping_boxes;
pub use color::{circular_hue_distance, hsi_to_rgb, rgb_to_hsi, HsiPixel, RgbPixel};
pub use contrast::{box_avg_contrast, score_boxes, BoxScore, ContrastError, ContrastReport};
pub use eval::{classify_image, compute_metrics, iou, GroundTruth, ImageClass, Metrics};
pub use image::{Image, ImageError};
pub use localize::{
    localize_plates, select_plate_boxes, Candidate, CandidateFeatures, LocalizationResult, LocalizeError,
    PipelineConfig, Thresholds,
};
pub use preprocess::{boost_saturation, equalize_intensity, median_filter_3x3, preprocess, PreprocessConfig};
pub use scalar::Scalar;
pub use segment::{classify_pixels, connected_components, label_components, Component, ComponentMap, Label, LabelMap, PixelBox, Tier};
pub use stats::{derive_seed_config, Channel, ChannelSeed, ChannelStats, PeakError, PeakPair, SeedConfig, StatsError};
pub use synth::{synth_generate, Scene, SceneParams, SynthError};

pub type Rgb = RgbPixel<f64>;
pub type Hsi = HsiPixel<f64>;
pub type RgbImage = Image<f64>;
pub type RgbImageF32 = Image<f32>;
pub type Seeds = SeedConfig<f64>;
pub type Config = PipelineConfig<f64>;
pub type Localization = LocalizationResult<f64>;
