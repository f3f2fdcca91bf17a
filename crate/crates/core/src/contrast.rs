//! Average horizontal contrast density of candidate boxes.
//!
//! For each horizontally adjacent pair of plate-labelled pixels inside a box,
//! the per-channel absolute differences are summed on the 0-255 scale. Pairs
//! whose sum exceeds `c_th` are prominent edges and are accumulated. The total
//! is divided by `(x_max - x_min) * (y_max - y_min)`.
//!
//! `c_th` is expressed in 8-bit units (a sum of three channel differences, so
//! at most 765).

use crate::image::Image;
use crate::scalar::Scalar;
use crate::segment::{LabelMap, PixelBox};

pub const DEFAULT_C_TH: f64 = 100.0;

#[derive(Debug, thiserror::Error, Clone, Copy, PartialEq, Eq)]
pub enum ContrastError {
    #[error("box {0:?} has zero width or height extent; contrast density is undefined")]
    DegenerateBox(PixelBox),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxScore<T> {
    pub avg_contrast: T,
    /// The box had zero extent and was scored 0 instead of failing the batch.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastReport<T> {
    /// One score per input box, same order.
    pub scores: Vec<BoxScore<T>>,
    pub max_contrast: T,
}

#[inline]
fn to_8bit<T: Scalar>(c: T) -> T {
    c * T::lit(255.0)
}

/// Area term of the density: `(x_max - x_min) * (y_max - y_min)`.
pub fn contrast_box_area(b: &PixelBox) -> usize {
    (b.x_max - b.x_min) * (b.y_max - b.y_min)
}

/// Thresholded horizontal contrast accumulated over `b`, divided by
/// [`contrast_box_area`].
pub fn box_avg_contrast<T: Scalar>(img: &Image<T>, labels: &LabelMap, b: &PixelBox, c_th: T) -> Result<T, ContrastError> {
    assert_eq!((img.width(), img.height()), (labels.width(), labels.height()), "label map does not match image");
    assert!(b.fits(img.width(), img.height()), "box {b:?} outside image");
    if b.x_max == b.x_min || b.y_max == b.y_min {
        return Err(ContrastError::DegenerateBox(*b));
    }

    let mut contrast = T::zero();
    for x in b.x_min..b.x_max {
        for y in b.y_min..=b.y_max {
            if !labels.is_plate(x, y) || !labels.is_plate(x + 1, y) {
                continue;
            }
            let p1 = img.get(x, y);
            let p2 = img.get(x + 1, y);
            let d_r = (to_8bit(p1.r) - to_8bit(p2.r)).abs();
            let d_g = (to_8bit(p1.g) - to_8bit(p2.g)).abs();
            let d_b = (to_8bit(p1.b) - to_8bit(p2.b)).abs();
            let sum = d_r + d_g + d_b;
            if sum > c_th {
                contrast += sum;
            }
        }
    }
    Ok(contrast / T::from_usize_lossy(contrast_box_area(b)))
}

/// Scores every box and tracks the running maximum.
pub fn score_boxes<T: Scalar>(img: &Image<T>, labels: &LabelMap, boxes: &[PixelBox], c_th: T) -> ContrastReport<T> {
    let mut max_contrast = T::zero();
    let scores = boxes
        .iter()
        .map(|b| {
            let score = match box_avg_contrast(img, labels, b, c_th) {
                Ok(avg_contrast) => BoxScore {
                    avg_contrast,
                    degenerate: false,
                },
                Err(ContrastError::DegenerateBox(_)) => BoxScore {
                    avg_contrast: T::zero(),
                    degenerate: true,
                },
            };
            if score.avg_contrast > max_contrast {
                max_contrast = score.avg_contrast;
            }
            score
        })
        .collect();
    ContrastReport { scores, max_contrast }
}
