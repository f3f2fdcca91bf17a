//! Ground truth matching and image-level TP / FP / FN accounting.
//!
//! An image is a true positive when every true plate is matched one-to-one by
//! a predicted box and nothing else was predicted, a false positive when all
//! plates are found but extra regions were reported too, and a false negative
//! when any plate is missed or badly localized.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;

use crate::segment::{PixelBox, Tier};

pub const DEFAULT_IOU_MIN: f64 = 0.5;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no outcomes to summarize")]
    Empty,
    #[error("iou threshold must lie in (0, 1], got {0}")]
    IouThreshold(f64),
    #[error("ground truth line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Intersection over union with inclusive pixel coordinates.
pub fn iou(a: &PixelBox, b: &PixelBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImageClass {
    TruePositive,
    FalsePositive,
    FalseNegative,
}

impl ImageClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ImageClass::TruePositive => "TP",
            ImageClass::FalsePositive => "FP",
            ImageClass::FalseNegative => "FN",
        }
    }
}

impl fmt::Display for ImageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Greedy one-to-one matching by descending IoU. Returns `(pred, truth)`
/// index pairs.
pub fn match_boxes(pred: &[PixelBox], truth: &[PixelBox], iou_min: f64) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            let v = iou(p, t);
            if v >= iou_min {
                pairs.push((v, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut used_pred = vec![false; pred.len()];
    let mut used_truth = vec![false; truth.len()];
    let mut matched = Vec::new();
    for (_, i, j) in pairs {
        if !used_pred[i] && !used_truth[j] {
            used_pred[i] = true;
            used_truth[j] = true;
            matched.push((i, j));
        }
    }
    matched
}

pub fn classify_image(pred: &[PixelBox], truth: &[PixelBox], iou_min: f64) -> Result<ImageClass, EvalError> {
    if !(iou_min > 0.0 && iou_min <= 1.0) {
        return Err(EvalError::IouThreshold(iou_min));
    }
    let matched = match_boxes(pred, truth, iou_min).len();
    Ok(if matched < truth.len() {
        ImageClass::FalseNegative
    } else if matched < pred.len() {
        ImageClass::FalsePositive
    } else {
        ImageClass::TruePositive
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub total: usize,
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub tp_rate: f64,
    pub fp_rate: f64,
    pub fn_rate: f64,
    /// Images where the true plate was found, extra regions or not.
    pub combined_positive: f64,
}

pub fn compute_metrics(outcomes: &[ImageClass]) -> Result<Metrics, EvalError> {
    if outcomes.is_empty() {
        return Err(EvalError::Empty);
    }
    let count = |c: ImageClass| outcomes.iter().filter(|&&o| o == c).count();
    let (tp, fp, fneg) = (
        count(ImageClass::TruePositive),
        count(ImageClass::FalsePositive),
        count(ImageClass::FalseNegative),
    );
    let n = outcomes.len() as f64;
    let (tp_rate, fp_rate) = (tp as f64 / n, fp as f64 / n);
    Ok(Metrics {
        total: outcomes.len(),
        true_positive: tp,
        false_positive: fp,
        false_negative: fneg,
        tp_rate,
        fp_rate,
        fn_rate: fneg as f64 / n,
        combined_positive: tp_rate + fp_rate,
    })
}

/// True plate rectangles of one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub image_id: String,
    pub boxes: Vec<PixelBox>,
}

/// Parses `image_id x_min y_min x_max y_max` lines. An id on its own marks
/// an image with no plates; repeated ids accumulate boxes. Blank lines and
/// `#` comments are skipped. Images keep first-appearance order.
pub fn parse_ground_truth(text: &str) -> Result<Vec<GroundTruth>, EvalError> {
    let mut out: Vec<GroundTruth> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| EvalError::Parse { line: k + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let id = fields[0].to_string();
        let bbox = match fields.len() {
            1 => None,
            5 => {
                let mut v = [0usize; 4];
                for (slot, f) in v.iter_mut().zip(&fields[1..]) {
                    *slot = f.parse().map_err(|_| err(format!("bad coordinate {f:?}")))?;
                }
                if v[0] > v[2] || v[1] > v[3] {
                    return Err(err("box corners out of order".into()));
                }
                Some(PixelBox::new(v[0], v[1], v[2], v[3], Tier::B3))
            }
            n => return Err(err(format!("expected 1 or 5 fields, got {n}"))),
        };
        let entry = match out.iter().position(|g| g.image_id == id) {
            Some(i) => &mut out[i],
            None => {
                out.push(GroundTruth {
                    image_id: id,
                    boxes: Vec::new(),
                });
                out.last_mut().expect("just pushed")
            }
        };
        entry.boxes.extend(bbox);
    }
    Ok(out)
}

pub fn format_ground_truth(truth: &[GroundTruth]) -> String {
    let mut s = String::new();
    for g in truth {
        if g.boxes.is_empty() {
            writeln!(s, "{}", g.image_id).unwrap();
        }
        for b in &g.boxes {
            writeln!(s, "{} {} {} {} {}", g.image_id, b.x_min, b.y_min, b.x_max, b.y_max).unwrap();
        }
    }
    s
}

/// Ids present in `a` but not in `b`, in `a`'s order.
pub fn missing_ids<'a>(a: impl IntoIterator<Item = &'a str>, b: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let have: HashSet<&str> = b.into_iter().collect();
    a.into_iter().filter(|id| !have.contains(id)).map(str::to_string).collect()
}
