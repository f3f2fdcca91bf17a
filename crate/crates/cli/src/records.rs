//! Result records: one line per box,
//! `image_id tier x_min y_min x_max y_max aspect area frac contrast`.
//!
//! B1 boxes are never scored, so their contrast column is `-`. An image with
//! no boxes at all is written as its id alone, which keeps it visible to
//! `evaluate`. Floats use Rust's shortest round-trip formatting, so parsing a
//! record gives back the exact values.

use std::fmt::Write as _;

use plateloc::{CandidateFeatures, LocalizationResult, PixelBox, Tier};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxRecord {
    pub bbox: PixelBox,
    pub aspect: f64,
    pub area: usize,
    pub frac: f64,
    pub contrast: Option<f64>,
}

/// Every box of one image, in record order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecords {
    pub image_id: String,
    pub boxes: Vec<BoxRecord>,
}

impl ImageRecords {
    pub fn from_result(image_id: &str, r: &LocalizationResult<f64>) -> Self {
        let mut boxes = Vec::with_capacity(r.b1.len() + r.b2.len() + r.b3.len());
        for b in &r.b1 {
            let f = CandidateFeatures::of_box(b, 0.0, r.width, r.height);
            boxes.push(BoxRecord {
                bbox: *b,
                aspect: f.aspect_ratio,
                area: f.area_px,
                frac: f.fractional_area,
                contrast: None,
            });
        }
        for c in r.b2.iter().chain(&r.b3) {
            boxes.push(BoxRecord {
                bbox: c.bbox,
                aspect: c.features.aspect_ratio,
                area: c.features.area_px,
                frac: c.features.fractional_area,
                contrast: Some(c.features.avg_contrast),
            });
        }
        Self {
            image_id: image_id.to_string(),
            boxes,
        }
    }

    pub fn tier(&self, tier: Tier) -> impl Iterator<Item = &BoxRecord> {
        self.boxes.iter().filter(move |b| b.bbox.tier == tier)
    }

    pub fn plates(&self) -> Vec<PixelBox> {
        self.tier(Tier::B3).map(|b| b.bbox).collect()
    }

    pub fn write(&self, out: &mut String) {
        if self.boxes.is_empty() {
            writeln!(out, "{}", self.image_id).unwrap();
        }
        for r in &self.boxes {
            let b = r.bbox;
            write!(
                out,
                "{} {} {} {} {} {} {} {} {} ",
                self.image_id,
                b.tier.as_str(),
                b.x_min,
                b.y_min,
                b.x_max,
                b.y_max,
                r.aspect,
                r.area,
                r.frac
            )
            .unwrap();
            match r.contrast {
                Some(c) => writeln!(out, "{c}").unwrap(),
                None => out.push_str("-\n"),
            }
        }
    }
}

pub fn format_records(images: &[ImageRecords]) -> String {
    let mut s = String::new();
    for im in images {
        im.write(&mut s);
    }
    s
}

/// Parses a result file, grouping lines by image in first-appearance order.
pub fn parse_records(text: &str) -> Result<Vec<ImageRecords>, CliError> {
    let mut out: Vec<ImageRecords> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| CliError::Records { line: k + 1, message };
        let f: Vec<&str> = line.split_whitespace().collect();
        let id = f[0];
        let rec = match f.len() {
            1 => None,
            10 => {
                let tier = Tier::parse(f[1]).ok_or_else(|| bad(format!("unknown tier {:?}", f[1])))?;
                let int = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad integer {s:?}")));
                let float = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number {s:?}")));
                let (x0, y0, x1, y1) = (int(f[2])?, int(f[3])?, int(f[4])?, int(f[5])?);
                if x0 > x1 || y0 > y1 {
                    return Err(bad("box corners out of order".into()));
                }
                Some(BoxRecord {
                    bbox: PixelBox::new(x0, y0, x1, y1, tier),
                    aspect: float(f[6])?,
                    area: int(f[7])?,
                    frac: float(f[8])?,
                    contrast: if f[9] == "-" { None } else { Some(float(f[9])?) },
                })
            }
            n => return Err(bad(format!("expected 1 or 10 fields, got {n}"))),
        };
        let entry = match out.iter().position(|r| r.image_id == id) {
            Some(i) => &mut out[i],
            None => {
                out.push(ImageRecords {
                    image_id: id.to_string(),
                    boxes: Vec::new(),
                });
                out.last_mut().expect("just pushed")
            }
        };
        entry.boxes.extend(rec);
    }
    Ok(out)
}
