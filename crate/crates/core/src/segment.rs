//! Plate / no-plate pixel classification and connected component extraction.

use std::fmt;

use crate::color::circular_hue_distance;
use crate::image::Image;
use crate::scalar::Scalar;
use crate::stats::SeedConfig;

pub const DEFAULT_MIN_COMPONENT_SIZE: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Label {
    /// `LABEL_LP`: pixel colour matches the plate seeds.
    Plate,
    /// `LABEL_NLP`
    NonPlate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<Label>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<Label>) -> Self {
        assert_eq!(labels.len(), width * height, "label count must equal width * height");
        Self { width, height, labels }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> Label) -> Self {
        let labels = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self { width, height, labels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }

    #[inline]
    pub fn is_plate(&self, x: usize, y: usize) -> bool {
        self.get(x, y) == Label::Plate
    }

    pub fn plate_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == Label::Plate).count()
    }
}

/// Localization level of a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tier {
    /// Bounding box of one connected component.
    B1,
    /// Enclosure of a cluster of overlapping B1 boxes.
    B2,
    /// B2 box accepted as a plate.
    B3,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::B1 => "B1",
            Tier::B2 => "B2",
            Tier::B3 => "B3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "B1" => Some(Tier::B1),
            "B2" => Some(Tier::B2),
            "B3" => Some(Tier::B3),
            _ => None,
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Axis-aligned pixel rectangle with inclusive corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
    pub tier: Tier,
}

impl PixelBox {
    pub fn new(x_min: usize, y_min: usize, x_max: usize, y_max: usize, tier: Tier) -> Self {
        debug_assert!(x_min <= x_max && y_min <= y_max);
        Self { x_min, y_min, x_max, y_max, tier }
    }

    pub fn with_tier(self, tier: Tier) -> Self {
        Self { tier, ..self }
    }

    /// Inclusive width in pixels.
    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains_point(&self, x: usize, y: usize) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    pub fn contains(&self, other: &PixelBox) -> bool {
        self.x_min <= other.x_min && self.y_min <= other.y_min && self.x_max >= other.x_max && self.y_max >= other.y_max
    }

    /// Closed-rectangle intersection is non-empty; touching edges count.
    pub fn overlaps(&self, other: &PixelBox) -> bool {
        self.x_min <= other.x_max && other.x_min <= self.x_max && self.y_min <= other.y_max && other.y_min <= self.y_max
    }

    pub fn intersection_area(&self, other: &PixelBox) -> usize {
        if !self.overlaps(other) {
            return 0;
        }
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min) + 1;
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min) + 1;
        w * h
    }

    /// Smallest box enclosing both; keeps `self.tier`.
    pub fn union(&self, other: &PixelBox) -> PixelBox {
        PixelBox {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
            tier: self.tier,
        }
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.x_min <= self.x_max && self.y_min <= self.y_max && self.x_max < width && self.y_max < height
    }

    /// Geometric ordering key: `(y_min, x_min, y_max, x_max)`.
    pub fn raster_key(&self) -> (usize, usize, usize, usize) {
        (self.y_min, self.x_min, self.y_max, self.x_max)
    }
}

/// Labels a pixel as plate when both its hue (circular distance) and
/// saturation are within tolerance of the seeds.
pub fn classify_pixels<T: Scalar>(img: &Image<T>, seeds: &SeedConfig<T>) -> LabelMap {
    let hue = seeds.hue();
    let sat = seeds.saturation();
    let labels = img
        .pixels()
        .iter()
        .map(|p| {
            let hsi = p.to_hsi();
            if circular_hue_distance(hsi.h, hue.seed) <= hue.tolerance && (hsi.s - sat.seed).abs() <= sat.tolerance {
                Label::Plate
            } else {
                Label::NonPlate
            }
        })
        .collect();
    LabelMap::new(img.width(), img.height(), labels)
}

/// An 8-connected set of plate pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub pixel_count: usize,
    /// Raster index (`y * width + x`) of the component's first pixel.
    pub first_pixel: usize,
    pub bbox: PixelBox,
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        Self {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut x = x as u32;
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x as usize
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Maximal 8-connected plate components with their B1 boxes.
///
/// Components with fewer than `min_size` pixels are dropped. Output is
/// ordered by box top-left corner (row-major), ties broken by the
/// component's first pixel.
pub fn connected_components(labels: &LabelMap, min_size: usize) -> Vec<Component> {
    label_components(labels, min_size).components
}

/// Components plus the component of every pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentMap {
    /// Same order as [`connected_components`].
    pub components: Vec<Component>,
    /// Row-major index into `components`, `None` for non-plate pixels and
    /// pixels of dropped components.
    pub membership: Vec<Option<usize>>,
}

pub fn label_components(labels: &LabelMap, min_size: usize) -> ComponentMap {
    let (w, h) = (labels.width(), labels.height());
    let n = w * h;
    let mut uf = UnionFind::new(n);

    // Only the already visited half of the neighbourhood is needed.
    for y in 0..h {
        for x in 0..w {
            if !labels.is_plate(x, y) {
                continue;
            }
            let idx = y * w + x;
            if x > 0 && labels.is_plate(x - 1, y) {
                uf.union(idx, idx - 1);
            }
            if y > 0 {
                let up = idx - w;
                if labels.is_plate(x, y - 1) {
                    uf.union(idx, up);
                }
                if x > 0 && labels.is_plate(x - 1, y - 1) {
                    uf.union(idx, up - 1);
                }
                if x + 1 < w && labels.is_plate(x + 1, y - 1) {
                    uf.union(idx, up + 1);
                }
            }
        }
    }

    // root -> slot in `comps`
    let mut slot = vec![u32::MAX; n];
    let mut comps: Vec<Component> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !labels.is_plate(x, y) {
                continue;
            }
            let idx = y * w + x;
            let root = uf.find(idx);
            if slot[root] == u32::MAX {
                slot[root] = comps.len() as u32;
                comps.push(Component {
                    pixel_count: 0,
                    first_pixel: idx,
                    bbox: PixelBox::new(x, y, x, y, Tier::B1),
                });
            }
            let c = &mut comps[slot[root] as usize];
            c.pixel_count += 1;
            c.bbox.x_min = c.bbox.x_min.min(x);
            c.bbox.x_max = c.bbox.x_max.max(x);
            c.bbox.y_max = c.bbox.y_max.max(y);
        }
    }

    let mut order: Vec<usize> = (0..comps.len()).filter(|&k| comps[k].pixel_count >= min_size).collect();
    order.sort_by_key(|&k| {
        let c = &comps[k];
        (c.bbox.y_min, c.bbox.x_min, c.first_pixel)
    });
    let mut rank = vec![None; comps.len()];
    for (r, &k) in order.iter().enumerate() {
        rank[k] = Some(r);
    }
    let membership = (0..n)
        .map(|idx| {
            if labels.labels()[idx] == Label::Plate {
                rank[slot[uf.find(idx)] as usize]
            } else {
                None
            }
        })
        .collect();
    ComponentMap {
        components: order.into_iter().map(|k| comps[k]).collect(),
        membership,
    }
}
