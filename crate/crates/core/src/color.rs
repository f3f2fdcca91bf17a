//! RGB and HSI pixel representations and the conversions between them.
//!
//! Channels are normalized reals: `r, g, b, s, i` in `[0, 1]`, hue in degrees
//! in `[0, 360)`. Achromatic pixels (`r == g == b`) have no defined hue; they
//! are reported with `h = 0, s = 0`.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RgbPixel<T> {
    pub r: T,
    pub g: T,
    pub b: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HsiPixel<T> {
    /// Hue in degrees, `[0, 360)`.
    pub h: T,
    pub s: T,
    pub i: T,
}

impl<T: Scalar> RgbPixel<T> {
    pub fn new(r: T, g: T, b: T) -> Self {
        Self { r, g, b }
    }

    /// Builds a pixel from 8-bit channel values (`channel / 255`).
    pub fn from_rgb8(rgb: [u8; 3]) -> Self {
        let k = T::lit(255.0);
        Self {
            r: T::lit(rgb[0] as f64) / k,
            g: T::lit(rgb[1] as f64) / k,
            b: T::lit(rgb[2] as f64) / k,
        }
    }

    /// Rounds to the nearest 8-bit value per channel, clamping into range.
    pub fn to_rgb8(self) -> [u8; 3] {
        [quantize(self.r), quantize(self.g), quantize(self.b)]
    }

    pub fn channels(self) -> [T; 3] {
        [self.r, self.g, self.b]
    }

    pub fn is_valid(self) -> bool {
        let unit = |c: T| c >= T::zero() && c <= T::one();
        unit(self.r) && unit(self.g) && unit(self.b)
    }

    pub fn to_hsi(self) -> HsiPixel<T> {
        rgb_to_hsi(self)
    }
}

impl<T: Scalar> HsiPixel<T> {
    pub fn new(h: T, s: T, i: T) -> Self {
        Self { h, s, i }
    }

    pub fn is_valid(self) -> bool {
        let unit = |c: T| c >= T::zero() && c <= T::one();
        self.h >= T::zero() && self.h < T::lit(360.0) && unit(self.s) && unit(self.i)
    }

    /// Exact inverse of [`rgb_to_hsi`]; see [`hsi_to_rgb`].
    pub fn to_rgb(self) -> RgbPixel<T> {
        hsi_to_rgb(self)
    }

    /// Largest intensity at which this hue and saturation is still displayable
    /// (no RGB channel above 1).
    pub fn max_in_gamut_intensity(self) -> T {
        let peak = hsi_to_rgb(HsiPixel { i: T::one(), ..self });
        let m = peak.r.max(peak.g).max(peak.b);
        if m <= T::one() {
            T::one()
        } else {
            T::one() / m
        }
    }

    /// Lowers intensity, if needed, so the pixel fits the RGB cube. Hue and
    /// saturation are kept exactly.
    pub fn fit_to_gamut(self) -> Self {
        let cap = self.max_in_gamut_intensity();
        if self.i > cap {
            Self { i: cap, ..self }
        } else {
            self
        }
    }

    /// Converts to RGB after [`fit_to_gamut`](Self::fit_to_gamut), clamping the
    /// last few ulps of rounding so the result always satisfies the RGB invariants.
    pub fn to_rgb_in_gamut(self) -> RgbPixel<T> {
        let p = hsi_to_rgb(self.fit_to_gamut());
        let clamp = |c: T| c.max(T::zero()).min(T::one());
        RgbPixel::new(clamp(p.r), clamp(p.g), clamp(p.b))
    }
}

fn quantize<T: Scalar>(c: T) -> u8 {
    let v = (c * T::lit(255.0)).round().to_f64_lossy();
    v.clamp(0.0, 255.0) as u8
}

/// RGB to HSI using the arccos hue construction.
///
/// `theta = acos( ((r-g) + (r-b)) / 2 / sqrt((r-g)^2 + (r-b)(g-b)) )`, hue is
/// `theta` when `b <= g` and `360 - theta` otherwise. The arccos argument is
/// clamped to `[-1, 1]`.
pub fn rgb_to_hsi<T: Scalar>(p: RgbPixel<T>) -> HsiPixel<T> {
    let RgbPixel { r, g, b } = p;
    let three = T::lit(3.0);
    let sum = r + g + b;
    let i = sum / three;
    if sum <= T::zero() {
        return HsiPixel::new(T::zero(), T::zero(), T::zero());
    }

    let rg = r - g;
    let rb = r - b;
    let gb = g - b;
    let den = (rg * rg + rb * gb).sqrt();
    if den <= T::zero() {
        return HsiPixel::new(T::zero(), T::zero(), i);
    }

    let min = r.min(g).min(b);
    let s = (T::one() - three * min / sum).max(T::zero());

    let num = T::lit(0.5) * (rg + rb);
    let arg = (num / den).max(-T::one()).min(T::one());
    let theta = arg.acos().to_degrees();
    let full = T::lit(360.0);
    let mut h = if b <= g { theta } else { full - theta };
    if h >= full {
        h -= full;
    }
    HsiPixel::new(h, s, i)
}

/// HSI to RGB by the 120-degree sector construction.
///
/// This is the exact algebraic inverse of [`rgb_to_hsi`]: channels are not
/// clamped, so an HSI triple outside the displayable gamut yields a channel
/// above 1. Use [`HsiPixel::to_rgb_in_gamut`] when the result must be an
/// image pixel.
pub fn hsi_to_rgb<T: Scalar>(p: HsiPixel<T>) -> RgbPixel<T> {
    let HsiPixel { h, s, i } = p;
    let full = T::lit(360.0);
    let sector = T::lit(120.0);
    let mut h = h % full;
    if h < T::zero() {
        h += full;
    }

    let low = i * (T::one() - s);
    let lead = |hh: T| {
        let sixty = T::lit(60.0);
        i * (T::one() + s * hh.to_radians().cos() / (sixty - hh).to_radians().cos())
    };
    let three_i = T::lit(3.0) * i;

    if h < sector {
        let r = lead(h);
        let b = low;
        RgbPixel::new(r, three_i - (r + b), b)
    } else if h < sector + sector {
        let hh = h - sector;
        let r = low;
        let g = lead(hh);
        RgbPixel::new(r, g, three_i - (r + g))
    } else {
        let hh = h - sector - sector;
        let g = low;
        let b = lead(hh);
        RgbPixel::new(three_i - (g + b), g, b)
    }
}

/// Shortest angular distance between two hues, in degrees (`[0, 180]`).
pub fn circular_hue_distance<T: Scalar>(a: T, b: T) -> T {
    let full = T::lit(360.0);
    let d = (a - b).abs() % full;
    d.min(full - d)
}
