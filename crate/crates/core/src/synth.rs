//! Synthetic road scenes with yellow commercial plates and exact ground truth.
//!
//! Each scene is a gray road with random clutter, one vehicle body per plate
//! and a yellow plate carrying seven-segment glyphs. Glyph edges are
//! antialiased over a couple of pixels, the way a camera blurs them, so the
//! transition pixels keep the plate's hue and saturation. Illumination,
//! Gaussian sensor noise and 4:2:0 chroma subsampling are applied last, the
//! result is quantized to 8 bits and salt-and-pepper impulses are added.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::color::{HsiPixel, RgbPixel};
use crate::image::Image;
use crate::scalar::Scalar;
use crate::segment::{PixelBox, Tier};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("a {plate_width}x{plate_height} plate does not fit in a {width}x{height} frame")]
    PlateDoesNotFit {
        plate_width: usize,
        plate_height: usize,
        width: usize,
        height: usize,
    },
    #[error("could not place {0} non-overlapping plates")]
    Placement(usize),
    #[error("invalid scene parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub width: usize,
    pub height: usize,
    pub plate_count: usize,
    /// Inclusive range of plate widths in pixels.
    pub plate_width: (usize, usize),
    /// Width / height range.
    pub plate_aspect: (f64, f64),
    /// Background hue range in degrees.
    pub plate_hue: (f64, f64),
    pub plate_saturation: (f64, f64),
    pub plate_intensity: (f64, f64),
    /// Glyph colour as a fraction of the plate background.
    pub glyph_level: f64,
    pub clutter_count: (usize, usize),
    /// Flat plate-coloured patches away from the plates.
    pub distractor_count: usize,
    /// Gaussian noise sigma in 8-bit units.
    pub noise_sigma: f64,
    /// Fraction of pixels replaced by black or white impulses.
    pub salt_pepper: f64,
    /// Global brightness multiplier range.
    pub illumination: (f64, f64),
    /// Peak-to-centre amplitude of a left-to-right brightness gradient.
    pub illumination_gradient: f64,
    /// Allow vehicle bodies the same colour as the plate.
    pub yellow_body: bool,
    /// Share chroma across 2x2 blocks before quantization.
    pub chroma_subsampling: bool,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            width: 840,
            height: 630,
            plate_count: 1,
            plate_width: (150, 240),
            plate_aspect: (3.0, 4.5),
            plate_hue: (47.0, 53.0),
            plate_saturation: (0.78, 0.86),
            plate_intensity: (0.5, 0.6),
            glyph_level: 0.08,
            clutter_count: (6, 14),
            distractor_count: 1,
            noise_sigma: 6.0,
            salt_pepper: 0.002,
            illumination: (0.35, 1.0),
            illumination_gradient: 0.1,
            yellow_body: false,
            chroma_subsampling: true,
        }
    }
}

impl SceneParams {
    /// A clean, evenly lit scene.
    pub fn noiseless() -> Self {
        Self {
            noise_sigma: 0.0,
            salt_pepper: 0.0,
            illumination: (1.0, 1.0),
            illumination_gradient: 0.0,
            chroma_subsampling: false,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Params(m.to_string()));
        if self.width < 3 || self.height < 3 {
            return bad("frame must be at least 3x3");
        }
        if self.plate_count > 2 {
            return bad("plate_count must be 0, 1 or 2");
        }
        if self.plate_width.0 > self.plate_width.1 || self.plate_width.0 < 8 {
            return bad("plate width range must be ordered and at least 8");
        }
        let ordered = |r: (f64, f64)| r.0 <= r.1;
        if !(ordered(self.plate_aspect) && self.plate_aspect.0 > 0.0) {
            return bad("plate aspect range must be ordered and positive");
        }
        if !ordered(self.plate_hue) || !ordered(self.plate_saturation) || !ordered(self.plate_intensity) {
            return bad("plate colour ranges must be ordered");
        }
        if !(ordered(self.illumination) && self.illumination.0 > 0.0) {
            return bad("illumination range must be ordered and positive");
        }
        if self.clutter_count.0 > self.clutter_count.1 {
            return bad("clutter range must be ordered");
        }
        if !(self.noise_sigma >= 0.0 && (0.0..=1.0).contains(&self.salt_pepper)) {
            return bad("noise levels out of range");
        }
        Ok(())
    }
}

/// One rendered plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateTruth {
    pub bbox: PixelBox,
    /// Background colour before illumination and noise.
    pub background: [u8; 3],
    /// Glyph colour before illumination and noise.
    pub glyph: [u8; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T> {
    pub image: Image<T>,
    pub plates: Vec<PlateTruth>,
}

impl<T: Scalar> Scene<T> {
    pub fn truth_boxes(&self) -> Vec<PixelBox> {
        self.plates.iter().map(|p| p.bbox).collect()
    }

    /// Each plate cut out along its ground-truth rectangle.
    pub fn plate_crops(&self) -> Vec<Image<T>> {
        self.plates
            .iter()
            .map(|p| self.image.crop(p.bbox.x_min, p.bbox.y_min, p.bbox.x_max, p.bbox.y_max))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: usize,
    y0: usize,
    /// exclusive
    x1: usize,
    y1: usize,
}

impl Rect {
    fn clipped(x0: i64, y0: i64, x1: i64, y1: i64, w: usize, h: usize) -> Self {
        let cx = |v: i64| v.clamp(0, w as i64) as usize;
        let cy = |v: i64| v.clamp(0, h as i64) as usize;
        Rect {
            x0: cx(x0),
            y0: cy(y0),
            x1: cx(x1),
            y1: cy(y1),
        }
    }

    fn grown(&self, m: usize, w: usize, h: usize) -> Self {
        Rect::clipped(
            self.x0 as i64 - m as i64,
            self.y0 as i64 - m as i64,
            (self.x1 + m) as i64,
            (self.y1 + m) as i64,
            w,
            h,
        )
    }

    fn intersects(&self, o: &Rect) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }
}

struct Canvas {
    w: usize,
    px: Vec<[f64; 3]>,
}

impl Canvas {
    fn fill(&mut self, r: Rect, c: [f64; 3]) {
        for y in r.y0..r.y1 {
            for x in r.x0..r.x1 {
                self.px[y * self.w + x] = c;
            }
        }
    }
}

fn hsi_color(h: f64, s: f64, i: f64) -> [f64; 3] {
    let p = HsiPixel::new(h.rem_euclid(360.0), s.clamp(0.0, 1.0), i.clamp(0.0, 1.0)).to_rgb_in_gamut();
    [p.r * 255.0, p.g * 255.0, p.b * 255.0]
}

fn round_color(c: [f64; 3]) -> [f64; 3] {
    c.map(|v| v.round().clamp(0.0, 255.0))
}

/// Seven-segment patterns for the digits 0-9, bits `abcdefg` from bit 6 down.
const SEGMENTS: [u8; 10] = [
    0b1111110, 0b0110000, 0b1101101, 0b1111001, 0b0110011, 0b1011011, 0b1011111, 0b1110000, 0b1111111, 0b1111011,
];

fn draw_glyph(mask: &mut [bool], mw: usize, x0: usize, y0: usize, gw: usize, gh: usize, t: usize, digit: usize) {
    let mut bar = |xa: usize, ya: usize, xb: usize, yb: usize| {
        for y in ya..yb {
            for x in xa..xb {
                mask[y * mw + x] = true;
            }
        }
    };
    let seg = SEGMENTS[digit];
    let mid = y0 + gh / 2;
    let on = |bit: u8| seg & (1 << (6 - bit)) != 0;
    if on(0) {
        bar(x0, y0, x0 + gw, y0 + t);
    }
    if on(1) {
        bar(x0 + gw - t, y0, x0 + gw, mid + t / 2);
    }
    if on(2) {
        bar(x0 + gw - t, mid - t / 2, x0 + gw, y0 + gh);
    }
    if on(3) {
        bar(x0, y0 + gh - t, x0 + gw, y0 + gh);
    }
    if on(4) {
        bar(x0, mid - t / 2, x0 + t, y0 + gh);
    }
    if on(5) {
        bar(x0, y0, x0 + t, mid + t / 2);
    }
    if on(6) {
        bar(x0, mid - t / 2, x0 + gw, mid - t / 2 + t);
    }
}

/// Glyph coverage over a `pw x ph` plate, edges softened by a 3x3 box blur.
fn glyph_coverage(rng: &mut ChaCha8Rng, pw: usize, ph: usize) -> Vec<f64> {
    let mut mask = vec![false; pw * ph];
    let mx = ((pw as f64) * 0.06).round().max(2.0) as usize;
    let my = ((ph as f64) * 0.18).round().max(2.0) as usize;
    let area_w = pw.saturating_sub(2 * mx);
    let gh = ph.saturating_sub(2 * my);
    let t = ((gh as f64) * 0.15).round().max(2.0) as usize;
    if gh >= 3 * t && area_w >= 3 * t {
        let max_glyphs = (area_w / (3 * t + 2)).max(1);
        let n = rng.random_range(6..=9).min(max_glyphs);
        let cell = area_w / n;
        let gw = ((cell as f64) * 0.7).round().max((3 * t) as f64) as usize;
        let gw = gw.min(cell);
        for k in 0..n {
            let digit = rng.random_range(0..10);
            draw_glyph(&mut mask, pw, mx + k * cell + (cell - gw) / 2, my, gw, gh, t, digit);
        }
    }
    let mut cov = vec![0.0; pw * ph];
    for y in 0..ph {
        for x in 0..pw {
            let mut sum = 0u32;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (xx, yy) = (x as i64 + dx, y as i64 + dy);
                    if xx >= 0 && yy >= 0 && (xx as usize) < pw && (yy as usize) < ph && mask[yy as usize * pw + xx as usize] {
                        sum += 1;
                    }
                }
            }
            cov[y * pw + x] = sum as f64 / 9.0;
        }
    }
    cov
}

/// Hue at least 40 degrees away from the plate band, unless `allow_plate_hue`.
fn body_hue(rng: &mut ChaCha8Rng, plate_hue: f64, allow_plate_hue: bool) -> f64 {
    if allow_plate_hue {
        return rng.random_range(0.0..360.0);
    }
    let offset = rng.random_range(40.0..320.0);
    (plate_hue + offset).rem_euclid(360.0)
}

/// Averages Cb and Cr over 2x2 blocks (BT.601), as 4:2:0 video and JPEG capture do.
fn subsample_chroma(px: &mut [[f64; 3]], w: usize, h: usize) {
    const KR: f64 = 0.299;
    const KB: f64 = 0.114;
    const KG: f64 = 1.0 - KR - KB;
    let ycc = |[r, g, b]: [f64; 3]| {
        let y = KR * r + KG * g + KB * b;
        [y, (b - y) / (2.0 * (1.0 - KB)), (r - y) / (2.0 * (1.0 - KR))]
    };
    let rgb = |y: f64, cb: f64, cr: f64| {
        let r = y + 2.0 * (1.0 - KR) * cr;
        let b = y + 2.0 * (1.0 - KB) * cb;
        [r, (y - KR * r - KB * b) / KG, b]
    };
    for by in (0..h).step_by(2) {
        for bx in (0..w).step_by(2) {
            let ys = by..(by + 2).min(h);
            let xs = bx..(bx + 2).min(w);
            let (mut cb, mut cr, mut n) = (0.0, 0.0, 0.0);
            for y in ys.clone() {
                for x in xs.clone() {
                    let [_, b, r] = ycc(px[y * w + x]);
                    cb += b;
                    cr += r;
                    n += 1.0;
                }
            }
            let (cb, cr) = (cb / n, cr / n);
            for y in ys.clone() {
                for x in xs.clone() {
                    let [l, _, _] = ycc(px[y * w + x]);
                    px[y * w + x] = rgb(l, cb, cr);
                }
            }
        }
    }
}

/// Renders one deterministic scene for `rng_seed`.
pub fn synth_generate<T: Scalar>(rng_seed: u64, params: &SceneParams) -> Result<Scene<T>, SynthError> {
    params.validate()?;
    let (w, h) = (params.width, params.height);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    // plate geometry first so everything else can keep clear of it
    let mut plate_rects: Vec<Rect> = Vec::new();
    let margin = 10usize;
    for _ in 0..params.plate_count {
        let pw = rng.random_range(params.plate_width.0..=params.plate_width.1);
        let aspect = rng.random_range(params.plate_aspect.0..=params.plate_aspect.1);
        let ph = ((pw as f64) / aspect).round().max(3.0) as usize;
        if pw + 2 * margin > w || ph + 2 * margin > h {
            return Err(SynthError::PlateDoesNotFit {
                plate_width: pw,
                plate_height: ph,
                width: w,
                height: h,
            });
        }
        let y_lo = ((h as f64) * 0.3) as usize;
        let y_lo = y_lo.min(h - ph - margin).max(margin);
        let mut placed = None;
        for _ in 0..200 {
            let x0 = rng.random_range(margin..=w - pw - margin);
            let y0 = rng.random_range(y_lo..=h - ph - margin);
            let r = Rect {
                x0,
                y0,
                x1: x0 + pw,
                y1: y0 + ph,
            };
            if plate_rects.iter().all(|o| !r.grown(3 * margin, w, h).intersects(o)) {
                placed = Some(r);
                break;
            }
        }
        plate_rects.push(placed.ok_or(SynthError::Placement(params.plate_count))?);
    }
    let keep_out: Vec<Rect> = plate_rects.iter().map(|r| r.grown(8, w, h)).collect();
    let clear = |r: &Rect| keep_out.iter().all(|k| !k.intersects(r));
    let plate_hue_mid = 0.5 * (params.plate_hue.0 + params.plate_hue.1);

    // road
    let base = rng.random_range(90.0..140.0);
    let tint: [f64; 3] = [rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)];
    let mut canvas = Canvas {
        w,
        px: vec![[0.0; 3]; w * h],
    };
    for y in 0..h {
        let shade = base * (0.8 + 0.4 * y as f64 / h as f64);
        let row = tint.map(|t| (shade + t).clamp(0.0, 255.0));
        canvas.px[y * w..(y + 1) * w].fill(row);
    }

    // clutter
    let clutter = rng.random_range(params.clutter_count.0..=params.clutter_count.1);
    for _ in 0..clutter {
        let cw = rng.random_range(20..=160).min(w);
        let ch = rng.random_range(20..=160).min(h);
        let x0 = rng.random_range(0..=w - cw);
        let y0 = rng.random_range(0..=h - ch);
        let r = Rect {
            x0,
            y0,
            x1: x0 + cw,
            y1: y0 + ch,
        };
        let c = hsi_color(rng.random_range(0.0..360.0), rng.random_range(0.0..0.7), rng.random_range(0.1..0.8));
        if clear(&r) {
            canvas.fill(r, round_color(c));
        }
    }

    // vehicle bodies with a grille above the plate and two lamps
    for pr in &plate_rects {
        let (pw, ph) = ((pr.x1 - pr.x0) as f64, (pr.y1 - pr.y0) as f64);
        let body = Rect::clipped(
            pr.x0 as i64 - (pw * rng.random_range(1.0..1.8)) as i64,
            pr.y0 as i64 - (ph * rng.random_range(2.5..4.0)) as i64,
            pr.x1 as i64 + (pw * rng.random_range(1.0..1.8)) as i64,
            pr.y1 as i64 + (ph * rng.random_range(0.5..1.0)) as i64,
            w,
            h,
        );
        let hue = body_hue(&mut rng, plate_hue_mid, params.yellow_body);
        let body_color = round_color(hsi_color(hue, rng.random_range(0.05..0.6), rng.random_range(0.15..0.6)));
        canvas.fill(body, body_color);

        let grille = Rect::clipped(
            pr.x0 as i64,
            pr.y0 as i64 - (ph * 1.8) as i64,
            pr.x1 as i64,
            pr.y0 as i64 - (ph * 0.4) as i64,
            w,
            h,
        );
        let bar = rng.random_range(3..7);
        let (dark, light) = (rng.random_range(15.0..45.0), rng.random_range(110.0..190.0));
        for y in grille.y0..grille.y1 {
            let v = if ((y - grille.y0) / bar).is_multiple_of(2) { dark } else { light };
            canvas.fill(
                Rect {
                    x0: grille.x0,
                    y0: y,
                    x1: grille.x1,
                    y1: y + 1,
                },
                [v, v, v],
            );
        }

        let lamp_w = (pw * 0.35) as i64;
        let lamp_h = (ph * 0.7) as i64;
        let lamp_y = pr.y0 as i64 - (ph * 1.5) as i64;
        let lamp = [235.0, 235.0, 225.0];
        for lx in [body.x0 as i64 + 6, body.x1 as i64 - 6 - lamp_w] {
            let r = Rect::clipped(lx, lamp_y, lx + lamp_w, lamp_y + lamp_h, w, h);
            if clear(&r) {
                canvas.fill(r, lamp);
            }
        }
    }

    // flat plate-coloured patches with no texture
    for _ in 0..params.distractor_count {
        let dw = rng.random_range(40..=120).min(w);
        let dh = rng.random_range(20..=60).min(h);
        let x0 = rng.random_range(0..=w - dw);
        let y0 = rng.random_range(0..=h - dh);
        let r = Rect {
            x0,
            y0,
            x1: x0 + dw,
            y1: y0 + dh,
        };
        let c = hsi_color(
            rng.random_range(params.plate_hue.0..=params.plate_hue.1),
            rng.random_range(params.plate_saturation.0..=params.plate_saturation.1),
            rng.random_range(0.2..0.6),
        );
        if clear(&r) {
            canvas.fill(r, round_color(c));
        }
    }

    // plates
    let mut plates = Vec::new();
    for pr in &plate_rects {
        let (pw, ph) = (pr.x1 - pr.x0, pr.y1 - pr.y0);
        let bg = round_color(hsi_color(
            rng.random_range(params.plate_hue.0..=params.plate_hue.1),
            rng.random_range(params.plate_saturation.0..=params.plate_saturation.1),
            rng.random_range(params.plate_intensity.0..=params.plate_intensity.1),
        ));
        let glyph = round_color(bg.map(|v| v * params.glyph_level));
        let cov = glyph_coverage(&mut rng, pw, ph);
        for y in 0..ph {
            for x in 0..pw {
                let k = cov[y * pw + x];
                let c = [0, 1, 2].map(|i| bg[i] * (1.0 - k) + glyph[i] * k);
                canvas.px[(pr.y0 + y) * w + pr.x0 + x] = c;
            }
        }
        plates.push(PlateTruth {
            bbox: PixelBox::new(pr.x0, pr.y0, pr.x1 - 1, pr.y1 - 1, Tier::B3),
            background: bg.map(|v| v as u8),
            glyph: glyph.map(|v| v as u8),
        });
    }

    // illumination, noise, quantization
    let light = rng.random_range(params.illumination.0..=params.illumination.1);
    let slope = if params.illumination_gradient > 0.0 {
        rng.random_range(-params.illumination_gradient..=params.illumination_gradient)
    } else {
        0.0
    };
    let normal = if params.noise_sigma > 0.0 {
        Some(Normal::new(0.0, params.noise_sigma).map_err(|e| SynthError::Params(e.to_string()))?)
    } else {
        None
    };
    let mut sensor = vec![[0.0f64; 3]; w * h];
    for y in 0..h {
        for x in 0..w {
            let gain = light * (1.0 + slope * (2.0 * x as f64 / w as f64 - 1.0));
            let c = canvas.px[y * w + x];
            let v = &mut sensor[y * w + x];
            for (o, c) in v.iter_mut().zip(c) {
                *o = c * gain;
                if let Some(n) = &normal {
                    *o += rng.sample(n);
                }
            }
        }
    }
    if params.chroma_subsampling {
        subsample_chroma(&mut sensor, w, h);
    }
    let mut bytes = Vec::with_capacity(w * h * 3);
    for v in &sensor {
        let mut out = v.map(|c| c.round().clamp(0.0, 255.0) as u8);
        if params.salt_pepper > 0.0 && rng.random_bool(params.salt_pepper) {
            out = if rng.random_bool(0.5) { [0; 3] } else { [255; 3] };
        }
        bytes.extend_from_slice(&out);
    }

    let image = Image::from_rgb8(w, h, &bytes).expect("buffer sized to frame");
    Ok(Scene { image, plates })
}

/// Hue/saturation of an 8-bit colour.
pub fn rgb8_hue_saturation(c: [u8; 3]) -> (f64, f64) {
    let hsi = RgbPixel::<f64>::from_rgb8(c).to_hsi();
    (hsi.h, hsi.s)
}
