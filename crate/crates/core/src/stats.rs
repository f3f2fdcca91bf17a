//! Plate corpus statistics: per-channel frequency plots, the two-peak
//! background/character split, and the seed/tolerance derivation that drives
//! segmentation.

use std::fmt;

use crate::color::{HsiPixel, RgbPixel};
use crate::image::Image;
use crate::scalar::Scalar;

pub const DEFAULT_HISTOGRAM_BINS: usize = 100;
pub const DEFAULT_MIN_PEAK_SEPARATION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    R,
    G,
    B,
    H,
    S,
    I,
}

impl Channel {
    pub const ALL: [Channel; 6] = [Channel::R, Channel::G, Channel::B, Channel::H, Channel::S, Channel::I];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Upper end of the channel's legal range; the lower end is always 0.
    pub fn range_max(self) -> f64 {
        match self {
            Channel::H => 360.0,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::R => "r",
            Channel::G => "g",
            Channel::B => "b",
            Channel::H => "h",
            Channel::S => "s",
            Channel::I => "i",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    #[inline]
    pub fn value<T: Scalar>(self, rgb: RgbPixel<T>, hsi: HsiPixel<T>) -> T {
        match self {
            Channel::R => rgb.r,
            Channel::G => rgb.g,
            Channel::B => rgb.b,
            Channel::H => hsi.h,
            Channel::S => hsi.s,
            Channel::I => hsi.i,
        }
    }

    /// Bin of `v` among `bins` equal-width bins over the legal range; the
    /// range maximum lands in the last bin.
    #[inline]
    pub fn bin_of<T: Scalar>(self, v: T, bins: usize) -> usize {
        let k = (v / T::lit(self.range_max()) * T::from_usize_lossy(bins)).floor().to_f64_lossy();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(bins - 1)
        }
    }

    /// Value at the middle of bin `k`.
    pub fn bin_center<T: Scalar>(self, k: usize, bins: usize) -> T {
        T::lit((k as f64 + 0.5) * self.range_max() / bins as f64)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PeakError {
    #[error("need two local maxima at least {min_separation} bins apart, found {found} local maxima")]
    TooFewPeaks { found: usize, min_separation: usize },
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("histogram needs at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("no plate images given")]
    NoPlates,
    #[error("plate {index}: {source}")]
    Peak {
        index: usize,
        #[source]
        source: PeakError,
    },
}

/// Bins of the darker and brighter of the two dominant histogram modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeakPair {
    pub low: usize,
    pub high: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisParams {
    pub bins: usize,
    pub min_peak_separation: usize,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            bins: DEFAULT_HISTOGRAM_BINS,
            min_peak_separation: DEFAULT_MIN_PEAK_SEPARATION,
        }
    }
}

/// Frequency plot of one channel over `bins` equal-width bins.
pub fn channel_histogram<T: Scalar>(plate: &Image<T>, channel: Channel, bins: usize) -> Result<Vec<usize>, StatsError> {
    if bins < 2 {
        return Err(StatsError::TooFewBins(bins));
    }
    let mut counts = vec![0usize; bins];
    for &p in plate.pixels() {
        counts[channel.bin_of(channel.value(p, p.to_hsi()), bins)] += 1;
    }
    Ok(counts)
}

/// Local maxima of a histogram as `(bin, count)`.
///
/// A maximum is a run of equal nonzero counts strictly above both
/// neighbours (bins outside the histogram count as 0); the run is reported at
/// its center bin.
pub fn local_maxima(hist: &[usize]) -> Vec<(usize, usize)> {
    let mut peaks = Vec::new();
    let n = hist.len();
    let mut a = 0;
    while a < n {
        let v = hist[a];
        let mut b = a;
        while b + 1 < n && hist[b + 1] == v {
            b += 1;
        }
        let left = if a == 0 { 0 } else { hist[a - 1] };
        let right = if b + 1 == n { 0 } else { hist[b + 1] };
        if v > 0 && v > left && v > right {
            peaks.push(((a + b) / 2, v));
        }
        a = b + 1;
    }
    peaks
}

/// Picks the two dominant modes of a histogram.
///
/// Among all pairs of local maxima at least `min_separation` bins apart,
/// the pair with the tallest taller peak wins, then the tallest shorter peak,
/// then the lowest bins.
pub fn two_peak_split(hist: &[usize], min_separation: usize) -> Result<PeakPair, PeakError> {
    let mut peaks = local_maxima(hist);
    let found = peaks.len();
    // rank by count desc, bin asc
    peaks.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    for (k, &(top, _)) in peaks.iter().enumerate() {
        // partner candidates are ranked after `top`, so the first compatible one
        // is the best partner for it; earlier tops were already exhausted
        if let Some(&(other, _)) = peaks[k + 1..].iter().find(|&&(bin, _)| bin.abs_diff(top) >= min_separation) {
            return Ok(PeakPair {
                low: top.min(other),
                high: top.max(other),
            });
        }
    }
    Err(PeakError::TooFewPeaks { found, min_separation })
}

/// Running count / mean / sum of squared deviations; merges exactly when
/// both sides have the same mean.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Moments<T> {
    n: usize,
    mean: T,
    m2: T,
}

impl<T: Scalar> Moments<T> {
    fn new() -> Self {
        Self {
            n: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    fn push(&mut self, v: T) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / T::from_usize_lossy(self.n);
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let (na, nb, nn) = (
            T::from_usize_lossy(self.n),
            T::from_usize_lossy(other.n),
            T::from_usize_lossy(n),
        );
        let delta = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * nb / nn,
            m2: self.m2 + other.m2 + delta * delta * na * nb / nn,
        }
    }

    fn std(self) -> T {
        if self.n == 0 {
            return T::zero();
        }
        (self.m2.max(T::zero()) / T::from_usize_lossy(self.n)).sqrt()
    }
}

/// Sums of unit vectors for directional (hue) statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CircularMoments<T> {
    n: usize,
    cos: T,
    sin: T,
}

impl<T: Scalar> CircularMoments<T> {
    fn new() -> Self {
        Self {
            n: 0,
            cos: T::zero(),
            sin: T::zero(),
        }
    }

    fn push(&mut self, degrees: T) {
        let (s, c) = degrees.to_radians().sin_cos();
        self.n += 1;
        self.cos += c;
        self.sin += s;
    }

    fn merge(self, other: Self) -> Self {
        Self {
            n: self.n + other.n,
            cos: self.cos + other.cos,
            sin: self.sin + other.sin,
        }
    }

    fn mean_degrees(self) -> T {
        if self.n == 0 {
            return T::zero();
        }
        let full = T::lit(360.0);
        let mut m = self.sin.atan2(self.cos).to_degrees();
        if m < T::zero() {
            m += full;
        }
        if m >= full {
            m -= full;
        }
        m
    }

    /// Circular standard deviation `sqrt(-2 ln R)`, in degrees.
    fn std_degrees(self) -> T {
        if self.n == 0 {
            return T::zero();
        }
        let r = (self.cos.hypot(self.sin) / T::from_usize_lossy(self.n)).min(T::one());
        if r <= T::zero() {
            // uniform spread: the deviation is unbounded, report a half turn
            return T::lit(180.0);
        }
        (T::lit(-2.0) * r.ln()).max(T::zero()).sqrt().to_degrees()
    }
}

/// Sufficient statistics for one pixel class, mergeable across plates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassAccumulator<T> {
    linear: [Moments<T>; 6],
    hue: CircularMoments<T>,
}

impl<T: Scalar> Default for ClassAccumulator<T> {
    fn default() -> Self {
        Self {
            linear: [Moments::new(); 6],
            hue: CircularMoments::new(),
        }
    }
}

impl<T: Scalar> ClassAccumulator<T> {
    pub fn push(&mut self, rgb: RgbPixel<T>, hsi: HsiPixel<T>) {
        for ch in Channel::ALL {
            if ch == Channel::H {
                self.hue.push(hsi.h);
            } else {
                self.linear[ch.index()].push(ch.value(rgb, hsi));
            }
        }
    }

    pub fn merge(self, other: Self) -> Self {
        let mut linear = self.linear;
        for (a, b) in linear.iter_mut().zip(other.linear) {
            *a = a.merge(b);
        }
        Self {
            linear,
            hue: self.hue.merge(other.hue),
        }
    }

    pub fn count(&self) -> usize {
        self.hue.n
    }

    pub fn finish(&self) -> ClassStats<T> {
        let mut mean = [T::zero(); 6];
        let mut std = [T::zero(); 6];
        for ch in Channel::ALL {
            let k = ch.index();
            if ch == Channel::H {
                mean[k] = self.hue.mean_degrees();
                std[k] = self.hue.std_degrees();
            } else {
                mean[k] = self.linear[k].mean;
                std[k] = self.linear[k].std();
            }
        }
        ClassStats {
            count: self.count(),
            mean,
            std,
        }
    }

    /// Bit pattern used to put accumulators in a canonical order before pooling.
    fn sort_key(&self) -> Vec<u64> {
        let mut key = vec![self.count() as u64];
        for m in &self.linear {
            key.push(m.mean.to_f64_lossy().to_bits());
            key.push(m.m2.to_f64_lossy().to_bits());
        }
        key.push(self.hue.cos.to_f64_lossy().to_bits());
        key.push(self.hue.sin.to_f64_lossy().to_bits());
        key
    }
}

/// Mean and standard deviation of every channel for one class, indexed by
/// [`Channel::index`]. Hue uses circular statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassStats<T> {
    pub count: usize,
    pub mean: [T; 6],
    pub std: [T; 6],
}

impl<T: Scalar> ClassStats<T> {
    pub fn mean_of(&self, ch: Channel) -> T {
        self.mean[ch.index()]
    }

    pub fn std_of(&self, ch: Channel) -> T {
        self.std[ch.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats<T> {
    /// Bright plate background.
    pub background: ClassStats<T>,
    /// Dark characters.
    pub character: ClassStats<T>,
}

/// Accumulates one plate's background and character pixels given the
/// intensity split.
pub fn class_accumulators<T: Scalar>(
    plate: &Image<T>,
    intensity_split: PeakPair,
    bins: usize,
) -> (ClassAccumulator<T>, ClassAccumulator<T>) {
    let low_center: T = Channel::I.bin_center(intensity_split.low, bins);
    let high_center: T = Channel::I.bin_center(intensity_split.high, bins);
    let mut background = ClassAccumulator::default();
    let mut character = ClassAccumulator::default();
    for &rgb in plate.pixels() {
        let hsi = rgb.to_hsi();
        if (hsi.i - low_center).abs() < (hsi.i - high_center).abs() {
            character.push(rgb, hsi);
        } else {
            background.push(rgb, hsi);
        }
    }
    (background, character)
}

/// Per-class channel statistics of one plate, classes split on intensity.
pub fn class_stats<T: Scalar>(plate: &Image<T>, intensity_split: PeakPair, bins: usize) -> ChannelStats<T> {
    let (bg, ch) = class_accumulators(plate, intensity_split, bins);
    ChannelStats {
        background: bg.finish(),
        character: ch.finish(),
    }
}

/// Intensity split of a single plate.
pub fn plate_split<T: Scalar>(plate: &Image<T>, params: &AnalysisParams) -> Result<PeakPair, StatsError> {
    let hist = channel_histogram(plate, Channel::I, params.bins)?;
    two_peak_split(&hist, params.min_peak_separation).map_err(|source| StatsError::Peak { index: 0, source })
}

/// Which pixel class supplies the segmentation seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlateClass {
    #[default]
    Background,
    Character,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelSeed<T> {
    pub seed: T,
    pub tolerance: T,
}

/// Segmentation seeds (class means) and tolerances (class standard deviations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedConfig<T> {
    pub channels: [ChannelSeed<T>; 6],
    pub class: PlateClass,
}

impl<T: Scalar> SeedConfig<T> {
    pub fn from_class_stats(stats: &ClassStats<T>, class: PlateClass) -> Self {
        let mut channels = [ChannelSeed::default(); 6];
        for ch in Channel::ALL {
            channels[ch.index()] = ChannelSeed {
                seed: stats.mean_of(ch),
                tolerance: stats.std_of(ch),
            };
        }
        Self { channels, class }
    }

    /// Seeds only H and S, which is all segmentation reads.
    pub fn from_hue_saturation(h: T, tol_h: T, s: T, tol_s: T) -> Self {
        let mut channels = [ChannelSeed::default(); 6];
        channels[Channel::H.index()] = ChannelSeed { seed: h, tolerance: tol_h };
        channels[Channel::S.index()] = ChannelSeed { seed: s, tolerance: tol_s };
        Self {
            channels,
            class: PlateClass::Background,
        }
    }

    pub fn get(&self, ch: Channel) -> ChannelSeed<T> {
        self.channels[ch.index()]
    }

    pub fn set(&mut self, ch: Channel, seed: ChannelSeed<T>) {
        self.channels[ch.index()] = seed;
    }

    pub fn hue(&self) -> ChannelSeed<T> {
        self.get(Channel::H)
    }

    pub fn saturation(&self) -> ChannelSeed<T> {
        self.get(Channel::S)
    }

    pub fn is_valid(&self) -> bool {
        Channel::ALL.into_iter().all(|ch| {
            let c = self.get(ch);
            let max = T::lit(ch.range_max());
            let seed_ok = if ch == Channel::H { c.seed < max } else { c.seed <= max };
            c.tolerance >= T::zero() && c.seed >= T::zero() && seed_ok
        })
    }
}

/// Seeds from a plate corpus with the default analysis parameters.
pub fn derive_seed_config<T: Scalar>(plates: &[Image<T>]) -> Result<SeedConfig<T>, StatsError> {
    derive_seed_config_with(plates, &AnalysisParams::default())
}

/// Pools the background class of every plate (weighted by pixel count) into
/// seeds and tolerances. The result does not depend on plate order.
pub fn derive_seed_config_with<T: Scalar>(plates: &[Image<T>], params: &AnalysisParams) -> Result<SeedConfig<T>, StatsError> {
    if plates.is_empty() {
        return Err(StatsError::NoPlates);
    }
    if params.bins < 2 {
        return Err(StatsError::TooFewBins(params.bins));
    }
    let mut per_plate = Vec::with_capacity(plates.len());
    for (index, plate) in plates.iter().enumerate() {
        let split = plate_split(plate, params).map_err(|e| match e {
            StatsError::Peak { source, .. } => StatsError::Peak { index, source },
            other => other,
        })?;
        let (bg, _) = class_accumulators(plate, split, params.bins);
        per_plate.push(bg);
    }
    per_plate.sort_by_cached_key(|a| a.sort_key());
    let pooled = per_plate
        .into_iter()
        .fold(ClassAccumulator::default(), ClassAccumulator::merge);
    Ok(SeedConfig::from_class_stats(&pooled.finish(), PlateClass::Background))
}
