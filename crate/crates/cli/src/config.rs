//! Flat `key = value` run configuration.
//!
//! ```text
//! # seeds written by analyze-plates
//! seed.h = 50.1
//! tol.h = 4.2
//! seed.s = 0.87
//! tol.s = 0.11
//! th.c_th = 100
//! ```
//!
//! Keys not present keep their defaults. Seeds for all six channels may be
//! given, but localization needs at least `seed.h`, `tol.h`, `seed.s` and
//! `tol.s`.

use std::fmt::Write as _;

use plateloc::eval::DEFAULT_IOU_MIN;
use plateloc::stats::PlateClass;
use plateloc::{Channel, ChannelSeed, PipelineConfig, SceneParams, SeedConfig};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` until the config supplies hue and saturation seeds.
    pub seeds: Option<SeedConfig<f64>>,
    pub pipeline: PipelineConfig<f64>,
    pub iou_min: f64,
    pub synth: SceneParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seeds: None,
            pipeline: PipelineConfig::default(),
            iou_min: DEFAULT_IOU_MIN,
            synth: SceneParams::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seeds = SeedConfig::<f64> {
            channels: [ChannelSeed::default(); 6],
            class: PlateClass::Background,
        };
        let mut seen_seed = [false; 6];
        let mut seen_tol = [false; 6];

        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| CliError::Config { line: k + 1, message };
            let (key, value) = line
                .split_once('=')
                .map(|(a, b)| (a.trim(), b.trim()))
                .ok_or_else(|| bad(format!("expected `key = value`, got {line:?}")))?;
            let float = || value.parse::<f64>().map_err(|_| bad(format!("{key}: not a number: {value:?}")));
            let int = || value.parse::<usize>().map_err(|_| bad(format!("{key}: not a non-negative integer: {value:?}")));
            let flag = || match value {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(bad(format!("{key}: expected true or false, got {value:?}"))),
            };

            let th = &mut cfg.pipeline.thresholds;
            let sp = &mut cfg.synth;
            match key {
                "seed.class" => {
                    seeds.class = match value {
                        "background" => PlateClass::Background,
                        "character" => PlateClass::Character,
                        _ => return Err(bad(format!("seed.class: expected background or character, got {value:?}"))),
                    }
                }
                "th.c_th" => th.c_th = float()?,
                "th.min_area_px" => th.min_area_px = int()?,
                "th.aspect_min" => th.aspect_min = float()?,
                "th.aspect_max" => th.aspect_max = float()?,
                "th.c_diff" => th.c_diff = float()?,
                "th.max_fractional_area" => th.max_fractional_area = float()?,
                "pre.saturation_factor" => cfg.pipeline.preprocess.saturation_factor = float()?,
                "seg.min_component_size" => cfg.pipeline.min_component_size = int()?,
                "eval.iou_min" => cfg.iou_min = float()?,
                "synth.width" => sp.width = int()?,
                "synth.height" => sp.height = int()?,
                "synth.plate_count" => sp.plate_count = int()?,
                "synth.noise_sigma" => sp.noise_sigma = float()?,
                "synth.salt_pepper" => sp.salt_pepper = float()?,
                "synth.illumination_min" => sp.illumination.0 = float()?,
                "synth.illumination_max" => sp.illumination.1 = float()?,
                "synth.illumination_gradient" => sp.illumination_gradient = float()?,
                "synth.distractor_count" => sp.distractor_count = int()?,
                "synth.chroma_subsampling" => sp.chroma_subsampling = flag()?,
                "synth.yellow_body" => sp.yellow_body = flag()?,
                _ => {
                    let (kind, ch) = key
                        .split_once('.')
                        .and_then(|(kind, c)| Channel::from_name(c).map(|ch| (kind, ch)))
                        .ok_or_else(|| bad(format!("unknown key {key:?}")))?;
                    let slot = &mut seeds.channels[ch.index()];
                    match kind {
                        "seed" => {
                            slot.seed = float()?;
                            seen_seed[ch.index()] = true;
                        }
                        "tol" => {
                            slot.tolerance = float()?;
                            seen_tol[ch.index()] = true;
                        }
                        _ => return Err(bad(format!("unknown key {key:?}"))),
                    }
                }
            }
        }

        let needed = [Channel::H, Channel::S];
        let any = seen_seed.iter().chain(&seen_tol).any(|&b| b);
        if any {
            for ch in needed {
                for (seen, kind) in [(&seen_seed, "seed"), (&seen_tol, "tol")] {
                    if !seen[ch.index()] {
                        return Err(CliError::InvalidConfig(format!("seeds given but {kind}.{} is missing", ch.name())));
                    }
                }
            }
            if !seeds.is_valid() {
                return Err(CliError::InvalidConfig("seed values out of range or negative tolerance".into()));
            }
            cfg.seeds = Some(seeds);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigUnreadable {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| CliError::InFile {
            path: path.to_path_buf(),
            source: Box::new(e),
        })
    }

    fn validate(&self) -> Result<(), CliError> {
        let err = |message: String| Err(CliError::InvalidConfig(message));
        if let Err(e) = self.pipeline.thresholds.validate() {
            return err(e.to_string());
        }
        if !(self.pipeline.preprocess.saturation_factor >= 1.0) {
            return err("pre.saturation_factor must be >= 1".into());
        }
        if !(self.iou_min > 0.0 && self.iou_min <= 1.0) {
            return err("eval.iou_min must lie in (0, 1]".into());
        }
        Ok(())
    }

    pub fn require_seeds(&self) -> Result<&SeedConfig<f64>, CliError> {
        self.seeds.as_ref().ok_or_else(|| {
            CliError::InvalidConfig("no seeds configured (seed.h, tol.h, seed.s, tol.s); run analyze-plates first".into())
        })
    }
}

/// Config text holding every key, seeds first when present.
pub fn format_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    if let Some(seeds) = &cfg.seeds {
        let class = match seeds.class {
            PlateClass::Background => "background",
            PlateClass::Character => "character",
        };
        writeln!(s, "seed.class = {class}").unwrap();
        for ch in Channel::ALL {
            let c = seeds.get(ch);
            writeln!(s, "seed.{} = {}", ch.name(), c.seed).unwrap();
            writeln!(s, "tol.{} = {}", ch.name(), c.tolerance).unwrap();
        }
    }
    let th = &cfg.pipeline.thresholds;
    writeln!(s, "th.c_th = {}", th.c_th).unwrap();
    writeln!(s, "th.min_area_px = {}", th.min_area_px).unwrap();
    writeln!(s, "th.aspect_min = {}", th.aspect_min).unwrap();
    writeln!(s, "th.aspect_max = {}", th.aspect_max).unwrap();
    writeln!(s, "th.c_diff = {}", th.c_diff).unwrap();
    writeln!(s, "th.max_fractional_area = {}", th.max_fractional_area).unwrap();
    writeln!(s, "pre.saturation_factor = {}", cfg.pipeline.preprocess.saturation_factor).unwrap();
    writeln!(s, "seg.min_component_size = {}", cfg.pipeline.min_component_size).unwrap();
    writeln!(s, "eval.iou_min = {}", cfg.iou_min).unwrap();
    let sp = &cfg.synth;
    writeln!(s, "synth.width = {}", sp.width).unwrap();
    writeln!(s, "synth.height = {}", sp.height).unwrap();
    writeln!(s, "synth.plate_count = {}", sp.plate_count).unwrap();
    writeln!(s, "synth.noise_sigma = {}", sp.noise_sigma).unwrap();
    writeln!(s, "synth.salt_pepper = {}", sp.salt_pepper).unwrap();
    writeln!(s, "synth.illumination_min = {}", sp.illumination.0).unwrap();
    writeln!(s, "synth.illumination_max = {}", sp.illumination.1).unwrap();
    writeln!(s, "synth.illumination_gradient = {}", sp.illumination_gradient).unwrap();
    writeln!(s, "synth.distractor_count = {}", sp.distractor_count).unwrap();
    writeln!(s, "synth.chroma_subsampling = {}", sp.chroma_subsampling).unwrap();
    writeln!(s, "synth.yellow_body = {}", sp.yellow_body).unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_when_empty() {
        let cfg = RunConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert!(cfg.require_seeds().is_err());
    }

    #[test]
    fn seeds_round_trip() {
        let mut seeds = SeedConfig::from_hue_saturation(49.871234567, 4.1, 0.8712, 0.1084);
        seeds.set(Channel::R, ChannelSeed { seed: 0.7, tolerance: 0.05 });
        let mut cfg = RunConfig {
            seeds: Some(seeds),
            ..RunConfig::default()
        };
        cfg.pipeline.thresholds.c_diff = 0.15;
        cfg.synth.illumination = (0.1, 0.9);
        let text = format_config(&cfg);
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        let plain = RunConfig::default();
        assert_eq!(RunConfig::parse(&format_config(&plain)).unwrap(), plain);
    }

    #[test]
    fn thresholds_and_flags() {
        let cfg = RunConfig::parse(
            "th.c_th = 80\nth.min_area_px=1500\nth.c_diff = 0.3 # wider band\nseg.min_component_size = 10\neval.iou_min = 0.7\nsynth.chroma_subsampling = false\n",
        )
        .unwrap();
        assert_eq!(cfg.pipeline.thresholds.c_th, 80.0);
        assert_eq!(cfg.pipeline.thresholds.min_area_px, 1500);
        assert_eq!(cfg.pipeline.thresholds.c_diff, 0.3);
        assert_eq!(cfg.pipeline.min_component_size, 10);
        assert_eq!(cfg.iou_min, 0.7);
        assert!(!cfg.synth.chroma_subsampling);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(RunConfig::parse("th.c_th = 1\nbogus = 3"), Err(CliError::Config { line: 2, .. })));
        assert!(matches!(RunConfig::parse("th.c_th = abc"), Err(CliError::Config { line: 1, .. })));
        assert!(matches!(RunConfig::parse("just words"), Err(CliError::Config { line: 1, .. })));
        assert!(RunConfig::parse("seed.h = 50\ntol.h = 3\nseed.s = 0.8").is_err());
        assert!(RunConfig::parse("th.c_diff = 2").is_err());
        assert!(RunConfig::parse("eval.iou_min = 0").is_err());
        assert!(RunConfig::parse("seed.h = 400\ntol.h = 3\nseed.s = 0.8\ntol.s = 0.1").is_err());
    }
}
