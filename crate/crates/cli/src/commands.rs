//! The five subcommands as library calls.
//!
//! Batch commands process images on the rayon pool and write outputs in
//! input order. A per-file failure is recorded in the returned
//! [`BatchReport`] and the batch carries on.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use plateloc::eval::{format_ground_truth, missing_ids, parse_ground_truth};
use plateloc::{
    classify_image, compute_metrics, derive_seed_config, localize_plates, preprocess, synth_generate, GroundTruth,
    Metrics, RgbImage, SceneParams, SeedConfig, StatsError, Tier,
};
use rayon::prelude::*;

use crate::config::{format_config, RunConfig};
use crate::imageio::{image_id, read_image, write_image, write_png};
use crate::overlay::draw_boxes;
use crate::records::{format_records, parse_records, ImageRecords};
use crate::CliError;

pub const RESULTS_FILE: &str = "results.txt";
pub const ERRORS_FILE: &str = "errors.txt";
pub const METRICS_FILE: &str = "metrics.txt";
pub const TRUTH_FILE: &str = "truth.txt";
pub const PLATES_DIR: &str = "plates";

#[derive(Debug, Default)]
pub struct BatchReport {
    pub processed: usize,
    pub failures: Failures,
}

impl BatchReport {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }
}

fn in_file(path: &Path, source: CliError) -> CliError {
    CliError::InFile {
        path: path.to_path_buf(),
        source: Box::new(source),
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub type Failures = Vec<(PathBuf, CliError)>;

/// Rejects the second and later inputs sharing an image id.
fn unique_ids(inputs: &[PathBuf]) -> (Vec<(PathBuf, String)>, Failures) {
    let mut seen = HashSet::new();
    let mut ok = Vec::new();
    let mut dup = Vec::new();
    for p in inputs {
        let id = image_id(p);
        if seen.insert(id.clone()) {
            ok.push((p.clone(), id));
        } else {
            dup.push((p.clone(), CliError::DuplicateId(id)));
        }
    }
    (ok, dup)
}

fn write_errors(out_dir: &Path, failures: &[(PathBuf, CliError)]) -> Result<(), CliError> {
    let path = out_dir.join(ERRORS_FILE);
    if failures.is_empty() {
        return match fs::remove_file(&path) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(CliError::Io { path, source: e }),
            _ => Ok(()),
        };
    }
    let mut s = String::new();
    for (p, e) in failures {
        writeln!(s, "{}\t{e}", p.display()).unwrap();
    }
    write_text(&path, &s)
}

/// Writes `<out_dir>/<id>.png` for each input.
pub fn cmd_preprocess(inputs: &[PathBuf], cfg: &RunConfig, out_dir: &Path) -> Result<BatchReport, CliError> {
    create_dir(out_dir)?;
    let (jobs, mut failures) = unique_ids(inputs);
    let outcomes: Vec<Result<(), CliError>> = jobs
        .par_iter()
        .map(|(path, id)| {
            let img = read_image(path)?;
            let out = preprocess(&img, &cfg.pipeline.preprocess).map_err(|e| in_file(path, e.into()))?;
            write_image(&out_dir.join(format!("{id}.png")), &out)
        })
        .collect();
    let mut report = BatchReport::default();
    for ((path, _), r) in jobs.iter().zip(outcomes) {
        match r {
            Ok(()) => report.processed += 1,
            Err(e) => failures.push((path.clone(), e)),
        }
    }
    write_errors(out_dir, &failures)?;
    report.failures = failures;
    Ok(report)
}

/// Derives seeds from plate crops and writes `cfg` with those seeds to
/// `out_config`. Every crop goes through the frame preprocessing first, so
/// the seeds describe plates the way segmentation will see them.
pub fn cmd_analyze_plates(plates: &[PathBuf], cfg: &RunConfig, out_config: &Path) -> Result<SeedConfig<f64>, CliError> {
    if plates.is_empty() {
        return Err(CliError::NoInputs);
    }
    let images: Vec<RgbImage> = plates
        .par_iter()
        .map(|p| {
            let img = read_image(p)?;
            preprocess(&img, &cfg.pipeline.preprocess).map_err(|e| in_file(p, e.into()))
        })
        .collect::<Result<_, _>>()?;
    let seeds = derive_seed_config(&images).map_err(|e| match e {
        StatsError::Peak { index, source } => CliError::Plate {
            path: plates[index].clone(),
            source,
        },
        other => CliError::Stats(other),
    })?;
    let mut out = cfg.clone();
    out.seeds = Some(seeds);
    let text = format!("# seeds from {} plate(s)\n{}", plates.len(), format_config(&out));
    if let Some(dir) = out_config.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_text(out_config, &text)?;
    Ok(seeds)
}

fn localize_one(path: &Path, id: &str, cfg: &RunConfig, seeds: &SeedConfig<f64>, overlay: Option<&Path>) -> Result<ImageRecords, CliError> {
    let img = read_image(path)?;
    let r = localize_plates(&img, seeds, &cfg.pipeline).map_err(|e| in_file(path, e.into()))?;
    let records = ImageRecords::from_result(id, &r);
    if let Some(dir) = overlay {
        let base = img.to_rgb8();
        let tiers: [(Tier, Vec<_>); 3] = [
            (Tier::B1, r.b1.clone()),
            (Tier::B2, r.b2.iter().map(|c| c.bbox).collect()),
            (Tier::B3, r.b3.iter().map(|c| c.bbox).collect()),
        ];
        for (tier, boxes) in tiers {
            let mut buf = base.clone();
            draw_boxes(&mut buf, img.width(), img.height(), &boxes, tier);
            let name = format!("{id}_{}.png", tier.as_str().to_ascii_lowercase());
            write_png(&dir.join(name), img.width(), img.height(), buf)?;
        }
    }
    Ok(records)
}

/// Writes `<out_dir>/results.txt` and, with `overlay`, `<id>_b1.png`,
/// `<id>_b2.png` and `<id>_b3.png` per image. Returns the report and the
/// records of the images that succeeded.
pub fn cmd_localize(
    inputs: &[PathBuf],
    cfg: &RunConfig,
    out_dir: &Path,
    overlay: bool,
) -> Result<(BatchReport, Vec<ImageRecords>), CliError> {
    let seeds = cfg.require_seeds()?;
    create_dir(out_dir)?;
    let (jobs, mut failures) = unique_ids(inputs);
    let overlay_dir = overlay.then_some(out_dir);
    let outcomes: Vec<Result<ImageRecords, CliError>> = jobs
        .par_iter()
        .map(|(path, id)| localize_one(path, id, cfg, seeds, overlay_dir))
        .collect();
    let mut records = Vec::with_capacity(jobs.len());
    for ((path, _), r) in jobs.iter().zip(outcomes) {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push((path.clone(), e)),
        }
    }
    write_text(&out_dir.join(RESULTS_FILE), &format_records(&records))?;
    write_errors(out_dir, &failures)?;
    let report = BatchReport {
        processed: records.len(),
        failures,
    };
    Ok((report, records))
}

pub fn format_metrics(m: &Metrics, iou_min: f64) -> String {
    let mut s = String::new();
    writeln!(s, "iou_min {iou_min}").unwrap();
    writeln!(s, "images {}", m.total).unwrap();
    writeln!(s, "true_positive {}", m.true_positive).unwrap();
    writeln!(s, "false_positive {}", m.false_positive).unwrap();
    writeln!(s, "false_negative {}", m.false_negative).unwrap();
    writeln!(s, "tp_rate {}", m.tp_rate).unwrap();
    writeln!(s, "fp_rate {}", m.fp_rate).unwrap();
    writeln!(s, "fn_rate {}", m.fn_rate).unwrap();
    writeln!(s, "combined_positive {}", m.combined_positive).unwrap();
    s
}

/// Scores B3 boxes of a result file against ground truth and writes
/// `metrics.txt` next to the results.
pub fn cmd_evaluate(results: &Path, truth: &Path, iou_min: f64) -> Result<Metrics, CliError> {
    let records = parse_records(&read_text(results)?).map_err(|e| in_file(results, e))?;
    let gt: Vec<GroundTruth> =
        parse_ground_truth(&read_text(truth)?).map_err(|e| in_file(truth, CliError::Eval(e)))?;

    let rec_ids = || records.iter().map(|r| r.image_id.as_str());
    let gt_ids = || gt.iter().map(|g| g.image_id.as_str());
    let missing_results = missing_ids(gt_ids(), rec_ids());
    let missing_truth = missing_ids(rec_ids(), gt_ids());
    if !missing_results.is_empty() || !missing_truth.is_empty() {
        return Err(CliError::IdMismatch {
            missing_from_results: missing_results,
            missing_from_truth: missing_truth,
        });
    }

    let outcomes = gt
        .iter()
        .map(|g| {
            let rec = records.iter().find(|r| r.image_id == g.image_id).expect("ids checked");
            classify_image(&rec.plates(), &g.boxes, iou_min)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let metrics = compute_metrics(&outcomes)?;
    let dir = results.parent().unwrap_or(Path::new(""));
    write_text(&dir.join(METRICS_FILE), &format_metrics(&metrics, iou_min))?;
    Ok(metrics)
}

/// Id of the scene generated from `seed`.
pub fn scene_id(seed: u64) -> String {
    format!("scene_{seed:05}")
}

/// Writes `count` scenes generated from seeds `seed..seed + count` plus
/// `truth.txt`. With `crops`, each plate is also cut out along its truth box
/// into `plates/<id>_<k>.png`. Returns the ground truth.
pub fn cmd_synth(
    count: usize,
    seed: u64,
    params: &SceneParams,
    out_dir: &Path,
    crops: bool,
) -> Result<Vec<GroundTruth>, CliError> {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    create_dir(out_dir)?;
    let plate_dir = out_dir.join(PLATES_DIR);
    if crops {
        create_dir(&plate_dir)?;
    }
    let truth: Vec<GroundTruth> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let s = seed.wrapping_add(k);
            let id = scene_id(s);
            let scene = synth_generate::<f64>(s, params)?;
            write_image(&out_dir.join(format!("{id}.png")), &scene.image)?;
            if crops {
                for (j, crop) in scene.plate_crops().iter().enumerate() {
                    write_image(&plate_dir.join(format!("{id}_{j}.png")), crop)?;
                }
            }
            Ok(GroundTruth {
                image_id: id,
                boxes: scene.truth_boxes(),
            })
        })
        .collect::<Result<_, CliError>>()?;
    write_text(&out_dir.join(TRUTH_FILE), &format_ground_truth(&truth))?;
    Ok(truth)
}
