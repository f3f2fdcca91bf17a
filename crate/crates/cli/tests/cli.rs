use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use plateloc::eval::parse_ground_truth;
use plateloc::synth::rgb8_hue_saturation;
use plateloc::{circular_hue_distance, localize_plates, synth_generate, PixelBox, RgbImage, SceneParams, SeedConfig, Tier};
use plateloc_cli::commands::{cmd_synth, scene_id, METRICS_FILE, RESULTS_FILE};
use plateloc_cli::imageio::{read_image, write_image};
use plateloc_cli::{format_records, parse_records, ImageRecords, RunConfig};

fn plateloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plateloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn seeds_config(dir: &Path, scene: &plateloc::Scene<f64>) -> PathBuf {
    let (h, sat) = rgb8_hue_saturation(scene.plates[0].background);
    let cfg = RunConfig {
        seeds: Some(SeedConfig::from_hue_saturation(h, 4.0, sat * 1.1, 0.06)),
        ..RunConfig::default()
    };
    let path = dir.join("seeds.conf");
    fs::write(&path, plateloc_cli::config::format_config(&cfg)).unwrap();
    path
}

#[test]
fn synth_is_deterministic_and_complete() {
    let t = tempfile::tempdir().unwrap();
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    for d in [&a, &b] {
        let out = plateloc(&["synth", "--count", "3", "--seed", "7", "--out", s(d), "--crops"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(dir_bytes(&a), dir_bytes(&b));
    assert_eq!(dir_bytes(&a.join("plates")), dir_bytes(&b.join("plates")));
    let truth = parse_ground_truth(&fs::read_to_string(a.join("truth.txt")).unwrap()).unwrap();
    let ids: Vec<_> = truth.iter().map(|g| g.image_id.clone()).collect();
    assert_eq!(ids, ["scene_00007", "scene_00008", "scene_00009"]);
    for g in &truth {
        assert_eq!(g.boxes.len(), 1);
        let scene = synth_generate::<f64>(g.image_id[6..].parse().unwrap(), &SceneParams::default()).unwrap();
        assert_eq!(g.boxes, scene.truth_boxes());
        assert_eq!(read_image(&a.join(format!("{}.png", g.image_id))).unwrap(), scene.image);
        assert_eq!(read_image(&a.join("plates").join(format!("{}_0.png", g.image_id))).unwrap(), scene.plate_crops()[0]);
    }
    assert_eq!(plateloc(&["synth", "--count", "0", "--out", s(&a)]).status.code(), Some(2));
}

#[test]
fn preprocess_batch_isolates_bad_files() {
    let t = tempfile::tempdir().unwrap();
    let input = t.path().join("in");
    fs::create_dir(&input).unwrap();
    let gray = RgbImage::filled(9, 7, plateloc::Rgb::new(0.4, 0.4, 0.4)).unwrap();
    write_image(&input.join("flat.png"), &gray).unwrap();
    write_image(&input.join("other.png"), &gray).unwrap();
    fs::write(input.join("broken.png"), b"not a png").unwrap();
    let out_dir = t.path().join("out");

    let out = plateloc(&["preprocess", s(&input), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("broken.png"), "{stderr}");
    assert!(fs::read_to_string(out_dir.join("errors.txt")).unwrap().contains("broken.png"));
    let flat = read_image(&out_dir.join("flat.png")).unwrap();
    assert_eq!((flat.width(), flat.height()), (9, 7));
    assert!(flat.pixels().iter().all(|p| p.to_rgb8() == [255, 255, 255]));
    assert!(out_dir.join("other.png").exists());

    fs::remove_file(input.join("broken.png")).unwrap();
    let out = plateloc(&["preprocess", s(&input), "--out", s(&out_dir)]);
    assert!(out.status.success());
    assert!(!out_dir.join("errors.txt").exists());
}

#[test]
fn localize_matches_library_call() {
    let t = tempfile::tempdir().unwrap();
    cmd_synth(2, 40, &SceneParams::default(), t.path(), false).unwrap();
    let scene = synth_generate::<f64>(40, &SceneParams::default()).unwrap();
    let conf = seeds_config(t.path(), &scene);
    let out_dir = t.path().join("res");
    let out = plateloc(&["--config", s(&conf), "localize", s(t.path()), "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let cfg = RunConfig::load(&conf).unwrap();
    let text = fs::read_to_string(out_dir.join(RESULTS_FILE)).unwrap();
    let mut expected = Vec::new();
    for seed in [40, 41] {
        let id = scene_id(seed);
        let img = read_image(&t.path().join(format!("{id}.png"))).unwrap();
        let r = localize_plates(&img, cfg.seeds.as_ref().unwrap(), &cfg.pipeline).unwrap();
        expected.push(ImageRecords::from_result(&id, &r));
    }
    assert_eq!(text, format_records(&expected));
    assert_eq!(parse_records(&text).unwrap(), expected);
    assert!(!expected[0].plates().is_empty());
}

#[test]
fn overlays_do_not_change_records() {
    let t = tempfile::tempdir().unwrap();
    cmd_synth(1, 3, &SceneParams::default(), t.path(), false).unwrap();
    let scene = synth_generate::<f64>(3, &SceneParams::default()).unwrap();
    let conf = seeds_config(t.path(), &scene);
    let input = t.path().join("scene_00003.png");
    let (plain, drawn) = (t.path().join("plain"), t.path().join("drawn"));
    assert!(plateloc(&["--config", s(&conf), "localize", s(&input), "--out", s(&plain)]).status.success());
    assert!(plateloc(&["--config", s(&conf), "localize", s(&input), "--out", s(&drawn), "--overlay"]).status.success());
    assert_eq!(fs::read(plain.join(RESULTS_FILE)).unwrap(), fs::read(drawn.join(RESULTS_FILE)).unwrap());

    let records = parse_records(&fs::read_to_string(drawn.join(RESULTS_FILE)).unwrap()).unwrap();
    let b3 = records[0].plates()[0];
    for tier in ["b1", "b2", "b3"] {
        let img = read_image(&drawn.join(format!("scene_00003_{tier}.png"))).unwrap();
        assert_eq!((img.width(), img.height()), (scene.image.width(), scene.image.height()));
    }
    let panel = read_image(&drawn.join("scene_00003_b3.png")).unwrap();
    assert_eq!(panel.get(b3.x_min, b3.y_min).to_rgb8(), [255, 0, 0]);
    assert_eq!(panel.get(b3.x_min + 2, (b3.y_min + b3.y_max) / 2).to_rgb8(), [255, 0, 0]);
}

#[test]
fn no_plate_image_gives_empty_b3() {
    let t = tempfile::tempdir().unwrap();
    let img = RgbImage::filled(120, 80, plateloc::Rgb::new(0.45, 0.45, 0.47)).unwrap();
    let input = t.path().join("road.png");
    write_image(&input, &img).unwrap();
    let cfg = RunConfig {
        seeds: Some(SeedConfig::from_hue_saturation(50.0, 4.0, 0.9, 0.06)),
        ..RunConfig::default()
    };
    let conf = t.path().join("c.conf");
    fs::write(&conf, plateloc_cli::config::format_config(&cfg)).unwrap();
    let out = plateloc(&["--config", s(&conf), "localize", s(&input), "--out", s(t.path())]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(t.path().join(RESULTS_FILE)).unwrap(), "road\n");
}

#[test]
fn config_problems_are_usage_errors() {
    let t = tempfile::tempdir().unwrap();
    let missing = t.path().join("nope.conf");
    let out = plateloc(&["--config", s(&missing), "synth", "--out", s(t.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.conf"));
    let bad = t.path().join("bad.conf");
    fs::write(&bad, "th.c_th = 100\nth.bogus = 1\n").unwrap();
    let out = plateloc(&["--config", s(&bad), "synth", "--out", s(t.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let img = t.path().join("x.png");
    write_image(&img, &RgbImage::filled(5, 5, plateloc::Rgb::new(0.1, 0.2, 0.3)).unwrap()).unwrap();
    let out = plateloc(&["localize", s(&img), "--out", s(t.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no seeds"));
    assert_eq!(plateloc(&["localize"]).status.code(), Some(2));
}

#[test]
fn analyze_plates_recovers_generator_colors() {
    let t = tempfile::tempdir().unwrap();
    let truth = cmd_synth(12, 500, &SceneParams::default(), t.path(), true).unwrap();
    let conf = t.path().join("out").join("seeds.conf");
    let out = plateloc(&["analyze-plates", s(&t.path().join("plates")), "--out", s(&conf)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cfg = RunConfig::load(&conf).unwrap();
    let seeds = cfg.seeds.unwrap();

    // Generator truth: pixel-count weighted plate background colors. Hue is
    // kept by preprocessing and saturation is boosted by the configured factor.
    let (mut w, mut sx, mut sy, mut ss) = (0.0, 0.0, 0.0, 0.0);
    for g in &truth {
        let scene = synth_generate::<f64>(g.image_id[6..].parse().unwrap(), &SceneParams::default()).unwrap();
        let p = &scene.plates[0];
        let n = (p.bbox.width() * p.bbox.height()) as f64;
        let (h, sat) = rgb8_hue_saturation(p.background);
        sx += n * h.to_radians().cos();
        sy += n * h.to_radians().sin();
        ss += n * sat;
        w += n;
    }
    let h_truth = sy.atan2(sx).to_degrees().rem_euclid(360.0);
    let s_truth = (1.1 * ss / w).min(1.0);
    let h = seeds.hue();
    let sat = seeds.saturation();
    assert!(circular_hue_distance(h.seed, h_truth) < 2.0, "{} vs {h_truth}", h.seed);
    assert!((sat.seed - s_truth).abs() < 0.05, "{} vs {s_truth}", sat.seed);
    assert!(h.tolerance > 0.0 && sat.tolerance > 0.0);
}

#[test]
fn analyze_plates_edge_cases() {
    let t = tempfile::tempdir().unwrap();
    let empty = t.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = plateloc(&["analyze-plates", s(&empty), "--out", s(&t.path().join("x.conf"))]);
    assert!(!out.status.success());

    cmd_synth(1, 900, &SceneParams::default(), t.path(), true).unwrap();
    let one = t.path().join("plates").join("scene_00900_0.png");
    let conf = t.path().join("one.conf");
    assert!(plateloc(&["analyze-plates", s(&one), "--out", s(&conf)]).status.success());
    assert!(RunConfig::load(&conf).unwrap().seeds.unwrap().is_valid());

    let flat = t.path().join("flat.png");
    write_image(&flat, &RgbImage::filled(60, 20, plateloc::Rgb::new(0.9, 0.8, 0.1)).unwrap()).unwrap();
    let out = plateloc(&["analyze-plates", s(&one), s(&flat), "--out", s(&conf)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flat.png"));
}

fn write_results(dir: &Path, rows: &[(&str, Vec<PixelBox>)]) -> PathBuf {
    let records: Vec<ImageRecords> = rows
        .iter()
        .map(|(id, boxes)| ImageRecords {
            image_id: id.to_string(),
            boxes: boxes
                .iter()
                .map(|b| plateloc_cli::BoxRecord {
                    bbox: b.with_tier(Tier::B3),
                    aspect: 1.0,
                    area: 1,
                    frac: 0.0,
                    contrast: Some(1.0),
                })
                .collect(),
        })
        .collect();
    let path = dir.join(RESULTS_FILE);
    fs::write(&path, format_records(&records)).unwrap();
    path
}

#[test]
fn evaluate_counts_classes() {
    let t = tempfile::tempdir().unwrap();
    let b = |x: usize, y: usize| PixelBox::new(x, y, x + 99, y + 29, Tier::B3);
    let truth = t.path().join("truth.txt");
    fs::write(&truth, "a 10 10 109 39\nb 200 50 299 79\nc 0 0 99 29\nd\n").unwrap();
    let results = write_results(
        t.path(),
        &[("a", vec![b(10, 10)]), ("b", vec![b(200, 50), b(400, 400)]), ("c", vec![b(60, 0)]), ("d", vec![])],
    );
    let out = plateloc(&["evaluate", s(&results), s(&truth)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("true positive     50.0% (2)"), "{stdout}");
    assert!(stdout.contains("false positive    25.0% (1)"));
    assert!(stdout.contains("false negative    25.0% (1)"));
    let metrics = fs::read_to_string(t.path().join(METRICS_FILE)).unwrap();
    assert!(metrics.contains("tp_rate 0.5\n") && metrics.contains("combined_positive 0.75\n"), "{metrics}");

    let out = plateloc(&["evaluate", s(&results), s(&truth), "--iou-min", "1"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("true positive     50.0% (2)"));
    assert_eq!(plateloc(&["evaluate", s(&results), s(&truth), "--iou-min", "1.5"]).status.code(), Some(2));
}

#[test]
fn evaluate_rejects_mismatched_ids() {
    let t = tempfile::tempdir().unwrap();
    let truth = t.path().join("truth.txt");
    fs::write(&truth, "a 0 0 9 9\nb 0 0 9 9\n").unwrap();
    let results = write_results(t.path(), &[("a", vec![]), ("z", vec![])]);
    let out = plateloc(&["evaluate", s(&results), s(&truth)]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing from results: [b]") && stderr.contains("missing from truth: [z]"), "{stderr}");

    let results = write_results(t.path(), &[("x", vec![])]);
    assert!(!plateloc(&["evaluate", s(&results), s(&truth)]).status.success());
}

#[test]
fn perfect_predictions_score_full_marks() {
    let t = tempfile::tempdir().unwrap();
    let truth = cmd_synth(4, 70, &SceneParams::default(), t.path(), false).unwrap();
    let rows: Vec<(&str, Vec<PixelBox>)> = truth.iter().map(|g| (g.image_id.as_str(), g.boxes.clone())).collect();
    let results = write_results(&t.path().join("."), &rows);
    let m = plateloc_cli::cmd_evaluate(&results, &t.path().join("truth.txt"), 0.5).unwrap();
    assert_eq!((m.total, m.true_positive), (4, 4));
    assert_eq!(m.tp_rate, 1.0);
}
