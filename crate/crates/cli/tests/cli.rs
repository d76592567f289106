use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bvqa::{EvalReport, SvrModel};

fn bvqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bvqa")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = bvqa(args);
    assert!(out.status.success(), "bvqa {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn dataset(root: &Path, count: usize) -> PathBuf {
    ok(&["synth", "--out", s(root), "--count", &count.to_string(), "--frames", "8"]);
    root.join("manifest.csv")
}

#[test]
fn extract_is_idempotent_and_repairs_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let m = dataset(&dir.path().join("data"), 4);
    let cache = dir.path().join("cache");
    let args = ["extract", "--manifest", s(&m), "--kind", "nss,saliency", "--synthetic-models", "--cache-dir", s(&cache)];
    assert!(ok(&args).contains("extracted 8 feature(s), 0 cached"));
    assert!(ok(&args).contains("extracted 0 feature(s), 8 cached"));

    let victim = std::fs::read_dir(cache.join("NSS")).unwrap().next().unwrap().unwrap().path();
    let good = std::fs::read(&victim).unwrap();
    std::fs::write(&victim, &good[..good.len() / 2]).unwrap();
    assert!(ok(&args).contains("extracted 1 feature(s), 7 cached"));
    assert_eq!(std::fs::read(&victim).unwrap(), good);
}

#[test]
fn evaluate_reports_and_lists_missing_ids() {
    let dir = tempfile::tempdir().unwrap();
    let m = dataset(&dir.path().join("data"), 12);
    let cache = dir.path().join("cache");
    ok(&["extract", "--manifest", s(&m), "--kind", "nss", "--cache-dir", s(&cache)]);
    let out = dir.path().join("out");
    let eval = ["evaluate", "--manifest", s(&m), "--kind", "nss", "--cache-dir", s(&cache), "--iterations", "4", "--out", s(&out)];
    let table = ok(&eval);
    assert!(table.contains("NSS"));
    let report = EvalReport::from_json(&std::fs::read_to_string(out.join("manifest.NSS.json")).unwrap()).unwrap();
    assert_eq!(report.srcc.len(), 4);
    for v in [report.median.srcc, report.median.krcc, report.median.plcc, report.median.rmse] {
        assert!(v.is_finite());
    }
    assert!(report.std.rmse >= 0.0);
    assert!(std::fs::read_to_string(out.join("results.txt")).unwrap().contains("SRCC"));

    let gone = std::fs::read_dir(cache.join("NSS"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_str().unwrap().starts_with("clip_003."))
        .unwrap();
    std::fs::remove_file(gone).unwrap();
    let res = bvqa(&eval);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("clip_003") && !err.contains("clip_004"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bvqa(&["evaluate", "--kind", "nss"]).status.code(), Some(2));
    assert_eq!(bvqa(&["extract", "--manifest", "m.csv", "--kind", "nope"]).status.code(), Some(2));
    assert_eq!(bvqa(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let m = dataset(&dir.path().join("data"), 2);
    // CNN needs a graph source
    assert_eq!(bvqa(&["extract", "--manifest", s(&m), "--kind", "cnn"]).status.code(), Some(2));
}

#[test]
fn failing_video_gives_partial_exit() {
    let dir = tempfile::tempdir().unwrap();
    let m = dataset(&dir.path().join("data"), 3);
    let mut text = std::fs::read_to_string(&m).unwrap();
    std::fs::write(dir.path().join("data/broken.mp4"), b"not a video").unwrap();
    text.push_str("broken,broken.mp4,3.0,64,64,8\n");
    std::fs::write(&m, text).unwrap();
    let res = bvqa(&["extract", "--manifest", s(&m), "--kind", "nss", "--cache-dir", s(&dir.path().join("c"))]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("extracted 3 feature(s)"));
    assert!(String::from_utf8_lossy(&res.stderr).contains("broken"));
}

#[test]
fn train_writes_a_reloadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let m = dataset(&dir.path().join("data"), 10);
    let cache = dir.path().join("cache");
    ok(&["extract", "--manifest", s(&m), "--kind", "nss", "--cache-dir", s(&cache)]);
    let a = dir.path().join("a.bvqm");
    let b = dir.path().join("b.bvqm");
    for out in [&a, &b] {
        ok(&["train", "--manifest", s(&m), "--kind", "nss", "--cache-dir", s(&cache), "--seed", "3", "--out", s(out)]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let model = SvrModel::load(&a).unwrap();
    assert_eq!(model.dim(), 1836);
}

#[test]
fn visualize_feature_maps_and_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let m = dataset(&dir.path().join("data"), 2);
    let models = fixtures();
    let run = |out: &Path, extra: &[&str]| {
        let mut args = vec!["visualize", "--manifest", s(&m), "--video", "clip_001", "--frame", "2", "--models-dir", s(&models), "--out", s(out)];
        args.extend_from_slice(extra);
        ok(&args)
    };
    let a = dir.path().join("a");
    run(&a, &[]);
    let grid = image::open(a.join("conv_final_grid.png")).unwrap();
    assert_eq!((grid.width(), grid.height()), (8 * 8 - 1, 8 * 8 - 1));
    let channels = std::fs::read_dir(&a)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_str().unwrap().starts_with("conv_final_ch"))
        .count();
    assert_eq!(channels, 64);
    let b = dir.path().join("b");
    run(&b, &[]);
    assert_eq!(std::fs::read(a.join("conv_final_grid.png")).unwrap(), std::fs::read(b.join("conv_final_grid.png")).unwrap());

    let o = dir.path().join("overlay");
    run(&o, &["--saliency"]);
    let panel = image::open(o.join("saliency_overlay.png")).unwrap();
    assert_eq!((panel.width(), panel.height()), (3 * 224, 224));
    assert_eq!(std::fs::metadata(o.join("saliency.f32")).unwrap().len(), 224 * 224 * 4);

    let res = bvqa(&["visualize", "--manifest", s(&m), "--video", "clip_001", "--models-dir", s(&models), "--layer", "fc9", "--out", s(&a)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("unknown layer"));
}

#[test]
fn correlate_writes_csv_and_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let m = dataset(&dir.path().join("data"), 3);
    let out = dir.path().join("corr");
    ok(&["correlate", "--manifest", s(&m), "--models-dir", s(&fixtures()), "--out", s(&out)]);
    let csv = std::fs::read_to_string(out.join("manifest.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("video_id,frame_index,avg_cosine"));
    // 8 frames at 8 fps: one frame per clip at one frame per second
    assert_eq!(lines.count(), 3);
    let hist: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.histogram.json")).unwrap()).unwrap();
    assert_eq!(hist["counts"].as_array().unwrap().len(), 200);
    assert_eq!(hist["edges"].as_array().unwrap().len(), 201);
}

#[test]
fn bench_prints_every_kind() {
    let dir = tempfile::tempdir().unwrap();
    let m = dataset(&dir.path().join("data"), 2);
    let table = ok(&["bench", "--manifest", s(&m), "--synthetic-models", "--limit", "1"]);
    for kind in bvqa::FeatureKind::ALL {
        assert!(table.lines().any(|l| l.split_whitespace().next() == Some(kind.name())), "{kind} missing");
    }
    assert!(table.contains("(means over 1 video(s))"));
}
