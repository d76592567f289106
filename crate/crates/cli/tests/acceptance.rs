//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Every oracle here is written independently of the library code it checks.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bvqa::cnn::{InferenceGraph, SyntheticGraph};
use bvqa::correlation::windowed_cosine;
use bvqa::evaluation::{krcc, logistic_fit, plcc, rmse, srcc, LogisticParams};
use bvqa::nss::{fit_aggd, fit_ggd};
use bvqa::regression::{train_svr, Scaler};
use bvqa::saliency::{score_cam, SALIENCY_SIDE};
use bvqa::{EvalReport, FeatureKind, Frame};
use bvqa_cli::bench::BenchReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn bvqa(args: &[&str]) -> std::result::Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_bvqa"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "bvqa {} exited {}: {}",
            args.join(" "),
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const KIND_DIMS: [(&str, usize); 11] = [
    ("SALIENCY", 224),
    ("NSS", 1836),
    ("NSS_SALIENCY", 2060),
    ("NSS_CNN", 3884),
    ("NSS_CNN_SALIENCY", 4108),
    ("NSS_VSFACNN", 5932),
    ("NSS_VSFACNN_SALIENCY", 5932),
    ("CNN", 2048),
    ("CNN_SALIENCY", 2272),
    ("VSFACNN", 4096),
    ("VSFACNN_SALIENCY", 4096),
];

fn mini_dataset(root: &Path, count: usize) -> std::result::Result<(), String> {
    bvqa(&["synth", "--out", p(root), "--count", &count.to_string(), "--seed", "0"]).map(|_| ())
}

// ---------------------------------------------------------------- dims

fn dims(work: &Path) -> Check {
    let data = work.join("mini");
    let cache = work.join("mini-cache");
    mini_dataset(&data, 5)?;
    let m = data.join("manifest.csv");
    let out = bvqa(&["extract", "--manifest", p(&m), "--kind", "all", "--synthetic-models", "--cache-dir", p(&cache)])?;
    ensure(out.contains("extracted 55 feature(s)"), format!("unexpected extract summary: {out}"))?;
    let mut checked = 0;
    for (name, dim) in KIND_DIMS {
        let dir = cache.join(name);
        let files: Vec<_> = std::fs::read_dir(&dir).map_err(|e| format!("{}: {e}", dir.display()))?.collect();
        ensure(files.len() == 5, format!("{name}: {} cache files", files.len()))?;
        for f in files {
            let f = bvqa::cache::read_file(&f.unwrap().path()).map_err(|e| e.to_string())?;
            ensure(f.values.len() == dim, format!("{name}: dim {} != {dim}", f.values.len()))?;
            ensure(f.values.iter().all(|v| v.is_finite()), format!("{name}: non-finite value"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} cached vectors across 11 kinds have their contracted dims"))
}

// ---------------------------------------------------------------- GGD / AGGD

fn ggd_samples(alpha: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    // |x| = s·G^(1/α), G ~ Gamma(1/α, 1), random sign
    let g = Gamma::new(1.0 / alpha, 1.0).unwrap();
    let s = (statrs::function::gamma::gamma(1.0 / alpha) / statrs::function::gamma::gamma(3.0 / alpha)).sqrt();
    (0..n)
        .map(|_| {
            let m = s * g.sample(rng).powf(1.0 / alpha);
            if rng.random_bool(0.5) { m } else { -m }
        })
        .collect()
}

fn ggd_aggd() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0] {
        let fit = fit_ggd(&ggd_samples(alpha, 100_000, &mut rng)).map_err(|e| e.to_string())?;
        let rel = ((fit.alpha - alpha) / alpha).abs();
        ensure(rel <= 0.05, format!("alpha {alpha}: fitted {:.4}", fit.alpha))?;
        worst = worst.max(rel);
    }
    let n = Normal::new(0.0, 1.0).unwrap();
    let (left, right) = (1.5, 0.5);
    let skew: Vec<f64> = (0..100_000)
        .map(|_| {
            let z: f64 = n.sample(&mut rng);
            if z < 0.0 { left * z } else { right * z }
        })
        .collect();
    let a = fit_aggd(&skew).map_err(|e| e.to_string())?;
    let ratio = a.params.sigma_l / a.params.sigma_r;
    let rel_ratio = (ratio / (left / right) - 1.0).abs();
    ensure(rel_ratio <= 0.10, format!("AGGD ratio {ratio:.3}, expected {}", left / right))?;
    Ok(format!("worst alpha error {:.2}%, AGGD scale ratio {ratio:.3} (true 3)", 100.0 * worst))
}

// ---------------------------------------------------------------- logistic

fn logistic() -> Check {
    let truth = LogisticParams {
        beta1: 5.0,
        beta2: 1.0,
        beta3: 0.5,
        beta4: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let x: Vec<f64> = (0..500).map(|_| rng.random_range(-4.5..5.5)).collect();
    // the generating curve, written out
    let f = |v: f64| 1.0 + 4.0 / (1.0 + (-(v - 0.5)).exp());
    let y: Vec<f64> = x.iter().map(|&v| f(v) + noise.sample(&mut rng)).collect();
    let fit = logistic_fit(&x, &y).map_err(|e| e.to_string())?;
    let truth_curve: Vec<f64> = x.iter().map(|&v| f(v)).collect();
    ensure(rmse(&truth.map(&x), &truth_curve).unwrap() < 1e-12, "library curve disagrees with the generating curve")?;
    let curve_rmse = rmse(&fit.map(&x), &truth_curve).map_err(|e| e.to_string())?;
    ensure(curve_rmse <= 0.02, format!("curve RMSE {curve_rmse:.4}"))?;

    let xm: Vec<f64> = (0..300).map(|_| rng.random_range(-3.0..3.0)).collect();
    let ym: Vec<f64> = xm.iter().map(|v| v.tanh()).collect();
    let pm = logistic_fit(&xm, &ym).map_err(|e| e.to_string())?;
    let r = plcc(&pm.map(&xm), &ym).map_err(|e| e.to_string())?;
    ensure(r >= 0.999, format!("monotone PLCC {r:.5}"))?;
    Ok(format!("curve RMSE {curve_rmse:.4} (≤ 0.02), monotone PLCC {r:.6} (≥ 0.999)"))
}

// ---------------------------------------------------------------- rank metrics

fn brute_srcc(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|&x| {
                let lt = v.iter().filter(|&&y| y < x).count() as f64;
                let eq = v.iter().filter(|&&y| y == x).count() as f64;
                lt + (eq + 1.0) / 2.0
            })
            .collect()
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn brute_krcc(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let (mut s, mut ta, mut tb) = (0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let x = (a[i] > a[j]) as i64 - (a[i] < a[j]) as i64;
            let y = (b[i] > b[j]) as i64 - (b[i] < b[j]) as i64;
            s += x * y;
            ta += (x == 0) as i64;
            tb += (y == 0) as i64;
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    s as f64 / (((n0 - ta) * (n0 - tb)) as f64).sqrt()
}

fn rank_metrics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut done, mut worst) = (0, 0.0f64);
    while done < 200 {
        let n = rng.random_range(4..50);
        let la = rng.random_range(2..9);
        let lb = rng.random_range(2..9);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..la) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0..lb) as f64).collect();
        let (Ok(s), Ok(k)) = (srcc(&a, &b), krcc(&a, &b)) else { continue };
        worst = worst.max((s - brute_srcc(&a, &b)).abs()).max((k - brute_krcc(&a, &b)).abs());
        done += 1;
    }
    ensure(worst <= 1e-12, format!("max deviation {worst:e}"))?;
    let a: Vec<f64> = (0..50).map(|i| i as f64 * 0.3).collect();
    let b: Vec<f64> = a.iter().map(|x| x.powi(3) + 1.0).collect();
    let (s, k) = (srcc(&a, &b).unwrap(), krcc(&a, &b).unwrap());
    ensure(s == 1.0 && k == 1.0, format!("monotone gave SRCC {s}, KRCC {k}"))?;
    Ok(format!("200 tied vectors, max deviation {worst:.1e}; monotone SRCC = KRCC = 1 exactly"))
}

// ---------------------------------------------------------------- Score-CAM

const S: usize = SALIENCY_SIDE;

fn upsample(src: &[f32], w: usize, h: usize) -> Vec<f64> {
    let axis = |i: usize, n_in: usize| {
        let p = ((i as f64 + 0.5) * n_in as f64 / S as f64 - 0.5).clamp(0.0, (n_in - 1) as f64);
        let lo = p.floor() as usize;
        (lo, (lo + 1).min(n_in - 1), p - lo as f64)
    };
    let mut out = vec![0.0; S * S];
    for oy in 0..S {
        let (y0, y1, fy) = axis(oy, h);
        for ox in 0..S {
            let (x0, x1, fx) = axis(ox, w);
            let v = |x: usize, y: usize| src[y * w + x] as f64;
            out[oy * S + ox] = (1.0 - fy) * ((1.0 - fx) * v(x0, y0) + fx * v(x1, y0)) + fy * ((1.0 - fx) * v(x0, y1) + fx * v(x1, y1));
        }
    }
    out
}

fn norm01(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        v.iter().map(|x| (x - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; v.len()]
    }
}

fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let t: f64 = e.iter().sum();
    e.iter().map(|x| x / t).collect()
}

fn brute_cam(frame: &Frame, g: &dyn InferenceGraph) -> Vec<f64> {
    let input = frame.to_chw();
    let base = g.forward(&input).unwrap();
    let target = (0..base.logits.len()).fold(0, |b, i| if base.logits[i] > base.logits[b] { i } else { b });
    let a = &base.conv_final;
    let ups: Vec<Vec<f64>> = (0..a.channels).map(|k| upsample(a.channel(k), a.width, a.height)).collect();
    let scores: Vec<f64> = ups
        .iter()
        .map(|up| {
            let mask = norm01(up);
            let masked: Vec<f32> = input.iter().enumerate().map(|(i, &v)| (v as f64 * mask[i % (S * S)]) as f32).collect();
            let logits: Vec<f64> = g.forward(&masked).unwrap().logits.iter().map(|&v| v as f64).collect();
            softmax(&logits)[target]
        })
        .collect();
    let w = softmax(&scores);
    let mut sal = vec![0.0; S * S];
    for (wk, up) in w.iter().zip(&ups) {
        sal.iter_mut().zip(up).for_each(|(s, u)| *s += wk * u);
    }
    norm01(&sal.iter().map(|v| v.max(0.0)).collect::<Vec<_>>())
}

fn test_frame(seed: u32) -> Frame {
    let data = (0..S * S)
        .flat_map(|i| {
            let (x, y) = ((i % S) as u32, (i / S) as u32);
            (0..3u32).map(move |c| ((x * 13 + y * 29 + c * 5 + seed) % 101) as f32 / 100.0)
        })
        .collect();
    Frame::new(S, S, data).unwrap()
}

fn score_cam_check() -> Check {
    let two = SyntheticGraph::new(
        "two-map",
        7,
        vec![0.8, -0.6, 0.1, -0.2, 0.9, 0.5],
        vec![0.03, -0.05],
        vec![1.2, -0.7, -0.4, 1.1, 0.2, 0.6],
        vec![0.0, 0.2, -0.1],
    )
    .unwrap();
    let mut worst = 0.0f64;
    for seed in [1, 9, 40] {
        let f = test_frame(seed);
        let got = score_cam(&f, &two).map_err(|e| e.to_string())?;
        let want = brute_cam(&f, &two);
        ensure(!got.degenerate && want.iter().any(|&v| v > 0.0 && v < 1.0), "map is degenerate")?;
        worst = got.map.values().iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    ensure(worst <= 1e-6, format!("2-map max diff {worst:e}"))?;

    let one = SyntheticGraph::new("one-map", 7, vec![0.7, -0.3, 0.4], vec![0.01], vec![1.0, -1.0], vec![0.0, 0.0]).unwrap();
    let f = test_frame(3);
    let a = one.forward(&f.to_chw()).unwrap().conv_final;
    let want = norm01(&upsample(a.channel(0), a.width, a.height).iter().map(|v| v.max(0.0)).collect::<Vec<_>>());
    let got = score_cam(&f, &one).map_err(|e| e.to_string())?;
    ensure(!got.degenerate && want.iter().any(|&v| v > 0.0 && v < 1.0), "K=1 map is degenerate")?;
    let d1 = got.map.values().iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(d1 <= 1e-6, format!("K=1 max diff {d1:e}"))?;
    Ok(format!("2-map max diff {worst:.1e}, K=1 max diff {d1:.1e} (≤ 1e-6)"))
}

// ---------------------------------------------------------------- window algorithm

fn window() -> Check {
    let df = vec![0.42; 2048];
    let s = vec![0.42; 2025];
    let w = windowed_cosine(&df, &s).map_err(|e| e.to_string())?;
    ensure(w.windows == 24, format!("{} windows", w.windows))?;
    ensure((w.avg_cosine - 1.0).abs() < 1e-12, format!("identical windows gave {}", w.avg_cosine))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let df: Vec<f64> = (0..2048).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s: Vec<f64> = (0..2025).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut total = 0.0;
        for o in 0..24 {
            let (mut d, mut a, mut b) = (0.0, 0.0, 0.0);
            for i in 0..2025 {
                d += df[o + i] * s[i];
                a += df[o + i] * df[o + i];
                b += s[i] * s[i];
            }
            total += d / (a.sqrt() * b.sqrt());
        }
        let got = windowed_cosine(&df, &s).map_err(|e| e.to_string())?.avg_cosine;
        worst = worst.max((got - total / 24.0).abs());
    }
    ensure(worst <= 1e-12, format!("double-loop deviation {worst:e}"))?;
    Ok(format!("24 windows, identical windows average 1, double-loop deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- SVR

fn svr() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (c, gamma, eps) = (4.0, 0.7, 0.1);
    let mut worst_sum = 0.0f64;
    let mut worst_kernel = 0.0f64;
    for _ in 0..5 {
        let x: Vec<Vec<f64>> = (0..60).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| 3.0 + r[0].sin() + 0.3 * r[1] + rng.random_range(-0.2..0.2)).collect();
        let m = train_svr(&x, &y, c, gamma, eps).map_err(|e| e.to_string())?;
        worst_sum = worst_sum.max(m.dual_coefs.iter().sum::<f64>().abs());
        ensure(m.dual_coefs.iter().all(|a| a.abs() <= c), "a coefficient exceeds C")?;
        let sc = Scaler::fit(&x).map_err(|e| e.to_string())?;
        for q in x.iter().take(10) {
            let z: Vec<f64> = q.iter().enumerate().map(|(j, v)| (v - sc.min[j]) / (sc.max[j] - sc.min[j])).collect();
            let brute: f64 = m.bias
                + m.support_vectors
                    .iter()
                    .zip(&m.dual_coefs)
                    .map(|(sv, a)| a * (-gamma * sv.iter().zip(&z).map(|(s, t)| (s - t).powi(2)).sum::<f64>()).exp())
                    .sum::<f64>();
            worst_kernel = worst_kernel.max((m.predict(q).map_err(|e| e.to_string())? - brute).abs());
        }
    }
    ensure(worst_sum <= 1e-6, format!("Σα = {worst_sum:e}"))?;
    ensure(worst_kernel <= 1e-10, format!("kernel-sum deviation {worst_kernel:e}"))?;

    let x: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 / 49.0 * 4.0 + 1.0]).collect();
    let y: Vec<f64> = x.iter().map(|r| r[0]).collect();
    let m = train_svr(&x, &y, 64.0, 1.0, 0.01).map_err(|e| e.to_string())?;
    let fit_rmse = rmse(&m.predict_all(&x).map_err(|e| e.to_string())?, &y).map_err(|e| e.to_string())?;
    ensure(fit_rmse <= 0.05, format!("y = x RMSE {fit_rmse:.4}"))?;
    Ok(format!(
        "|Σα| ≤ {worst_sum:.1e}, |α| ≤ C, kernel-sum deviation {worst_kernel:.1e}, y = x RMSE {fit_rmse:.4}"
    ))
}

// ---------------------------------------------------------------- end to end + determinism

fn evaluate_json(m: &Path, cache: &Path, out: &Path) -> std::result::Result<Vec<u8>, String> {
    bvqa(&[
        "evaluate", "--manifest", p(m), "--kind", "nss", "--cache-dir", p(cache), "--iterations", "20", "--seed", "7", "--out", p(out),
    ])?;
    std::fs::read(out.join("manifest.NSS.json")).map_err(|e| e.to_string())
}

fn end_to_end(work: &Path) -> Check {
    let data = work.join("e2e");
    let cache = work.join("e2e-cache");
    mini_dataset(&data, 40)?;
    let m = data.join("manifest.csv");
    bvqa(&["extract", "--manifest", p(&m), "--kind", "nss", "--cache-dir", p(&cache)])?;
    let json = evaluate_json(&m, &cache, &work.join("e2e-report"))?;
    let report = EvalReport::from_json(std::str::from_utf8(&json).unwrap()).map_err(|e| e.to_string())?;
    ensure(report.iterations == 20 && report.srcc.len() == 20, "report does not hold 20 iterations")?;
    let med = report.median.srcc;
    ensure(med >= 0.8, format!("median SRCC {med:.4}"))?;
    Ok(format!("40 clips, NSS, 20 iterations with grid search: median SRCC {med:.4} (≥ 0.8)"))
}

fn determinism(work: &Path) -> Check {
    let m = work.join("e2e").join("manifest.csv");
    let cache = work.join("e2e-cache");
    let a = evaluate_json(&m, &cache, &work.join("det-a"))?;
    let b = evaluate_json(&m, &cache, &work.join("det-b"))?;
    ensure(a == b, "evaluate JSON differs between runs")?;

    let dir = cache.join("NSS");
    let mut files = 0;
    for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
        let path = entry.unwrap().path();
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        let f = bvqa::cache::decode(&bytes).map_err(|e| e.to_string())?;
        ensure(bvqa::cache::encode(&f) == bytes, format!("{} does not re-encode identically", path.display()))?;
        let fresh = work.join("roundtrip");
        let c = bvqa::FeatureCache::new(&fresh);
        let written = c.put(&f, "h").map_err(|e| e.to_string())?;
        let back = c.get(&f.video_id, f.kind, "h").ok_or("cache miss after put")?;
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        ensure(bits(&back.values) == bits(&f.values), "values changed bits through the cache")?;
        ensure(std::fs::read(written).unwrap() == bytes, "re-written file differs")?;
        files += 1;
    }
    Ok(format!("two evaluate runs byte-identical ({} bytes); {files} cache files round-trip bit-exactly", a.len()))
}

// ---------------------------------------------------------------- bench shape

fn bench_shape(work: &Path) -> Check {
    let m = work.join("mini").join("manifest.csv");
    let out = work.join("bench");
    bvqa(&["bench", "--manifest", p(&m), "--kind", "all", "--synthetic-models", "--out", p(&out)])?;
    let text = std::fs::read_to_string(out.join("bench.json")).map_err(|e| e.to_string())?;
    let report: BenchReport = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    ensure(report.rows.len() == 11, format!("{} rows", report.rows.len()))?;
    for (name, dim) in KIND_DIMS {
        let kind: FeatureKind = name.parse().unwrap();
        let row = report.row(kind).ok_or(format!("{name} missing"))?;
        ensure(row.dim == dim, format!("{name}: dim {}", row.dim))?;
        ensure(row.extract_s >= 0.0 && row.predict_s >= 0.0, format!("{name}: negative time"))?;
    }
    let sal = report.row(FeatureKind::Saliency).unwrap().extract_s;
    let nss = report.row(FeatureKind::Nss).unwrap().extract_s;
    let soft = if sal < nss { "holds" } else { "does not hold" };
    Ok(format!(
        "11 kinds with contracted dims; soft check SALIENCY {sal:.4}s < NSS {nss:.4}s {soft} (synthetic graphs, 64×64 clips)"
    ))
}

fn main() {
    // `cargo test -- <filter>` style arguments are accepted and ignored
    let work = tempfile::tempdir().expect("temp dir");
    let work = work.path();
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Check + '_>)> = vec![
        ("dimensional contracts", Duration::from_secs(600), Box::new(|| dims(work))),
        ("GGD/AGGD recovery", Duration::from_secs(30), Box::new(ggd_aggd)),
        ("logistic fit", Duration::from_secs(5), Box::new(logistic)),
        ("rank metrics", Duration::from_secs(60), Box::new(rank_metrics)),
        ("Score-CAM oracle", Duration::from_secs(120), Box::new(score_cam_check)),
        ("window algorithm", Duration::from_secs(60), Box::new(window)),
        ("SVR", Duration::from_secs(60), Box::new(svr)),
        ("end-to-end mini-benchmark", Duration::from_secs(1200), Box::new(|| end_to_end(work))),
        ("determinism", Duration::from_secs(600), Box::new(|| determinism(work))),
        ("bench shape", Duration::from_secs(600), Box::new(|| bench_shape(work))),
    ];
    let mut failed = 0;
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = match result {
            Ok(detail) if took > *budget => Err(format!("{detail}; took {took:.1?}, budget {budget:?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} [{took:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{took:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
