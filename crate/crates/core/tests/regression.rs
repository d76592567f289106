use bvqa::regression::{grid_search, grid_search_scored, rbf, train_svr, HyperGrid, Scaler, SvrModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
    let y = x
        .iter()
        .map(|r| (3.0 + r.iter().map(|v| v.sin()).sum::<f64>() / d as f64 + rng.random_range(-0.3..0.3)).clamp(1.0, 5.0))
        .collect();
    (x, y)
}

/// Full coefficient vector in training order; rows without a support vector get 0.
fn all_coefs(model: &SvrModel, scaled: &[Vec<f64>]) -> Vec<f64> {
    scaled
        .iter()
        .map(|row| {
            model
                .support_vectors
                .iter()
                .position(|sv| sv == row)
                .map(|i| model.dual_coefs[i])
                .unwrap_or(0.0)
        })
        .collect()
}

#[test]
fn dual_feasibility_and_kkt() {
    for seed in 0..4 {
        let (x, y) = random_problem(60, 3, seed);
        let (c, gamma, eps) = (4.0, 0.8, 0.1);
        let model = train_svr(&x, &y, c, gamma, eps).unwrap();
        let sum: f64 = model.dual_coefs.iter().sum();
        assert!(sum.abs() <= 1e-6, "sum of coefs {sum}");
        assert!(model.dual_coefs.iter().all(|a| a.abs() <= c + 1e-12));

        let scaled = Scaler::fit(&x).unwrap().apply_all(&x).unwrap();
        let coefs = all_coefs(&model, &scaled);
        assert_eq!(coefs.iter().filter(|&&a| a != 0.0).count(), model.dual_coefs.len());
        // KKT in residual form, with slack for the 1e-3 gradient-gap tolerance
        let tol = 2e-3;
        for (i, row) in scaled.iter().enumerate() {
            let r = model.predict_scaled(row) - y[i];
            let a = coefs[i];
            if a == 0.0 {
                assert!(r.abs() <= eps + tol, "row {i}: inactive but |r| = {}", r.abs());
            } else if a.abs() < c {
                assert!((r.abs() - eps).abs() <= tol, "row {i}: free but |r| = {}", r.abs());
                assert!(a * r < 0.0, "row {i}: coefficient sign");
            } else {
                assert!(r.abs() >= eps - tol, "row {i}: at bound but |r| = {}", r.abs());
            }
        }
    }
}

#[test]
fn predict_equals_kernel_sum() {
    let (x, y) = random_problem(50, 4, 9);
    let model = train_svr(&x, &y, 2.0, 0.5, 0.1).unwrap();
    let scaler = Scaler::fit(&x).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let q: Vec<f64> = (0..4).map(|_| rng.random_range(-4.0..4.0)).collect();
        let z: Vec<f64> = q
            .iter()
            .enumerate()
            .map(|(j, v)| (v - scaler.min[j]) / (scaler.max[j] - scaler.min[j]))
            .collect();
        let mut want = model.bias;
        for (sv, a) in model.support_vectors.iter().zip(&model.dual_coefs) {
            let d2: f64 = sv.iter().zip(&z).map(|(s, t)| (s - t).powi(2)).sum();
            want += a * (-model.params.gamma * d2).exp();
        }
        let got = model.predict(&q).unwrap();
        assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
    }
    assert!(model.predict(&[1.0]).is_err());
}

#[test]
fn identity_regression_fits() {
    let x: Vec<Vec<f64>> = (0..50).map(|i| vec![1.0 + 4.0 * i as f64 / 49.0]).collect();
    let y: Vec<f64> = x.iter().map(|r| r[0]).collect();
    let model = train_svr(&x, &y, 64.0, 1.0, 0.01).unwrap();
    let pred = model.predict_all(&x).unwrap();
    let rmse = (pred.iter().zip(&y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / 50.0).sqrt();
    assert!(rmse <= 0.05, "rmse {rmse}");
}

#[test]
fn supported_point_is_fitted() {
    let (x, y) = random_problem(40, 2, 5);
    let eps = 0.1;
    let model = train_svr(&x, &y, 8.0, 1.0, eps).unwrap();
    let scaled = Scaler::fit(&x).unwrap().apply_all(&x).unwrap();
    let coefs = all_coefs(&model, &scaled);
    let (i, _) = coefs
        .iter()
        .enumerate()
        .filter(|(_, a)| a.abs() < 8.0)
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    assert!((model.predict(&x[i]).unwrap() - y[i]).abs() <= eps + 0.1);
}

#[test]
fn model_file_is_deterministic() {
    let (x, y) = random_problem(45, 3, 2);
    let grid = HyperGrid {
        c: vec![1.0, 8.0],
        gamma: vec![0.25, 1.0],
        epsilon: 0.1,
    };
    let (c1, g1) = grid_search(&x, &y, &grid, 77).unwrap();
    let (c2, g2) = grid_search(&x, &y, &grid, 77).unwrap();
    assert_eq!((c1, g1), (c2, g2));
    let a = train_svr(&x, &y, c1, g1, 0.1).unwrap().to_bytes();
    let b = train_svr(&x, &y, c2, g2, 0.1).unwrap().to_bytes();
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bvqm");
    SvrModel::from_bytes(&a).unwrap().save(&path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), a);
    assert_eq!(SvrModel::load(&path).unwrap().to_bytes(), a);
}

#[test]
fn planted_gamma_is_selected() {
    let g_star = 8.0;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let centres: Vec<[f64; 2]> = (0..12).map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]).collect();
    let weights: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut x: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
    while x.len() < 200 {
        x.push(vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]);
    }
    let y: Vec<f64> = x
        .iter()
        .map(|p| 3.0 + centres.iter().zip(&weights).map(|(c, w)| w * rbf(g_star, c, p)).sum::<f64>())
        .collect();
    let grid = HyperGrid {
        c: vec![16.0],
        gamma: vec![g_star / 100.0, g_star, g_star * 100.0],
        epsilon: 0.01,
    };
    let res = grid_search_scored(&x, &y, &grid, 4).unwrap();
    assert_eq!(res.gamma, g_star, "scores {:?}", res.scores);
}

#[test]
fn ties_prefer_smaller_c_then_gamma() {
    // constant targets make every tuning SRCC undefined, so all points tie
    let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
    let y = vec![2.0; 30];
    let grid = HyperGrid {
        c: vec![4.0, 0.5, 2.0],
        gamma: vec![1.0, 0.125],
        epsilon: 0.1,
    };
    assert_eq!(grid_search(&x, &y, &grid, 0).unwrap(), (0.5, 0.125));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn predict_is_continuous(seed in any::<u64>(), dir in prop::collection::vec(-1.0f64..1.0, 3)) {
        let (x, y) = random_problem(30, 3, seed % 1000);
        let model = train_svr(&x, &y, 4.0, 1.0, 0.1).unwrap();
        let z = vec![0.3, 0.6, 0.5];
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let zp: Vec<f64> = z.iter().zip(&dir).map(|(a, d)| a + 1e-8 * d / norm).collect();
        prop_assert!((model.predict_scaled(&z) - model.predict_scaled(&zp)).abs() <= 1e-4);
    }
}
