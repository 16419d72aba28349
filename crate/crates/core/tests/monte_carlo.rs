//! Sampling checks of estimator consistency and plug-in covariances.

use degbias::estimation::{estimate_directed, estimate_undirected, moment_stats, moment_stats_directed, DensityMode};
use degbias::models::{
    apply_errors_directed, apply_errors_undirected, sample_labels, sample_sbm, ErrorRatesDirected, ErrorRatesUndirected,
    SbmParams,
};
use degbias::testing::sigma33_hat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn undirected_estimates_recover_truth() {
    let n = 1500;
    let (beta, gamma) = (0.3, 3.0);
    let params = SbmParams::new(0.4, 0.3, 1.0, -1.0).unwrap();
    let rates = ErrorRatesUndirected::new(beta, gamma, gamma);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let labels = sample_labels(n, 0.4, true, &mut rng).unwrap();
    let truth = sample_sbm(n, &params, &labels, &mut rng).unwrap();
    let obs = apply_errors_undirected(&truth, &rates, 2, &mut rng).unwrap();
    let est = estimate_undirected(&moment_stats(&obs[0], &obs[1], DensityMode::Averaged).unwrap()).unwrap();
    assert!((est.q - 0.3).abs() < 0.01, "q {}", est.q);
    assert!((est.beta_between - beta).abs() < 0.02, "beta {}", est.beta_between);
    assert!((est.gamma1 - gamma).abs() < 1.0, "gamma1 {}", est.gamma1);
    assert!((est.mu1 - 1.0).abs() < 0.5, "mu1 {}", est.mu1);
    assert!((est.mu2 + 1.0).abs() < 0.5, "mu2 {}", est.mu2);
}

#[test]
fn directed_covariance_matches_sampling_covariance() {
    let (n, reps) = (300, 400);
    let params = SbmParams::new(0.5, 0.3, 0.0, 0.0).unwrap();
    let rates = ErrorRatesDirected::new(0.45, 0.39, 0.53, 0.45).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let labels = sample_labels(n, 0.5, true, &mut rng).unwrap();
    let mut samples = Vec::new();
    let mut plug = [[0.0; 3]; 3];
    for _ in 0..reps {
        let truth = sample_sbm(n, &params, &labels, &mut rng).unwrap();
        let obs = apply_errors_directed(&truth, &rates, &mut rng).unwrap();
        let est = estimate_directed(&moment_stats_directed(&obs).unwrap()).unwrap();
        let s = &est.stats;
        let scale = ((s.n1 * s.n2) as f64).sqrt();
        samples.push([scale * s.density_12, scale * s.density_21, scale * s.asym_12]);
        let c = sigma33_hat(&est).unwrap();
        for (i, row) in plug.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += c[(i, j)] / reps as f64;
            }
        }
    }
    let mean: Vec<f64> = (0..3).map(|k| samples.iter().map(|s| s[k]).sum::<f64>() / reps as f64).collect();
    for i in 0..3 {
        for j in 0..3 {
            let cov = samples.iter().map(|s| (s[i] - mean[i]) * (s[j] - mean[j])).sum::<f64>() / (reps - 1) as f64;
            let scale = (plug[i][i] * plug[j][j]).sqrt();
            assert!((cov - plug[i][j]).abs() < 0.2 * scale, "entry ({i},{j}): sampled {cov}, plug-in {}", plug[i][j]);
        }
    }
}
