//! Distributional checks of the simulators: increment correlation structure
//! and the telescoping behaviour of the Linear Walk increment mean.

use linwalk_core::model::{simulate, simulate_from_noise, ModelKind, ModelSpec, Track};
use linwalk_core::point::Vec2;
use linwalk_core::rng::SeededRng;

fn single_segment(kind: ModelKind, sigma2: f64, horizon: i64) -> ModelSpec {
    ModelSpec::new(kind, vec![0.6], vec![1.0], Vec2::ZERO, sigma2, vec![], horizon).unwrap()
}

/// Lag-k sample autocorrelation of one coordinate of the increments.
fn increment_autocorrelation(track: &Track, lag: usize, dim: usize) -> f64 {
    let values: Vec<f64> = track
        .increments()
        .iter()
        .map(|y| if dim == 0 { y.x } else { y.y })
        .collect();
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let cov = values[..n - lag]
        .iter()
        .zip(&values[lag..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum::<f64>()
        / (n - lag) as f64;
    cov / var
}

#[test]
fn lw_increments_have_lag_one_correlation_minus_half() {
    let spec = single_segment(ModelKind::Lw, 1.0, 100_000);
    let track = simulate(&spec, &SeededRng::new(2024, 0)).unwrap();
    for dim in 0..2 {
        let rho1 = increment_autocorrelation(&track, 1, dim);
        assert!((rho1 + 0.5).abs() < 0.02, "lag-1 dim {dim}: {rho1}");
        for lag in 2..=4 {
            let rho = increment_autocorrelation(&track, lag, dim);
            assert!(rho.abs() < 0.01, "lag-{lag} dim {dim}: {rho}");
        }
    }
}

#[test]
fn rw_increments_are_serially_uncorrelated() {
    let spec = single_segment(ModelKind::Rw, 1.0, 100_000);
    let track = simulate(&spec, &SeededRng::new(2025, 0)).unwrap();
    for dim in 0..2 {
        for lag in 1..=3 {
            let rho = increment_autocorrelation(&track, lag, dim);
            assert!(rho.abs() < 0.01, "lag-{lag} dim {dim}: {rho}");
        }
    }
}

/// The mean of h LW increments telescopes to mu + sigma (Z_h - Z_0) / h, so
/// its per-dimension variance is 2 sigma^2 / h^2 rather than the i.i.d.
/// sigma^2 / h.
#[test]
fn lw_increment_mean_variance_scales_with_h_squared() {
    let h = 25usize;
    let sigma2 = 0.8;
    let spec = single_segment(ModelKind::Lw, sigma2, h as i64);
    let replications = 10_000;
    let mut means_x = Vec::with_capacity(replications);
    for rep in 0..replications {
        let rng = SeededRng::new(31, rep as u64);
        let noise = rng.normal_pairs(h + 1);
        let track = simulate_from_noise(&spec, &noise).unwrap();
        // Mean of the h increments from X_0 to X_h; X_0 = b + sigma Z_0 is
        // materialized by the simulator but not emitted.
        let x0 = spec.b1 + noise[0] * sigma2.sqrt();
        let mean: Vec2 = (*track.points().last().unwrap() - x0) / h as f64;
        means_x.push(mean.x);
    }
    let m = means_x.iter().sum::<f64>() / replications as f64;
    let var = means_x
        .iter()
        .map(|v| (v - m) * (v - m))
        .sum::<f64>()
        / (replications - 1) as f64;
    let want = 2.0 * sigma2 / (h as f64 * h as f64);
    assert!(
        (var - want).abs() < 0.10 * want,
        "telescoped variance {var}, expected about {want}"
    );
}

/// With the noise sequence pinned, the telescoping identity is exact: the
/// scaled difference of increment means reduces to
/// (Z_{i+h} - 2 Z_i + Z_{i-h}) / sqrt(2), independent of h.
#[test]
fn lw_mosum_of_increment_means_telescopes_exactly() {
    let horizon = 240i64;
    let sigma2: f64 = 0.49;
    let sigma = sigma2.sqrt();
    let spec = ModelSpec::new(
        ModelKind::Lw,
        vec![0.3],
        vec![1.2],
        Vec2::new(3.0, -2.0),
        sigma2,
        vec![],
        horizon,
    )
    .unwrap();
    let noise = SeededRng::new(77, 0).normal_pairs(horizon as usize + 1);
    let track = simulate_from_noise(&spec, &noise).unwrap();
    let points = track.points();
    for h in [10usize, 30, 60] {
        for center in [h as i64 + 1, 120, horizon - h as i64] {
            let i = (center - 1) as usize; // offset of time `center`
            // Mean of increments over (center, center + h] minus mean over
            // (center - h, center]; each telescopes to endpoint differences.
            let right = (points[i + h] - points[i]) / h as f64;
            let left = (points[i] - points[i - h]) / h as f64;
            let scaled = (right - left) * (h as f64 / (2.0 * sigma2).sqrt());
            let z = (noise[(center + h as i64) as usize] - noise[center as usize] * 2.0
                + noise[(center - h as i64) as usize])
                * (sigma / (2.0 * sigma2).sqrt());
            assert!(
                (scaled - z).norm() < 1e-10,
                "telescope mismatch at h={h}, center={center}"
            );
        }
    }
}

/// Per dimension the telescoped MOSUM has variance 3 no matter the window:
/// widening the window buys no power for the plain mean of increments.
#[test]
fn lw_mosum_statistic_is_h_independent_with_variance_three() {
    let sigma2 = 1.0;
    let replications = 20_000;
    for h in [5usize, 20] {
        let horizon = (2 * h) as i64;
        let spec = single_segment(ModelKind::Lw, sigma2, horizon);
        let mut values = Vec::with_capacity(replications);
        for rep in 0..replications {
            let rng = SeededRng::new(91 + h as u64, rep as u64);
            let noise = rng.normal_pairs(horizon as usize + 1);
            let track = simulate_from_noise(&spec, &noise).unwrap();
            let points = track.points();
            // X_0 = b + sigma Z_0 is not emitted; rebuild it from the noise.
            let x0 = spec.b1 + noise[0] * sigma2.sqrt();
            let x_mid = points[h - 1];
            let x_end = points[2 * h - 1];
            let left = (x_mid - x0) / h as f64;
            let right = (x_end - x_mid) / h as f64;
            let scaled = (right - left) * (h as f64 / (2.0 * sigma2).sqrt());
            values.push(scaled.x);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (values.len() - 1) as f64;
        assert!(
            (var - 3.0).abs() < 0.15,
            "h={h}: variance {var}, expected 3"
        );
    }
}
