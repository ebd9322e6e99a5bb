//! The moving difference statistic `G`, its parameter-free null counterpart
//! `Gamma`, simulated rejection thresholds and the limit autocovariance
//! `kappa`.
//!
//! At each center `i` a double window of width `2h` compares the drift
//! estimates of its halves, scaled by the estimated standard deviation of the
//! difference. Under the null hypothesis each marginal is asymptotically
//! standard bivariate normal, and the same statistic expressed directly in
//! standard normals (`Gamma`) never touches model parameters, so one set of
//! simulations calibrates every track of the same length.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::Error;
use crate::estimate::{self, mu_weight, weight_normalizer, MIN_LW_WINDOW, MIN_RW_WINDOW};
use crate::math;
use crate::model::{ModelKind, Track};
use crate::point::Vec2;
use crate::rng::SeededRng;
use crate::Result;

/// A bivariate difference process over the valid window centers of one track
/// (or one simulated null realization).
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceProcess {
    kind: ModelKind,
    h: usize,
    first_center: i64,
    values: Vec<Vec2>,
}

impl DifferenceProcess {
    /// Assemble a process from raw parts; values must be finite.
    pub fn from_parts(kind: ModelKind, h: usize, first_center: i64, values: Vec<Vec2>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpec {
                reason: "a difference process needs at least one center".to_string(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec {
                reason: "difference process values must be finite".to_string(),
            });
        }
        Ok(DifferenceProcess {
            kind,
            h,
            first_center,
            values,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn window(&self) -> usize {
        self.h
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_center(&self) -> i64 {
        self.first_center
    }

    pub fn last_center(&self) -> i64 {
        self.first_center + self.values.len() as i64 - 1
    }

    pub fn centers(&self) -> impl Iterator<Item = i64> + '_ {
        self.first_center..=self.last_center()
    }

    pub fn values(&self) -> &[Vec2] {
        &self.values
    }

    pub fn value_at(&self, center: i64) -> Option<Vec2> {
        let idx = center - self.first_center;
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied()
    }

    /// Center and Euclidean norm of the maximal deviation from the origin;
    /// ties resolve to the smallest center.
    pub fn max_deviation(&self) -> (i64, f64) {
        let mut best = (self.first_center, f64::NEG_INFINITY);
        for (idx, v) in self.values.iter().enumerate() {
            let norm = v.norm();
            if norm > best.1 {
                best = (self.first_center + idx as i64, norm);
            }
        }
        best
    }
}

/// Configuration of a null-distribution simulation.
///
/// Within one simulation all windows share a single noise realization, so the
/// multi-window maximum is calibrated jointly.
#[derive(Clone, Debug, PartialEq)]
pub struct NullSimConfig {
    /// Track length the null processes are simulated for.
    pub horizon: i64,
    /// Window widths, ascending and de-duplicated.
    pub windows: Vec<usize>,
    /// Number of simulated realizations.
    pub sims: usize,
    /// Significance level in (0, 1).
    pub alpha: f64,
    /// Master seed of the simulation streams.
    pub seed: u64,
}

impl NullSimConfig {
    pub fn new(horizon: i64, mut windows: Vec<usize>, sims: usize, alpha: f64, seed: u64) -> Result<Self> {
        windows.sort_unstable();
        windows.dedup();
        let config = NullSimConfig {
            horizon,
            windows,
            sims,
            alpha,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason| Err(Error::InvalidSpec { reason });
        if self.windows.is_empty() {
            return invalid("at least one window width is required".to_string());
        }
        if let Some(&h) = self.windows.iter().find(|&&h| h < MIN_LW_WINDOW) {
            return invalid(format!("window {h} is below the minimum of {MIN_LW_WINDOW}"));
        }
        let max = *self.windows.iter().max().expect("non-empty");
        if 2 * max as i64 >= self.horizon {
            return invalid(format!(
                "double window 2*{max} does not fit a track of length {}",
                self.horizon
            ));
        }
        if self.sims < 1 {
            return invalid("at least one simulation is required".to_string());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!("alpha must lie strictly between 0 and 1, got {}", self.alpha));
        }
        Ok(())
    }

    pub fn max_window(&self) -> usize {
        *self.windows.iter().max().expect("validated non-empty")
    }
}

/// A simulated rejection threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Threshold {
    /// Empirical `(1 - alpha)` quantile of the simulated maximal deviations.
    pub q: f64,
    /// Set when `sims * alpha < 1`, i.e. the quantile sits at the sample
    /// maximum and is poorly resolved.
    pub ill_resolved: bool,
}

// ---------------------------------------------------------------------------
// Difference processes on observed tracks
// ---------------------------------------------------------------------------

/// Linear Walk difference process: kernel drift estimates of the two window
/// halves, scaled with `sqrt(12/(h^3-h) * (s2_left + s2_right))`.
///
/// Centers run from `start_time + h - 1` to `end_time - h`; for a track on
/// times `1..=T` that is the full range `[h, T-h]`.
pub fn g_process_lw(track: &Track, h: usize) -> Result<DifferenceProcess> {
    if h < MIN_LW_WINDOW {
        return Err(Error::WindowTooSmall {
            width: h,
            min: MIN_LW_WINDOW,
        });
    }
    if track.len() < 2 * h + 1 {
        return Err(Error::TrackTooShort {
            len: track.len(),
            required: 2 * h + 1,
        });
    }
    let t0 = track.start_time();
    let first_start = t0 - 1;
    let last_start = track.end_time() - h as i64;
    let mut fits = Vec::with_capacity((last_start - first_start + 1) as usize);
    for start in first_start..=last_start {
        let a = track.offset_of(start + 1);
        fits.push(estimate::lw_fit(&track.points()[a..a + h], start)?);
    }
    let scale = 12.0 / weight_normalizer(h) as f64;
    let first_center = t0 + h as i64 - 1;
    let mut values = Vec::new();
    for center in first_center..=(track.end_time() - h as i64) {
        let left = &fits[(center - h as i64 - first_start) as usize];
        let right = &fits[(center - first_start) as usize];
        let pooled = left.sigma2_hat + right.sigma2_hat;
        if pooled == 0.0 {
            return Err(Error::DegenerateWindow { center });
        }
        let denom = math::sqrt(scale * pooled);
        values.push((right.mu_hat - left.mu_hat) / denom);
    }
    DifferenceProcess::from_parts(ModelKind::Lw, h, first_center, values)
}

/// Random Walk difference process: `sqrt(h)` times the difference of
/// increment means, scaled with `sqrt(s2_left + s2_right)`.
///
/// Increments of an observed track only exist from its second position, so
/// centers start one later than in the Linear Walk case.
pub fn g_process_rw(track: &Track, h: usize) -> Result<DifferenceProcess> {
    if h < MIN_RW_WINDOW {
        return Err(Error::WindowTooSmall {
            width: h,
            min: MIN_RW_WINDOW,
        });
    }
    if track.len() < 2 * h + 1 {
        return Err(Error::TrackTooShort {
            len: track.len(),
            required: 2 * h + 1,
        });
    }
    let t0 = track.start_time();
    let increments = track.increments();
    // Window starting after time s covers the increments into s+1 ..= s+h.
    let first_start = t0;
    let last_start = track.end_time() - h as i64;
    let mut fits = Vec::with_capacity((last_start - first_start + 1) as usize);
    for start in first_start..=last_start {
        let a = (start - t0) as usize;
        fits.push(estimate::rw_fit(&increments[a..a + h], start)?);
    }
    let sqrt_h = math::sqrt(h as f64);
    let first_center = t0 + h as i64;
    let mut values = Vec::new();
    for center in first_center..=(track.end_time() - h as i64) {
        let left = &fits[(center - h as i64 - first_start) as usize];
        let right = &fits[(center - first_start) as usize];
        let pooled = left.sigma2_hat + right.sigma2_hat;
        if pooled == 0.0 {
            return Err(Error::DegenerateWindow { center });
        }
        values.push((right.mu_hat - left.mu_hat) * (sqrt_h / math::sqrt(pooled)));
    }
    DifferenceProcess::from_parts(ModelKind::Rw, h, first_center, values)
}

/// Difference process of `track` under `kind`.
pub fn g_process(track: &Track, h: usize, kind: ModelKind) -> Result<DifferenceProcess> {
    match kind {
        ModelKind::Lw => g_process_lw(track, h),
        ModelKind::Rw => g_process_rw(track, h),
    }
}

// ---------------------------------------------------------------------------
// Null processes
// ---------------------------------------------------------------------------

/// One Linear Walk null value at `center` from a shared noise sequence
/// `Z_0 ..= Z_T`.
pub fn gamma_lw_at(noise: &[Vec2], h: usize, center: i64) -> Vec2 {
    let scale = 1.0 / math::sqrt(2.0 * weight_normalizer(h) as f64 / 3.0);
    let i = center as usize;
    let mut sum = Vec2::ZERO;
    for j in 1..=h {
        let w = mu_weight(h, j) as f64;
        sum += (noise[i + j] - noise[i - h + j]) * w;
    }
    sum * scale
}

/// One Random Walk null value at `center` from a shared noise sequence.
pub fn gamma_rw_at(noise: &[Vec2], h: usize, center: i64) -> Vec2 {
    let scale = 1.0 / math::sqrt(2.0 * h as f64);
    let i = center as usize;
    let mut sum = Vec2::ZERO;
    for j in 1..=h {
        sum += noise[i + j] - noise[i - h + j];
    }
    sum * scale
}

fn gamma_from_noise(
    noise: &[Vec2],
    h: usize,
    kind: ModelKind,
) -> Result<DifferenceProcess> {
    let min = match kind {
        ModelKind::Lw => 2, // h^3 - h must be positive
        ModelKind::Rw => 1,
    };
    if h < min {
        return Err(Error::WindowTooSmall { width: h, min });
    }
    if noise.len() < 2 * h + 1 {
        return Err(Error::TrackTooShort {
            len: noise.len(),
            required: 2 * h + 1,
        });
    }
    let horizon = noise.len() as i64 - 1;
    let first_center = h as i64;
    let last_center = horizon - h as i64;
    let values: Vec<Vec2> = (first_center..=last_center)
        .map(|c| match kind {
            ModelKind::Lw => gamma_lw_at(noise, h, c),
            ModelKind::Rw => gamma_rw_at(noise, h, c),
        })
        .collect();
    DifferenceProcess::from_parts(kind, h, first_center, values)
}

/// Linear Walk null process on centers `[h, T-h]` from one noise realization
/// `Z_0 ..= Z_T` (`noise.len() == T + 1`).
pub fn gamma_lw_from_noise(noise: &[Vec2], h: usize) -> Result<DifferenceProcess> {
    gamma_from_noise(noise, h, ModelKind::Lw)
}

/// Random Walk null process from one noise realization.
pub fn gamma_rw_from_noise(noise: &[Vec2], h: usize) -> Result<DifferenceProcess> {
    gamma_from_noise(noise, h, ModelKind::Rw)
}

/// Draw a noise realization for `horizon` and build the Linear Walk null
/// process. Marginals are standard bivariate normal by construction; no model
/// parameters enter.
pub fn gamma_null_lw(horizon: i64, h: usize, rng: &SeededRng) -> Result<DifferenceProcess> {
    if horizon < 1 {
        return Err(Error::InvalidSpec {
            reason: format!("horizon must be positive, got {horizon}"),
        });
    }
    gamma_lw_from_noise(&rng.normal_pairs(horizon as usize + 1), h)
}

/// Random Walk analogue of [`gamma_null_lw`].
pub fn gamma_null_rw(horizon: i64, h: usize, rng: &SeededRng) -> Result<DifferenceProcess> {
    if horizon < 1 {
        return Err(Error::InvalidSpec {
            reason: format!("horizon must be positive, got {horizon}"),
        });
    }
    gamma_rw_from_noise(&rng.normal_pairs(horizon as usize + 1), h)
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

/// Maximal deviation of the `sim`-th null realization, taken over all
/// configured windows computed from one shared noise sequence.
pub fn null_maximum(config: &NullSimConfig, kind: ModelKind, sim: u64) -> f64 {
    let rng = SeededRng::null_sim_stream(config.seed, sim);
    let noise = rng.normal_pairs(config.horizon as usize + 1);
    config
        .windows
        .iter()
        .map(|&h| {
            gamma_from_noise(&noise, h, kind)
                .expect("validated configuration")
                .max_deviation()
                .1
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Empirical `(1 - alpha)` quantile by the order statistic at rank
/// `ceil((1 - alpha) * n)`.
pub fn empirical_quantile(mut maxima: Vec<f64>, alpha: f64) -> Threshold {
    debug_assert!(!maxima.is_empty());
    maxima.sort_unstable_by(f64::total_cmp);
    let n = maxima.len();
    let rank = math::ceil((1.0 - alpha) * n as f64) as usize;
    let rank = rank.clamp(1, n);
    Threshold {
        q: maxima[rank - 1],
        ill_resolved: (n as f64) * alpha < 1.0,
    }
}

/// Simulate `config.sims` null realizations and return the rejection radius.
///
/// Each simulation uses its own sub-stream of the master seed, so the
/// collected maxima (and hence the quantile) do not depend on evaluation
/// order; callers may compute [`null_maximum`] for the same indices in
/// parallel and pass the results to [`empirical_quantile`] to get an
/// identical threshold.
pub fn threshold(config: &NullSimConfig, kind: ModelKind) -> Result<Threshold> {
    config.validate()?;
    let maxima: Vec<f64> = (0..config.sims as u64)
        .map(|s| null_maximum(config, kind, s))
        .collect();
    Ok(empirical_quantile(maxima, config.alpha))
}

// ---------------------------------------------------------------------------
// Limit autocovariance
// ---------------------------------------------------------------------------

/// Normalized autocovariance of the limit Gaussian process: piecewise cubic
/// on `[0, 2]`, zero beyond.
pub fn kappa(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain {
            reason: format!("kappa is defined for x >= 0, got {x}"),
        });
    }
    Ok(if x <= 1.0 {
        ((3.0 * x - 3.0) * x - 1.5) * x + 1.0
    } else if x <= 2.0 {
        ((-x + 3.0) * x - 1.5) * x - 1.0
    } else {
        0.0
    })
}
