//! Window-local parameter estimation.
//!
//! For the Linear Walk the drift MLE is a weighted sum of positions with
//! integer weights `2j - h - 1`; the offset follows from the window mean and
//! the variance uses the unbiased `2h - 4` denominator. For the Random Walk
//! the drift is the plain mean of increments with a pooled `2(h - 1)` variance
//! denominator. Both models reduce direction and step length to the drift via
//! [`to_polar`].

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{self, CompensatedSum};
use crate::model::{ModelKind, ModelSpec, Track};
use crate::point::Vec2;
use crate::Result;

/// Smallest Linear Walk window: `2h - 4` and `h^3 - h` must be positive.
pub const MIN_LW_WINDOW: usize = 3;
/// Smallest Random Walk window: variance needs two increments.
pub const MIN_RW_WINDOW: usize = 2;

/// Drift weight `w_mu(h, j) = 2j - h - 1` for `j = 1..=h`.
#[inline]
pub fn mu_weight(h: usize, j: usize) -> i64 {
    2 * j as i64 - h as i64 - 1
}

/// Offset weight `w_b(h, i, j) = -6hj - 12ji - 6j + 4h^2 + 6hi + 6h + 6i + 2`.
#[inline]
pub fn b_weight(h: usize, i: i64, j: usize) -> i64 {
    let (h, j) = (h as i64, j as i64);
    -6 * h * j - 12 * j * i - 6 * j + 4 * h * h + 6 * h * i + 6 * h + 6 * i + 2
}

/// `h^3 - h`, the common weight normalizer.
#[inline]
pub fn weight_normalizer(h: usize) -> i64 {
    let h = h as i64;
    h * h * h - h
}

/// The integer weight families of one window, exposing their exact sum
/// identities.
#[derive(Clone, Copy, Debug)]
pub struct WeightScheme {
    pub h: usize,
    pub start: i64,
}

impl WeightScheme {
    pub fn new(h: usize, start: i64) -> Self {
        WeightScheme { h, start }
    }

    pub fn mu(&self, j: usize) -> i64 {
        mu_weight(self.h, j)
    }

    pub fn b(&self, j: usize) -> i64 {
        b_weight(self.h, self.start, j)
    }

    pub fn mu_sum(&self) -> i64 {
        (1..=self.h).map(|j| self.mu(j)).sum()
    }

    pub fn mu_weighted_time_sum(&self) -> i64 {
        (1..=self.h).map(|j| self.mu(j) * (self.start + j as i64)).sum()
    }

    pub fn mu_square_sum(&self) -> i64 {
        (1..=self.h).map(|j| self.mu(j) * self.mu(j)).sum()
    }

    pub fn b_sum(&self) -> i64 {
        (1..=self.h).map(|j| self.b(j)).sum()
    }

    pub fn b_weighted_time_sum(&self) -> i64 {
        (1..=self.h).map(|j| self.b(j) * (self.start + j as i64)).sum()
    }
}

/// Parameter estimates from one window of width `h` starting after time
/// `start` (covering times `start + 1 ..= start + h`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowEstimate {
    pub start: i64,
    pub width: usize,
    pub mu_hat: Vec2,
    /// Intercept at time zero; `Vec2::ZERO` for Random Walk fits.
    pub b_hat: Vec2,
    pub sigma2_hat: f64,
    pub theta_hat: f64,
    pub r_hat: f64,
}

/// Cartesian drift to `(theta, r)`; the zero vector maps to `(0, 0)`.
pub fn to_polar(mu: Vec2) -> (f64, f64) {
    let r = mu.norm();
    if r == 0.0 {
        (0.0, 0.0)
    } else {
        (math::atan2(mu.y, mu.x), r)
    }
}

/// Linear Walk fit of the positions at times `start + 1 ..= start + h`.
pub fn lw_fit(positions: &[Vec2], start: i64) -> Result<WindowEstimate> {
    let h = positions.len();
    if h < MIN_LW_WINDOW {
        return Err(Error::WindowTooSmall {
            width: h,
            min: MIN_LW_WINDOW,
        });
    }
    let normalizer = weight_normalizer(h) as f64;

    let mut wx = CompensatedSum::default();
    let mut wy = CompensatedSum::default();
    let mut sx = CompensatedSum::default();
    let mut sy = CompensatedSum::default();
    for (j, p) in positions.iter().enumerate() {
        let w = mu_weight(h, j + 1) as f64;
        wx.add(w * p.x);
        wy.add(w * p.y);
        sx.add(p.x);
        sy.add(p.y);
    }
    let mu_hat = Vec2::new(wx.value(), wy.value()) * (6.0 / normalizer);
    let mean = Vec2::new(sx.value(), sy.value()) / h as f64;
    let mid = (h as f64 + 1.0) / 2.0;
    let b_hat = mean - mu_hat * (start as f64 + mid);

    // Residuals in centered form: X_{i+j} - (i+j) mu - b = (X_{i+j} - mean) - (j - mid) mu.
    let mut rss = CompensatedSum::default();
    for (j, p) in positions.iter().enumerate() {
        let residual = (*p - mean) - mu_hat * (j as f64 + 1.0 - mid);
        rss.add(residual.norm_sq());
    }
    let sigma2_hat = rss.value() / (2.0 * h as f64 - 4.0);

    let (theta_hat, r_hat) = to_polar(mu_hat);
    Ok(WindowEstimate {
        start,
        width: h,
        mu_hat,
        b_hat,
        sigma2_hat,
        theta_hat,
        r_hat,
    })
}

/// Random Walk fit of `h` consecutive increments; `start` is the time of the
/// position preceding the first increment.
pub fn rw_fit(increments: &[Vec2], start: i64) -> Result<WindowEstimate> {
    let h = increments.len();
    if h < MIN_RW_WINDOW {
        return Err(Error::WindowTooSmall {
            width: h,
            min: MIN_RW_WINDOW,
        });
    }
    let mut sx = CompensatedSum::default();
    let mut sy = CompensatedSum::default();
    for y in increments {
        sx.add(y.x);
        sy.add(y.y);
    }
    let mu_hat = Vec2::new(sx.value(), sy.value()) / h as f64;
    let mut rss = CompensatedSum::default();
    for y in increments {
        rss.add((*y - mu_hat).norm_sq());
    }
    // Pooled over both dimensions with the mean estimated: 2(h - 1).
    let sigma2_hat = rss.value() / (2.0 * (h as f64 - 1.0));
    let (theta_hat, r_hat) = to_polar(mu_hat);
    Ok(WindowEstimate {
        start,
        width: h,
        mu_hat,
        b_hat: Vec2::ZERO,
        sigma2_hat,
        theta_hat,
        r_hat,
    })
}

/// Fit for the window of `track` covering times `start + 1 ..= start + h`,
/// dispatched on the model kind. RW windows span `h` increments, i.e. the
/// same time range.
pub fn fit_window(track: &Track, kind: ModelKind, start: i64, h: usize) -> Result<WindowEstimate> {
    match kind {
        ModelKind::Lw => {
            let a = track.offset_of(start + 1);
            lw_fit(&track.points()[a..a + h], start)
        }
        ModelKind::Rw => {
            // Increment m of `increments()` steps into time start_time + m + 1.
            let a = (start - track.start_time()) as usize;
            let inc = track.increments();
            rw_fit(&inc[a..a + h], start)
        }
    }
}

/// Robust global variance: the median of sliding `sigma2_hat(i, 2h)` values,
/// with window starts within `2h` of any excluded change point removed.
pub fn robust_sigma2(track: &Track, h: usize, kind: ModelKind, exclusions: &[i64]) -> Result<f64> {
    let width = 2 * h;
    if track.len() < width + 1 {
        return Err(Error::TrackTooShort {
            len: track.len(),
            required: width + 1,
        });
    }
    let first_start = match kind {
        ModelKind::Lw => track.start_time() - 1,
        ModelKind::Rw => track.start_time(),
    };
    let last_start = track.end_time() - width as i64;
    let mut values = Vec::new();
    for start in first_start..=last_start {
        if exclusions.iter().any(|c| (start - c).abs() <= width as i64) {
            continue;
        }
        values.push(fit_window(track, kind, start, width)?.sigma2_hat);
    }
    if values.is_empty() {
        return Err(Error::EstimationImpossible {
            reason: "all variance windows fall within an exclusion zone".to_string(),
        });
    }
    Ok(math::median(&mut values))
}

/// Piecewise refit: per-segment direction and step length from full-segment
/// fits, variance from [`robust_sigma2`] with the change points excluded.
///
/// Change points split the track at their time index (a change point is the
/// last index of its segment). The returned specification is re-based to
/// times `1 ..= track.len()` so it can be fed back into
/// [`crate::model::simulate`].
pub fn piecewise_refit(track: &Track, cps: &[i64], h: usize, kind: ModelKind) -> Result<ModelSpec> {
    let t0 = track.start_time();
    let t_end = track.end_time();
    for (j, c) in cps.iter().enumerate() {
        if *c < t0 || *c >= t_end {
            return Err(Error::InvalidSpec {
                reason: format!("change point {c} outside the track's interior [{t0}, {}]", t_end - 1),
            });
        }
        if j > 0 && cps[j - 1] >= *c {
            return Err(Error::InvalidSpec {
                reason: "change points must be strictly increasing".to_string(),
            });
        }
    }

    let min_len = match kind {
        ModelKind::Lw => MIN_LW_WINDOW,
        ModelKind::Rw => MIN_RW_WINDOW + 1,
    };
    let mut thetas = Vec::with_capacity(cps.len() + 1);
    let mut step_lengths = Vec::with_capacity(cps.len() + 1);
    let mut first_fit: Option<WindowEstimate> = None;
    let mut seg_start = t0; // first time index of the current segment
    for (j, bound) in cps.iter().chain(core::iter::once(&t_end)).enumerate() {
        let len = (bound - seg_start + 1) as usize;
        if len < min_len {
            return Err(Error::ShortSegment {
                segment: j,
                len,
                min: min_len,
            });
        }
        let fit = match kind {
            ModelKind::Lw => {
                let a = track.offset_of(seg_start);
                lw_fit(&track.points()[a..a + len], seg_start - 1)?
            }
            ModelKind::Rw => {
                // Within-segment increments: steps into seg_start+1 ..= bound,
                // except the first segment which has no step into seg_start.
                let from = if j == 0 { seg_start + 1 } else { seg_start };
                let a = (from - t0 - 1) as usize;
                let count = (bound - from + 1) as usize;
                let inc = track.increments();
                rw_fit(&inc[a..a + count], from - 1)?
            }
        };
        let (theta, r) = (fit.theta_hat, fit.r_hat);
        thetas.push(theta);
        step_lengths.push(r);
        if first_fit.is_none() {
            first_fit = Some(fit);
        }
        seg_start = bound + 1;
    }

    let sigma2 = robust_sigma2(track, h, kind, cps)?;
    let first = first_fit.expect("at least one segment");
    // Re-base to times 1..=len: position 1 of the refit spec matches the
    // track's first observed position.
    let b1 = match kind {
        ModelKind::Lw => first.b_hat + first.mu_hat * (t0 as f64 - 1.0),
        ModelKind::Rw => track.points()[0] - first.mu_hat,
    };
    let rebased: Vec<i64> = cps.iter().map(|c| c - t0 + 1).collect();
    ModelSpec::new(
        kind,
        thetas,
        step_lengths,
        b1,
        sigma2,
        rebased,
        track.len() as i64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn embed(xs: &[f64]) -> Vec<Vec2> {
        xs.iter().map(|&x| Vec2::new(x, 0.0)).collect()
    }

    #[test]
    fn lw_fit_recovers_an_exact_line() {
        let est = lw_fit(&embed(&[1.0, 2.0, 3.0]), 0).unwrap();
        assert!((est.mu_hat.x - 1.0).abs() < 1e-12);
        assert!(est.mu_hat.y.abs() < 1e-12);
        assert!(est.b_hat.norm() < 1e-12);
        assert!(est.sigma2_hat.abs() < 1e-12);
    }

    #[test]
    fn lw_fit_hand_computed_window() {
        // x = (0, 1, 2, 10) at t = 1..4; OLS slope 3.1, intercept -4.5,
        // residuals (1.4, -0.7, -2.8, 2.1), SSE 14.7, denominator 2h-4 = 4.
        let est = lw_fit(&embed(&[0.0, 1.0, 2.0, 10.0]), 0).unwrap();
        assert!((est.mu_hat.x - 3.1).abs() < 1e-12, "mu {}", est.mu_hat.x);
        assert!((est.b_hat.x + 4.5).abs() < 1e-12, "b {}", est.b_hat.x);
        assert!((est.sigma2_hat - 3.675).abs() < 1e-12, "sigma2 {}", est.sigma2_hat);
    }

    #[test]
    fn lw_fit_rejects_tiny_windows() {
        assert!(matches!(
            lw_fit(&embed(&[0.0, 1.0]), 0),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn rw_fit_constant_increments() {
        let inc = vec![Vec2::new(1.0, 2.0); 7];
        let est = rw_fit(&inc, 0).unwrap();
        assert_eq!(est.mu_hat, Vec2::new(1.0, 2.0));
        assert_eq!(est.sigma2_hat, 0.0);
        assert_eq!(est.b_hat, Vec2::ZERO);
    }

    #[test]
    fn rw_fit_hand_computed_variance() {
        // x-increments (0, 2): mean 1, squared residuals 1 + 1, pooled
        // denominator 2(h-1) = 2.
        let est = rw_fit(&embed(&[0.0, 2.0]), 0).unwrap();
        assert!((est.mu_hat.x - 1.0).abs() < 1e-15);
        assert!((est.sigma2_hat - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polar_conversion_conventions() {
        let (theta, r) = to_polar(Vec2::new(0.0, 2.0));
        assert!((theta - FRAC_PI_2).abs() < 1e-15 && (r - 2.0).abs() < 1e-15);
        let (theta, r) = to_polar(Vec2::new(-1.0, 0.0));
        assert!((theta - PI).abs() < 1e-15 && (r - 1.0).abs() < 1e-15);
        let (theta, r) = to_polar(Vec2::new(1.0, 1.0));
        assert!((theta - FRAC_PI_4).abs() < 1e-15 && (r - SQRT_2).abs() < 1e-15);
        assert_eq!(to_polar(Vec2::ZERO), (0.0, 0.0));
    }

    #[test]
    fn weight_identities_spot_checks() {
        // h = 3, i = 0: w_b = (32, 8, -16).
        let scheme = WeightScheme::new(3, 0);
        assert_eq!(scheme.b(1), 32);
        assert_eq!(scheme.b(2), 8);
        assert_eq!(scheme.b(3), -16);
        assert_eq!(scheme.b_sum(), weight_normalizer(3));
        assert_eq!(scheme.b_weighted_time_sum(), 0);
        assert_eq!(scheme.mu_sum(), 0);
        assert_eq!(scheme.mu_weighted_time_sum(), weight_normalizer(3) / 6);
        assert_eq!(scheme.mu_square_sum(), weight_normalizer(3) / 3);
    }

    #[test]
    fn robust_sigma2_is_zero_on_a_noise_free_line() {
        let points: Vec<Vec2> = (1..=40).map(|t| Vec2::new(t as f64, 0.0)).collect();
        let track = Track::new("line", 1, points).unwrap();
        let est = robust_sigma2(&track, 5, ModelKind::Lw, &[]).unwrap();
        assert!(est.abs() < 1e-18);
    }

    #[test]
    fn robust_sigma2_errors_when_everything_is_excluded() {
        // Shortest admissible track: every window start sits within 2h of the
        // excluded point.
        let points: Vec<Vec2> = (1..=11).map(|t| Vec2::new(t as f64, 0.0)).collect();
        let track = Track::new("line", 1, points).unwrap();
        assert!(matches!(
            robust_sigma2(&track, 5, ModelKind::Lw, &[5]),
            Err(Error::EstimationImpossible { .. })
        ));
    }

    #[test]
    fn refit_recovers_a_noiseless_two_segment_process() {
        let spec = ModelSpec::new(
            ModelKind::Lw,
            vec![0.0, FRAC_PI_2],
            vec![1.0, 2.0],
            Vec2::ZERO,
            1.0,
            vec![40],
            90,
        )
        .unwrap();
        let ep = expected_like(&spec);
        let refit = piecewise_refit(&ep, &[40], 10, ModelKind::Lw).unwrap();
        for (got, want) in refit.thetas.iter().zip(&spec.thetas) {
            assert!((got - want).abs() < 1e-9);
        }
        for (got, want) in refit.step_lengths.iter().zip(&spec.step_lengths) {
            assert!((got - want).abs() < 1e-9);
        }
        // Noise-free input: robust variance is numerically zero, which the
        // spec validator rejects. Angles and step lengths are checked above.
    }

    // expected_process plus a vanishing jitter so ModelSpec validation accepts
    // the refit variance.
    fn expected_like(spec: &ModelSpec) -> Track {
        let ep = crate::model::expected_process(spec).unwrap();
        let noise = crate::rng::SeededRng::new(99, 0).normal_pairs(ep.len());
        let points = ep
            .points()
            .iter()
            .zip(noise)
            .map(|(&p, z)| p + z * 1e-9)
            .collect();
        Track::new("jittered", 1, points).unwrap()
    }

    #[test]
    fn refit_with_no_change_points_matches_a_single_fit() {
        let spec = ModelSpec::new(
            ModelKind::Lw,
            vec![0.7],
            vec![1.3],
            Vec2::new(2.0, -1.0),
            0.25,
            vec![],
            80,
        )
        .unwrap();
        let track = crate::model::simulate(&spec, &crate::rng::SeededRng::new(3, 0)).unwrap();
        let refit = piecewise_refit(&track, &[], 10, ModelKind::Lw).unwrap();
        let whole = lw_fit(track.points(), 0).unwrap();
        assert!((refit.thetas[0] - whole.theta_hat).abs() < 1e-12);
        assert!((refit.step_lengths[0] - whole.r_hat).abs() < 1e-12);
    }

    #[test]
    fn refit_reports_short_segments() {
        let points: Vec<Vec2> = (1..=30).map(|t| Vec2::new(t as f64, 0.0)).collect();
        let track = Track::new("line", 1, points).unwrap();
        let err = piecewise_refit(&track, &[2, 15], 5, ModelKind::Lw).unwrap_err();
        assert!(matches!(err, Error::ShortSegment { segment: 0, .. }), "{err}");
    }
}
