//! Leaf plots: windowed direction and step-length differences.
//!
//! Per center the direction difference is the wrapped angle between the left
//! and right window directions, the step-length difference the plain signed
//! difference of the estimated step lengths. Plotted against each other,
//! change points appear as leaves: vertical for direction changes, flat for
//! step-length changes, diagonal when both change at once. [`classify`] turns
//! that visual reading into labels, [`svg_document`] renders a standalone
//! figure.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::detect::{ChangeClass, DetectionReport};
use crate::error::Error;
use crate::estimate;
use crate::math;
use crate::model::{ModelKind, Track};
use crate::Result;

/// A change-point marker carried by a [`LeafSeries`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeafMarker {
    pub index: i64,
    pub class: ChangeClass,
}

/// Direction and step-length difference series over the valid centers of one
/// track.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafSeries {
    pub h: usize,
    first_center: i64,
    /// Wrapped direction differences in `(-pi, pi]`.
    pub d_theta: Vec<f64>,
    /// Signed step-length differences.
    pub d_r: Vec<f64>,
    pub markers: Vec<LeafMarker>,
}

impl LeafSeries {
    pub fn len(&self) -> usize {
        self.d_theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d_theta.is_empty()
    }

    pub fn first_center(&self) -> i64 {
        self.first_center
    }

    pub fn last_center(&self) -> i64 {
        self.first_center + self.d_theta.len() as i64 - 1
    }

    pub fn centers(&self) -> impl Iterator<Item = i64> + '_ {
        self.first_center..=self.last_center()
    }

    fn offset(&self, center: i64) -> Option<usize> {
        let idx = center - self.first_center;
        if idx < 0 || idx >= self.d_theta.len() as i64 {
            None
        } else {
            Some(idx as usize)
        }
    }

    /// `(d_r, d_theta)` at `center`, if within range.
    pub fn value_at(&self, center: i64) -> Option<(f64, f64)> {
        self.offset(center).map(|i| (self.d_r[i], self.d_theta[i]))
    }
}

/// Wrapped difference of two directions, in `(-pi, pi]`: the smaller angle
/// enclosed by the two, signed from left to right.
///
/// Antipodal inputs map to `+pi` under this convention.
pub fn direction_difference(theta_left: f64, theta_right: f64) -> f64 {
    let tau = 2.0 * core::f64::consts::PI;
    let mut m = (theta_right - theta_left) % tau;
    if m < 0.0 {
        m += tau;
    }
    // m is now in [0, tau); fold (pi, tau) to the negative side.
    if m > core::f64::consts::PI {
        m - tau
    } else {
        m
    }
}

/// Difference series of `track` for window `h`, with `detected` change points
/// attached as unclassified markers (indices outside the center range are
/// kept; they simply carry no series value).
pub fn leaf_series(track: &Track, h: usize, kind: ModelKind, detected: &[i64]) -> Result<LeafSeries> {
    let min = match kind {
        ModelKind::Lw => estimate::MIN_LW_WINDOW,
        ModelKind::Rw => estimate::MIN_RW_WINDOW,
    };
    if h < min {
        return Err(Error::WindowTooSmall { width: h, min });
    }
    if track.len() < 2 * h + 1 {
        return Err(Error::TrackTooShort {
            len: track.len(),
            required: 2 * h + 1,
        });
    }
    let t0 = track.start_time();
    let first_start = match kind {
        ModelKind::Lw => t0 - 1,
        ModelKind::Rw => t0,
    };
    let last_start = track.end_time() - h as i64;
    let mut fits = Vec::with_capacity((last_start - first_start + 1) as usize);
    for start in first_start..=last_start {
        fits.push(estimate::fit_window(track, kind, start, h)?);
    }
    let first_center = first_start + h as i64;
    let mut d_theta = Vec::new();
    let mut d_r = Vec::new();
    for center in first_center..=(track.end_time() - h as i64) {
        let left = &fits[(center - h as i64 - first_start) as usize];
        let right = &fits[(center - first_start) as usize];
        d_theta.push(direction_difference(left.theta_hat, right.theta_hat));
        d_r.push(right.r_hat - left.r_hat);
    }
    let markers = detected
        .iter()
        .map(|&index| LeafMarker {
            index,
            class: ChangeClass::Unclassified,
        })
        .collect();
    Ok(LeafSeries {
        h,
        first_center,
        d_theta,
        d_r,
        markers,
    })
}

/// Robust noise scale of a series: median absolute value over centers farther
/// than `h` from every marker. Falls back to the whole series when nothing is
/// left.
fn noise_scale(series: &LeafSeries, values: &[f64]) -> f64 {
    let h = series.h as i64;
    let mut away: Vec<f64> = series
        .centers()
        .zip(values)
        .filter(|(c, _)| series.markers.iter().all(|m| (c - m.index).abs() >= h))
        .map(|(_, v)| math::abs(*v))
        .collect();
    if away.is_empty() {
        away = values.iter().map(|v| math::abs(*v)).collect();
    }
    math::median(&mut away)
}

/// Classify the change point at `cp` from the shape of the series around it.
///
/// Each series value at `cp` is compared against 3x its robust noise scale;
/// the label is the axis that exceeds, `Both` when both do and neither
/// dominates the other by more than a factor of four, and `Direction` when
/// neither exceeds (the dominant axis breaks remaining ties).
pub fn classify(series: &LeafSeries, cp: i64) -> Result<ChangeClass> {
    let Some((d_r, d_theta)) = series.value_at(cp) else {
        return Err(Error::Domain {
            reason: format!(
                "change point {cp} outside the series range [{}, {}]",
                series.first_center(),
                series.last_center()
            ),
        });
    };
    let tau_theta = noise_scale(series, &series.d_theta).max(f64::MIN_POSITIVE);
    let tau_r = noise_scale(series, &series.d_r).max(f64::MIN_POSITIVE);
    let score_theta = math::abs(d_theta) / tau_theta;
    let score_r = math::abs(d_r) / tau_r;
    let exceeds_theta = score_theta >= 3.0;
    let exceeds_r = score_r >= 3.0;
    Ok(match (exceeds_theta, exceeds_r) {
        (true, true) => {
            // A leaf reads as diagonal only when the minor axis is a
            // substantial fraction of the major one.
            let (lo, hi) = if score_theta < score_r {
                (score_theta, score_r)
            } else {
                (score_r, score_theta)
            };
            if lo >= 0.25 * hi {
                ChangeClass::Both
            } else if score_theta >= score_r {
                ChangeClass::Direction
            } else {
                ChangeClass::StepLength
            }
        }
        (true, false) => ChangeClass::Direction,
        (false, true) => ChangeClass::StepLength,
        (false, false) => ChangeClass::Direction,
    })
}

/// Classify every change point of `report` in place, using one series per
/// source window with all detected points as markers.
pub fn classify_report(track: &Track, kind: ModelKind, report: &mut DetectionReport) -> Result<()> {
    let detected: Vec<i64> = report.change_points.iter().map(|cp| cp.index).collect();
    let mut windows: Vec<usize> = report.change_points.iter().map(|cp| cp.window).collect();
    windows.sort_unstable();
    windows.dedup();
    for h in windows {
        let series = leaf_series(track, h, kind, &detected)?;
        for cp in report.change_points.iter_mut().filter(|cp| cp.window == h) {
            cp.class = classify(&series, cp.index)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn marker_color(class: ChangeClass) -> &'static str {
    match class {
        ChangeClass::Direction => "#1f77b4",
        ChangeClass::StepLength => "#ff7f0e",
        ChangeClass::Both => "#9467bd",
        ChangeClass::Unclassified => "#7f7f7f",
    }
}

fn axis_range(values: &[f64], fallback: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (-fallback, fallback);
    }
    let pad = (hi - lo).max(fallback * 0.1) * 0.1;
    let (lo, hi) = (lo - pad, hi + pad);
    (lo.min(-fallback * 0.05), hi.max(fallback * 0.05))
}

/// Standalone SVG 1.1 rendering: `d_r` on the x-axis (track length units),
/// `d_theta` on the y-axis (radians), one polyline through the series and one
/// circle per marker, colored by class.
pub fn svg_document(series: &LeafSeries) -> String {
    let (x_lo, x_hi) = axis_range(&series.d_r, 1.0);
    let (y_lo, y_hi) = axis_range(&series.d_theta, core::f64::consts::PI);
    let plot_w = SVG_WIDTH - 2.0 * MARGIN;
    let plot_h = SVG_HEIGHT - 2.0 * MARGIN;
    let sx = move |v: f64| MARGIN + (v - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = move |v: f64| SVG_HEIGHT - MARGIN - (v - y_lo) / (y_hi - y_lo) * plot_h;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" fill=\"white\"/>\n"
    ));

    // Axes through the origin where visible, else along the plot edge.
    let x0 = sx(0.0f64.clamp(x_lo, x_hi));
    let y0 = sy(0.0f64.clamp(y_lo, y_hi));
    out.push_str(&format!(
        "  <line x1=\"{MARGIN:.3}\" y1=\"{y0:.3}\" x2=\"{:.3}\" y2=\"{y0:.3}\" stroke=\"#444\" stroke-width=\"1\"/>\n",
        SVG_WIDTH - MARGIN
    ));
    out.push_str(&format!(
        "  <line x1=\"{x0:.3}\" y1=\"{MARGIN:.3}\" x2=\"{x0:.3}\" y2=\"{:.3}\" stroke=\"#444\" stroke-width=\"1\"/>\n",
        SVG_HEIGHT - MARGIN
    ));
    for v in [x_lo, x_hi] {
        out.push_str(&format!(
            "  <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\" text-anchor=\"middle\">{v:.3}</text>\n",
            sx(v),
            SVG_HEIGHT - MARGIN + 16.0
        ));
    }
    for v in [y_lo, y_hi] {
        out.push_str(&format!(
            "  <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\" text-anchor=\"end\">{v:.3}</text>\n",
            MARGIN - 6.0,
            sy(v) + 4.0
        ));
    }
    out.push_str(&format!(
        "  <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"13\" text-anchor=\"middle\">step-length difference</text>\n",
        SVG_WIDTH / 2.0,
        SVG_HEIGHT - 14.0
    ));
    out.push_str(&format!(
        "  <text x=\"16\" y=\"{:.3}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.3})\">direction difference (rad)</text>\n",
        SVG_HEIGHT / 2.0,
        SVG_HEIGHT / 2.0
    ));

    if !series.is_empty() {
        let mut points = String::new();
        for (dr, dt) in series.d_r.iter().zip(&series.d_theta) {
            if !points.is_empty() {
                points.push(' ');
            }
            points.push_str(&format!("{:.3},{:.3}", sx(*dr), sy(*dt)));
        }
        out.push_str(&format!(
            "  <polyline points=\"{points}\" fill=\"none\" stroke=\"#2b2b2b\" stroke-width=\"1.2\"/>\n"
        ));
    }

    for marker in &series.markers {
        if let Some((dr, dt)) = series.value_at(marker.index) {
            out.push_str(&format!(
                "  <circle class=\"cp-marker\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"5\" fill=\"{}\" stroke=\"black\" stroke-width=\"0.8\"><title>cp {} ({})</title></circle>\n",
                sx(dr),
                sy(dt),
                marker_color(marker.class),
                marker.index,
                marker.class.as_str()
            ));
        }
    }

    out.push_str("</svg>\n");
    out
}

/// CSV export of the series with header `i,d_r,d_theta`.
pub fn series_csv(series: &LeafSeries) -> String {
    let mut out = String::from("# format_version: 1\ni,d_r,d_theta\n");
    for (center, (dr, dt)) in series.centers().zip(series.d_r.iter().zip(&series.d_theta)) {
        out.push_str(&format!("{center},{dr},{dt}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn direction_difference_small_angles() {
        assert!((direction_difference(0.1, 0.3) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn direction_difference_wraps_around() {
        let d = direction_difference(3.0, -3.0);
        assert!((d - (2.0 * PI - 6.0)).abs() < 1e-12, "{d}");
    }

    #[test]
    fn direction_difference_antipodal_convention() {
        for theta in [0.0, 0.4, -2.0] {
            assert!((direction_difference(theta, theta + PI) - PI).abs() < 1e-9);
            assert!((direction_difference(theta, theta - PI) - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn direction_difference_is_invariant_under_full_turns() {
        let tau = 2.0 * PI;
        for (a, b) in [(0.2, 1.4), (-2.0, 2.9), (3.0, -3.0)] {
            let base = direction_difference(a, b);
            assert!((direction_difference(a + tau, b) - base).abs() < 1e-12);
            assert!((direction_difference(a, b + tau) - base).abs() < 1e-12);
        }
    }

    fn series_with(d_theta: Vec<f64>, d_r: Vec<f64>, h: usize, markers: Vec<i64>) -> LeafSeries {
        LeafSeries {
            h,
            first_center: 0,
            d_theta,
            d_r,
            markers: markers
                .into_iter()
                .map(|index| LeafMarker {
                    index,
                    class: ChangeClass::Unclassified,
                })
                .collect(),
        }
    }

    #[test]
    fn classify_vertical_flat_and_diagonal_leaves() {
        let n = 41;
        let mut noise_t = vec![0.01; n];
        let mut noise_r = vec![0.01; n];
        // vertical: direction spike only
        noise_t[20] = 2.0;
        let s = series_with(noise_t.clone(), noise_r.clone(), 5, vec![20]);
        assert_eq!(classify(&s, 20).unwrap(), ChangeClass::Direction);
        // horizontal: step-length spike only
        noise_t[20] = 0.01;
        noise_r[20] = 0.5;
        let s = series_with(noise_t.clone(), noise_r.clone(), 5, vec![20]);
        assert_eq!(classify(&s, 20).unwrap(), ChangeClass::StepLength);
        // diagonal: both spike
        noise_t[20] = 2.0;
        let s = series_with(noise_t, noise_r, 5, vec![20]);
        assert_eq!(classify(&s, 20).unwrap(), ChangeClass::Both);
    }

    #[test]
    fn classify_requires_the_point_inside_the_range() {
        let s = series_with(vec![0.0; 5], vec![0.0; 5], 3, vec![]);
        assert!(classify(&s, 99).is_err());
    }

    #[test]
    fn svg_for_an_empty_series_has_axes_only() {
        let s = series_with(vec![], vec![], 3, vec![]);
        let svg = svg_document(&s);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<line"));
        assert!(!svg.contains("<polyline"));
        assert!(!svg.contains("cp-marker"));
    }

    #[test]
    fn svg_polyline_has_one_vertex_per_point() {
        let s = series_with(vec![0.1, 0.2, 0.3], vec![0.0, 0.1, -0.1], 3, vec![]);
        let svg = svg_document(&s);
        let points = svg
            .split("points=\"")
            .nth(1)
            .and_then(|rest| rest.split('"').next())
            .unwrap();
        assert_eq!(points.split(' ').count(), 3);
    }

    #[test]
    fn svg_renders_exactly_one_element_per_marker() {
        let s = series_with(vec![0.1, 0.2, 0.3], vec![0.0, 0.1, -0.1], 3, vec![1]);
        let svg = svg_document(&s);
        assert_eq!(svg.matches("cp-marker").count(), 1);
    }

    #[test]
    fn csv_header_and_rows() {
        let s = series_with(vec![0.25, -0.5], vec![1.0, 2.0], 3, vec![]);
        let csv = series_csv(&s);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "# format_version: 1");
        assert_eq!(lines.next().unwrap(), "i,d_r,d_theta");
        assert_eq!(lines.next().unwrap(), "0,1,0.25");
        assert_eq!(lines.next().unwrap(), "1,2,-0.5");
    }
}
