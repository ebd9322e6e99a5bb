//! Hypothesis test and iterative change-point estimation.
//!
//! The test statistic is the maximal deviation `M` of the difference process
//! from the origin, compared against a simulated radius `Q`. After rejection,
//! change points are estimated by repeatedly taking the argmax and deleting
//! its `2h`-neighbourhood `[c - h + 1, c + h]`. With several windows the
//! per-window candidate sets merge smallest window first; a candidate from
//! window `h` is dropped when an already accepted change point lies inside
//! the candidate's own `2h`-neighbourhood.

use alloc::vec::Vec;

use crate::error::Error;
use crate::model::{ModelKind, Track};
use crate::statistic::{self, DifferenceProcess, NullSimConfig};
use crate::Result;

/// Outcome of the statistical test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `M > Q`: at least one change point.
    Reject,
    /// `M <= Q`: the null hypothesis stands.
    Retain,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Reject => "reject",
            Verdict::Retain => "retain",
        }
    }
}

/// Kind of change attributed to an estimated change point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChangeClass {
    Direction,
    StepLength,
    Both,
    Unclassified,
}

impl ChangeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ChangeClass::Direction => "direction",
            ChangeClass::StepLength => "step_length",
            ChangeClass::Both => "both",
            ChangeClass::Unclassified => "unclassified",
        }
    }
}

/// An estimated change point: the center index is the last index attributed
/// to the left regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChangePoint {
    pub index: i64,
    /// Window width that proposed this change point.
    pub window: usize,
    pub class: ChangeClass,
}

/// Result of the maximal-deviation test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestOutcome {
    /// Maximal deviation over all windows and centers.
    pub statistic: f64,
    /// Simulated rejection radius.
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Full detection output, including the per-window processes for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionReport {
    pub verdict: Verdict,
    /// Test statistic `M`.
    pub statistic: f64,
    /// Rejection radius `Q`.
    pub threshold: f64,
    pub alpha: f64,
    /// Accepted change points, sorted by index.
    pub change_points: Vec<ChangePoint>,
    /// One process per window, ascending window width.
    pub processes: Vec<DifferenceProcess>,
}

fn processes_for(track: &Track, config: &NullSimConfig, kind: ModelKind) -> Result<Vec<DifferenceProcess>> {
    config.validate()?;
    let required = 2 * config.max_window() + 1;
    if track.len() < required {
        return Err(Error::TrackTooShort {
            len: track.len(),
            required,
        });
    }
    config
        .windows
        .iter()
        .map(|&h| statistic::g_process(track, h, kind))
        .collect()
}

fn max_over(processes: &[DifferenceProcess]) -> f64 {
    processes
        .iter()
        .map(|p| p.max_deviation().1)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Maximal-deviation test of `track` against a simulated threshold.
pub fn hypothesis_test(track: &Track, config: &NullSimConfig, kind: ModelKind) -> Result<TestOutcome> {
    let processes = processes_for(track, config, kind)?;
    let statistic = max_over(&processes);
    let threshold = statistic::threshold(config, kind)?.q;
    Ok(TestOutcome {
        statistic,
        threshold,
        verdict: if statistic > threshold {
            Verdict::Reject
        } else {
            Verdict::Retain
        },
    })
}

/// Iterative argmax-and-delete estimation on a single process.
///
/// Returns change points in detection order. Ties at the argmax resolve to
/// the smallest center; deletion zones are clipped at the process bounds.
pub fn detect_single_window(process: &DifferenceProcess, q: f64) -> Vec<i64> {
    let h = process.window() as i64;
    let first = process.first_center();
    let norms: Vec<f64> = process.values().iter().map(|v| v.norm()).collect();
    let mut deleted = alloc::vec![false; norms.len()];
    let mut found = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (idx, &norm) in norms.iter().enumerate() {
            if deleted[idx] || norm <= q {
                continue;
            }
            if best.map_or(true, |(_, b)| norm > b) {
                best = Some((idx, norm));
            }
        }
        let Some((idx, _)) = best else { break };
        let center = first + idx as i64;
        found.push(center);
        let lo = (center - h + 1 - first).max(0) as usize;
        let hi = (center + h - first).min(norms.len() as i64 - 1) as usize;
        for slot in &mut deleted[lo..=hi] {
            *slot = true;
        }
    }
    found
}

/// Multi-window detection with a shared global threshold.
pub fn detect_multi_window(
    track: &Track,
    config: &NullSimConfig,
    kind: ModelKind,
) -> Result<DetectionReport> {
    let q = statistic::threshold(config, kind)?.q;
    detect_multi_window_with_threshold(track, config, kind, q)
}

/// Multi-window detection against a precomputed threshold `q` (as obtained
/// from [`statistic::threshold`] or a parallel equivalent).
pub fn detect_multi_window_with_threshold(
    track: &Track,
    config: &NullSimConfig,
    kind: ModelKind,
    q: f64,
) -> Result<DetectionReport> {
    let processes = processes_for(track, config, kind)?;
    let statistic = max_over(&processes);
    let verdict = if statistic > q { Verdict::Reject } else { Verdict::Retain };

    let mut accepted: Vec<ChangePoint> = Vec::new();
    // Windows are ascending by construction. Candidates of one window are
    // separated by its own deletion rule; the neighbourhood check only
    // screens them against windows processed earlier.
    for process in &processes {
        let h = process.window();
        let candidates = detect_single_window(process, q);
        let mut kept: Vec<ChangePoint> = Vec::new();
        for c in candidates {
            let blocked = accepted
                .iter()
                .any(|a| a.index >= c - h as i64 + 1 && a.index <= c + h as i64);
            if !blocked {
                kept.push(ChangePoint {
                    index: c,
                    window: h,
                    class: ChangeClass::Unclassified,
                });
            }
        }
        accepted.extend(kept);
    }
    accepted.sort_unstable_by_key(|cp| cp.index);

    Ok(DetectionReport {
        verdict,
        statistic,
        threshold: q,
        alpha: config.alpha,
        change_points: accepted,
        processes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Vec2;
    use alloc::vec;

    fn synthetic(h: usize, first: i64, norms: &[f64]) -> DifferenceProcess {
        let values = norms.iter().map(|&n| Vec2::new(n, 0.0)).collect();
        DifferenceProcess::from_parts(ModelKind::Lw, h, first, values).unwrap()
    }

    #[test]
    fn no_exceedance_yields_no_change_points() {
        let p = synthetic(3, 3, &[0.1, 0.5, 0.3, 0.2]);
        assert!(detect_single_window(&p, 1.0).is_empty());
    }

    #[test]
    fn single_peak_is_found() {
        let mut norms = vec![0.2; 40];
        norms[17] = 2.0;
        let p = synthetic(5, 5, &norms);
        assert_eq!(detect_single_window(&p, 1.0), vec![22]);
    }

    #[test]
    fn second_peak_inside_the_deletion_zone_is_dropped() {
        // Peaks at i0 and i0 + h with the larger one first: deleting
        // [i0 - h + 1, i0 + h] swallows the second.
        let h = 5usize;
        let first = 5i64;
        let mut norms = vec![0.2; 40];
        norms[10] = 3.0; // center 15
        norms[15] = 2.0; // center 20 = 15 + h
        let p = synthetic(h, first, &norms);
        assert_eq!(detect_single_window(&p, 1.0), vec![15]);
    }

    #[test]
    fn argmax_ties_resolve_to_the_lower_index() {
        let mut norms = vec![0.0; 30];
        norms[4] = 2.0;
        norms[20] = 2.0;
        let p = synthetic(3, 0, &norms);
        let found = detect_single_window(&p, 1.0);
        assert_eq!(found[0], 4);
        assert_eq!(found, vec![4, 20]);
    }

    #[test]
    fn deletion_zone_is_clipped_at_the_bounds() {
        let mut norms = vec![0.0; 10];
        norms[0] = 2.0;
        let p = synthetic(8, 8, &norms);
        assert_eq!(detect_single_window(&p, 1.0), vec![8]);
    }

    #[test]
    fn short_track_is_a_precondition_error() {
        let points: Vec<Vec2> = (0..20).map(|t| Vec2::new(t as f64, (t % 2) as f64)).collect();
        let track = crate::model::Track::new("short", 1, points).unwrap();
        let config = NullSimConfig::new(25, vec![12], 4, 0.05, 1).unwrap();
        assert!(matches!(
            hypothesis_test(&track, &config, ModelKind::Lw),
            Err(Error::TrackTooShort { .. })
        ));
    }
}
