//! Track models: the piecewise linear expected process and its Linear Walk /
//! biased Random Walk observations.
//!
//! A model is parameterized per segment by a direction `theta_j` and a step
//! length `r_j` (equivalently the drift `mu_j = r_j (cos theta_j, sin
//! theta_j)`), joined continuously at integer change points. The Linear Walk
//! places independent Gaussian displacements around the expected process; the
//! Random Walk accumulates them.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::Error;
use crate::point::Vec2;
use crate::rng::SeededRng;
use crate::Result;

/// Observation model attached to an expected process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Linear Walk: independent displacements, serially dependent increments.
    Lw,
    /// Biased Random Walk: cumulative noise, i.i.d. increments.
    Rw,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lw => "lw",
            ModelKind::Rw => "rw",
        }
    }
}

impl core::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lw" | "LW" => Ok(ModelKind::Lw),
            "rw" | "RW" => Ok(ModelKind::Rw),
            other => Err(Error::InvalidSpec {
                reason: format!("unknown model kind '{other}' (expected lw or rw)"),
            }),
        }
    }
}

/// Piecewise parameter set of an expected process plus the observation model.
///
/// With change points `c_1 < … < c_k` (and `c_0 = 0`, `c_{k+1} = horizon`),
/// segment `j` covers times `c_{j-1}+1 ..= c_j` and has drift
/// `mu_j = r_j (cos theta_j, sin theta_j)`. Segment offsets chain so that the
/// expected process is continuous: one step of the new drift bridges a change
/// point.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Segment directions in radians.
    pub thetas: Vec<f64>,
    /// Segment step lengths, all positive.
    pub step_lengths: Vec<f64>,
    /// Offset of the first segment; the first emitted position is `b1 + mu_1`.
    pub b1: Vec2,
    /// Noise variance, positive.
    pub sigma2: f64,
    /// Strictly increasing change points, each in `[1, horizon - 1]`.
    pub change_points: Vec<i64>,
    /// Number of emitted positions; times run `1 ..= horizon`.
    pub horizon: i64,
}

impl ModelSpec {
    pub fn new(
        kind: ModelKind,
        thetas: Vec<f64>,
        step_lengths: Vec<f64>,
        b1: Vec2,
        sigma2: f64,
        change_points: Vec<i64>,
        horizon: i64,
    ) -> Result<Self> {
        let spec = ModelSpec {
            kind,
            thetas,
            step_lengths,
            b1,
            sigma2,
            change_points,
            horizon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Err(Error::InvalidSpec { reason });
        if self.horizon < 1 {
            return invalid(format!("horizon must be at least 1, got {}", self.horizon));
        }
        let segments = self.change_points.len() + 1;
        if self.thetas.len() != segments || self.step_lengths.len() != segments {
            return invalid(format!(
                "{} change points need {} directions and step lengths, got {} and {}",
                self.change_points.len(),
                segments,
                self.thetas.len(),
                self.step_lengths.len()
            ));
        }
        if self.thetas.iter().any(|t| !t.is_finite()) {
            return invalid("directions must be finite".to_string());
        }
        if self.step_lengths.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return invalid("step lengths must be positive and finite".to_string());
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return invalid(format!("sigma2 must be positive and finite, got {}", self.sigma2));
        }
        if !self.b1.is_finite() {
            return invalid("start offset must be finite".to_string());
        }
        for (j, c) in self.change_points.iter().enumerate() {
            if *c < 1 || *c > self.horizon - 1 {
                return invalid(format!(
                    "change point {c} lies outside the interior [1, {}]",
                    self.horizon - 1
                ));
            }
            if j > 0 && self.change_points[j - 1] >= *c {
                return invalid(format!(
                    "change points must be strictly increasing ({} then {c})",
                    self.change_points[j - 1]
                ));
            }
        }
        for j in 1..segments {
            if self.thetas[j] == self.thetas[j - 1] && self.step_lengths[j] == self.step_lengths[j - 1]
            {
                return invalid(format!(
                    "segments {} and {} share direction and step length; at least one must change",
                    j - 1,
                    j
                ));
            }
        }
        Ok(())
    }

    pub fn segment_count(&self) -> usize {
        self.change_points.len() + 1
    }

    /// Segment drifts `mu_j`.
    pub fn drifts(&self) -> Vec<Vec2> {
        self.thetas
            .iter()
            .zip(&self.step_lengths)
            .map(|(&theta, &r)| Vec2::from_polar(theta, r))
            .collect()
    }

    /// Segment offsets `b_j`, chained so adjacent segments connect.
    pub fn offsets(&self) -> Vec<Vec2> {
        let drifts = self.drifts();
        let mut offsets = Vec::with_capacity(drifts.len());
        offsets.push(self.b1);
        for j in 1..drifts.len() {
            let prev_start = if j >= 2 { self.change_points[j - 2] } else { 0 };
            let prev_len = (self.change_points[j - 1] - prev_start) as f64;
            let prev = offsets[j - 1];
            offsets.push(prev + drifts[j - 1] * prev_len);
        }
        offsets
    }
}

/// A time-indexed sequence of planar positions with consecutive integer times.
#[derive(Clone, Debug, PartialEq)]
pub struct Track {
    id: String,
    start_time: i64,
    points: Vec<Vec2>,
}

impl Track {
    pub fn new(id: impl Into<String>, start_time: i64, points: Vec<Vec2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpec {
                reason: "a track needs at least one position".to_string(),
            });
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidSpec {
                reason: format!("non-finite position ({}, {})", p.x, p.y),
            });
        }
        Ok(Track {
            id: id.into(),
            start_time,
            points,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Time of the first position.
    pub fn start_time(&self) -> i64 {
        self.start_time
    }

    /// Time of the last position.
    pub fn end_time(&self) -> i64 {
        self.start_time + self.points.len() as i64 - 1
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Position observed at time `t`, if within range.
    pub fn position_at(&self, t: i64) -> Option<Vec2> {
        let idx = t.checked_sub(self.start_time)?;
        if idx < 0 {
            return None;
        }
        self.points.get(idx as usize).copied()
    }

    /// Slice offset of time `t`; callers must keep `t` in range.
    pub(crate) fn offset_of(&self, t: i64) -> usize {
        debug_assert!(t >= self.start_time && t <= self.end_time());
        (t - self.start_time) as usize
    }

    /// Increments `Y_t = X_t - X_{t-1}`; entry `m` is the step into the
    /// position at time `start_time + m + 1`.
    pub fn increments(&self) -> Vec<Vec2> {
        self.points.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// The deterministic expected process `e_1 ..= e_T` of a specification.
pub fn expected_process(spec: &ModelSpec) -> Result<Track> {
    spec.validate()?;
    let drifts = spec.drifts();
    let offsets = spec.offsets();
    let mut points = Vec::with_capacity(spec.horizon as usize);
    let mut segment = 0usize;
    let mut segment_start = 0i64; // c_{j-1}
    for t in 1..=spec.horizon {
        while segment < spec.change_points.len() && t > spec.change_points[segment] {
            segment += 1;
            segment_start = spec.change_points[segment - 1];
        }
        let local = (t - segment_start) as f64;
        points.push(offsets[segment] + drifts[segment] * local);
    }
    Track::new("ep", 1, points)
}

/// Simulate one track from `spec`, deterministically in `rng`.
///
/// The noise stream is drawn once with `horizon + 1` entries; entry `0` is the
/// materialized `Z_0` that aligns increment-based identities, positions use
/// entries `1 ..= horizon`.
pub fn simulate(spec: &ModelSpec, rng: &SeededRng) -> Result<Track> {
    let noise = rng.normal_pairs(spec.horizon as usize + 1);
    let mut track = simulate_from_noise(spec, &noise)?;
    track.set_id(format!("sim{}", rng.stream_id));
    Ok(track)
}

/// Simulate from an explicit standard-normal sequence `Z_0 ..= Z_T`
/// (`noise.len() == horizon + 1`).
///
/// Mostly useful to share one noise realization between a simulated track and
/// the null process built from the same sequence.
pub fn simulate_from_noise(spec: &ModelSpec, noise: &[Vec2]) -> Result<Track> {
    spec.validate()?;
    if noise.len() != spec.horizon as usize + 1 {
        return Err(Error::InvalidSpec {
            reason: format!(
                "need horizon + 1 = {} noise entries, got {}",
                spec.horizon + 1,
                noise.len()
            ),
        });
    }
    let expected = expected_process(spec)?;
    let sigma = crate::math::sqrt(spec.sigma2);
    let points = match spec.kind {
        ModelKind::Lw => expected
            .points()
            .iter()
            .zip(noise[1..].iter())
            .map(|(&e, &z)| e + z * sigma)
            .collect(),
        ModelKind::Rw => {
            let mut cumulative = Vec2::ZERO;
            expected
                .points()
                .iter()
                .zip(noise[1..].iter())
                .map(|(&e, &z)| {
                    cumulative += z;
                    e + cumulative * sigma
                })
                .collect()
        }
    };
    Track::new("sim", 1, points)
}
