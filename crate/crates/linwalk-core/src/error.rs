use alloc::string::String;
use core::fmt;

/// Errors raised by model construction, estimation and detection.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A model or simulation configuration violates its invariants.
    InvalidSpec { reason: String },
    /// A fit window is too short for the requested estimator.
    WindowTooSmall { width: usize, min: usize },
    /// A track is too short for the requested window(s).
    TrackTooShort { len: usize, required: usize },
    /// Both window variance estimates vanished; the scaled difference is
    /// undefined at this center.
    DegenerateWindow { center: i64 },
    /// No usable windows remain after exclusions.
    EstimationImpossible { reason: String },
    /// A refit segment has too few points.
    ShortSegment { segment: usize, len: usize, min: usize },
    /// An argument lies outside a function's domain.
    Domain { reason: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec { reason } => write!(f, "invalid specification: {reason}"),
            Error::WindowTooSmall { width, min } => {
                write!(f, "window of width {width} is too small (need at least {min})")
            }
            Error::TrackTooShort { len, required } => {
                write!(f, "track of length {len} is too short (need at least {required})")
            }
            Error::DegenerateWindow { center } => write!(
                f,
                "degenerate track: both variance estimates are zero at center {center}"
            ),
            Error::EstimationImpossible { reason } => {
                write!(f, "estimation impossible: {reason}")
            }
            Error::ShortSegment { segment, len, min } => write!(
                f,
                "segment {segment} has {len} points but needs at least {min}"
            ),
            Error::Domain { reason } => write!(f, "domain error: {reason}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
