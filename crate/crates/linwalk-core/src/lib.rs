//! Change-point detection for planar tracks that move along piecewise linear
//! structures.
//!
//! Two observation models share one piecewise linear *expected process*
//! (direction `theta`, step length `r` per segment):
//!
//! * **Linear Walk (LW)** — positions are points on the expected process plus
//!   independent Gaussian displacements. Increments are serially dependent
//!   (lag-1 correlation −1/2), so drift is estimated with a weighted moving
//!   kernel instead of the plain mean of increments.
//! * **Biased Random Walk (RW)** — increments are i.i.d. Gaussian around the
//!   drift; the classical MOSUM machinery applies.
//!
//! The crate simulates both models ([`model`]), fits window-local parameters
//! ([`estimate`]), builds the scaled bivariate difference process `G` together
//! with its parameter-free null counterpart `Gamma` ([`statistic`]), runs the
//! maximal-deviation test with simulated rejection thresholds and multi-window
//! change-point estimation ([`detect`]), and classifies detected change points
//! through direction/step-length difference series rendered as leaf plots
//! ([`leaf`]).
//!
//! Everything is a pure function of its inputs and a [`rng::SeededRng`]
//! configuration, so results are reproducible and safe to compute from many
//! threads at once. The crate is `no_std`-compatible (`alloc` required): build
//! with `--no-default-features --features libm` to drop `std`.
//!
//! ```
//! use linwalk_core::model::{simulate, ModelKind, ModelSpec};
//! use linwalk_core::rng::SeededRng;
//! use linwalk_core::statistic::NullSimConfig;
//! use linwalk_core::detect::detect_multi_window;
//! use linwalk_core::point::Vec2;
//!
//! let spec = ModelSpec::new(
//!     ModelKind::Lw,
//!     vec![0.0, core::f64::consts::FRAC_PI_2],
//!     vec![1.0, 1.0],
//!     Vec2::ZERO,
//!     0.25,
//!     vec![100],
//!     200,
//! )?;
//! let track = simulate(&spec, &SeededRng::new(7, 0))?;
//! let config = NullSimConfig::new(200, vec![30], 200, 0.05, 7)?;
//! let report = detect_multi_window(&track, &config, ModelKind::Lw)?;
//! assert!(!report.change_points.is_empty());
//! # Ok::<(), linwalk_core::Error>(())
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("linwalk-core needs either the `std` or the `libm` feature");

extern crate alloc;

pub mod detect;
mod error;
pub mod estimate;
pub mod leaf;
mod math;
pub mod model;
pub mod point;
pub mod rng;
pub mod statistic;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
