//! Reproducible noise streams.
//!
//! Every stochastic operation in this crate consumes a [`SeededRng`]: a
//! `(master_seed, stream_id)` pair mapped onto a ChaCha8 stream. Identical
//! pairs yield identical standard-normal sequences; distinct stream ids yield
//! independent streams, so simulations can share one master seed without
//! correlating.
//!
//! Stream ids are namespaced so that track simulation and null-distribution
//! simulation never collide even under the same master seed: tracks use ids
//! below [`NULL_SIM_STREAM_OFFSET`], null simulations ids above it.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::point::Vec2;

/// First stream id reserved for null-distribution simulations.
pub const NULL_SIM_STREAM_OFFSET: u64 = 1 << 63;

/// A reproducible standard-normal source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeededRng {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeededRng {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        SeededRng {
            master_seed,
            stream_id,
        }
    }

    /// Stream for the `ordinal`-th simulated track under `master_seed`.
    pub const fn track_stream(master_seed: u64, ordinal: u64) -> Self {
        SeededRng::new(master_seed, ordinal)
    }

    /// Stream for the `sim`-th null-distribution realization under
    /// `master_seed`.
    pub const fn null_sim_stream(master_seed: u64, sim: u64) -> Self {
        SeededRng::new(master_seed, NULL_SIM_STREAM_OFFSET.wrapping_add(sim))
    }

    fn chacha(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// `n` independent bivariate standard normals.
    pub fn normal_pairs(&self, n: usize) -> Vec<Vec2> {
        let mut rng = self.chacha();
        (0..n)
            .map(|_| {
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                Vec2::new(x, y)
            })
            .collect()
    }
}
