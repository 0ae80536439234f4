//! Seeded uniform streams.
//!
//! A simulation consumes nothing but uniform reals on the open interval
//! (0, 1), in a fixed order. Sweeps derive one child seed per sample index so
//! results do not depend on how samples are scheduled across workers.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifies the generator family and the float conversion. Written into
/// every output file's metadata.
pub const GENERATOR_ID: &str =
    "rand_chacha-0.9/ChaCha8Rng::seed_from_u64; u01 = ((next_u64 >> 11) + 0.5) * 2^-53";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// A source of uniform draws in (0, 1).
pub trait UniformSource {
    fn next_open01(&mut self) -> f64;
}

impl<S: UniformSource + ?Sized> UniformSource for &mut S {
    fn next_open01(&mut self) -> f64 {
        (**self).next_open01()
    }
}

/// The simulation generator.
#[derive(Clone, Debug)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn seed_from_u64(seed: u64) -> Self {
        SimRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl UniformSource for SimRng {
    fn next_open01(&mut self) -> f64 {
        // 53 random mantissa bits, offset by half a step so neither 0 nor 1 occurs.
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

/// Wraps a source and counts draws.
#[derive(Clone, Debug)]
pub struct CountingSource<S> {
    inner: S,
    count: u64,
}

impl<S> CountingSource<S> {
    pub fn new(inner: S) -> Self {
        CountingSource { inner, count: 0 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

impl<S: UniformSource> UniformSource for CountingSource<S> {
    fn next_open01(&mut self) -> f64 {
        self.count += 1;
        self.inner.next_open01()
    }
}

/// Replays a fixed list of draws; panics when exhausted.
#[derive(Clone, Debug)]
pub struct ScriptedSource {
    draws: Vec<f64>,
    pos: usize,
}

impl ScriptedSource {
    pub fn new(draws: Vec<f64>) -> Self {
        ScriptedSource { draws, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.draws.len() - self.pos
    }
}

impl UniformSource for ScriptedSource {
    fn next_open01(&mut self) -> f64 {
        let v = self.draws[self.pos];
        self.pos += 1;
        v
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sample `index` of a sweep.
///
/// `splitmix64(master + γ·(index + 1))` with γ the odd golden-ratio constant.
/// For a fixed master the map from index to seed is injective: multiplication
/// by an odd constant and the splitmix finalizer are both bijections on u64.
pub fn child_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

/// Seed for a secondary stream keyed by a domain tag, used for parameter sampling.
pub fn domain_seed(master_seed: u64, domain: u64) -> u64 {
    splitmix64(splitmix64(master_seed ^ domain).wrapping_add(GOLDEN_GAMMA))
}
