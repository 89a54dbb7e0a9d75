//! Counter-based random numbers.
//!
//! Every random draw in the crate is a pure function of `(seed, stream,
//! index)`, computed with the Philox4x32-10 bijection. There is no generator
//! state to thread through parallel code: two workers asking for the same
//! triple get the same bits, whatever the order in which they ask.

use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
#[inline]
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Two 64-bit words for `(seed, stream, index)`.
#[inline]
pub fn block(seed: u64, stream: u64, index: u64) -> (u64, u64) {
    let out = philox4x32_10(
        [index as u32, (index >> 32) as u32, stream as u32, (stream >> 32) as u32],
        [seed as u32, (seed >> 32) as u32],
    );
    (
        u64::from(out[0]) | (u64::from(out[1]) << 32),
        u64::from(out[2]) | (u64::from(out[3]) << 32),
    )
}

/// Uniform on (0, 1] with 53 random bits.
#[inline]
pub fn unit_open_closed(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on [0, 1) with 53 random bits.
#[inline]
pub fn unit_closed_open(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw keyed by `(seed, stream, index)` (Box–Muller, cosine branch).
#[inline]
pub fn standard_normal(seed: u64, stream: u64, index: u64) -> f64 {
    let (a, b) = block(seed, stream, index);
    let radius = (-2.0 * unit_open_closed(a).ln()).sqrt();
    radius * (2.0 * PI * unit_closed_open(b)).cos()
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-task seed derived from a run's master seed. Adding tasks to a run never
/// changes the seeds of the existing ones.
pub fn derive_seed(master: u64, task: u64) -> u64 {
    mix64(mix64(master ^ 0x6A09_E667_F3BC_C909).wrapping_add(task))
}

/// Sequential view over one `(seed, stream)` pair; the counter is the index.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    stream: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let (a, _) = block(self.seed, self.stream, self.counter);
        self.counter += 1;
        a
    }

    /// Uniform on [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        unit_closed_open(self.next_u64())
    }

    pub fn next_normal(&mut self) -> f64 {
        let z = standard_normal(self.seed, self.stream, self.counter);
        self.counter += 1;
        z
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }
}
