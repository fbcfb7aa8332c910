//! Counter-based 64-bit random stream.
//!
//! SplitMix64: the state advances by a fixed odd increment and each output
//! is a bijective mix of the state. Seeds for independent tasks are derived
//! with [`mix64`], so a task's stream depends only on its own coordinates and
//! never on scheduling.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 finalizer.
#[inline]
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a list of coordinates into one seed.
pub fn mix64(master: u64, coords: &[u64]) -> u64 {
    let mut h = splitmix64_mix(master ^ GOLDEN_GAMMA);
    for (i, &c) in coords.iter().enumerate() {
        let lane = splitmix64_mix(c.wrapping_add(GOLDEN_GAMMA.wrapping_mul(i as u64 + 1)));
        h = splitmix64_mix(h ^ lane);
    }
    h
}

/// Stable 64-bit id for a name (FNV-1a).
pub fn name_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        splitmix64_mix(self.state)
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
