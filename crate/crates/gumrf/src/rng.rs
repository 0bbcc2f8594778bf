//! Counter-based deterministic random streams.
//!
//! Every consumer of randomness derives an independent stream from a root
//! seed plus a list of integer tags (component index, iteration, site,
//! band, ...). Streams depend only on `(seed, tags)`, never on scheduling,
//! which makes parallel samplers bitwise reproducible at any thread count.

use rand::RngCore;

/// Root seed for a sampling run. Same seed + same inputs = identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer; a strong 64-bit mixer.
#[inline]
fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A deterministic stream keyed by a seed and tag path, generating via the
/// splitmix64 sequence. Not cryptographic.
#[derive(Debug, Clone)]
pub struct StreamRng {
    state: u64,
}

impl StreamRng {
    pub fn new(seed: RngSeed) -> Self {
        StreamRng {
            state: mix64(seed.0 ^ GOLDEN),
        }
    }

    /// Derive a stream from `seed` and a tag path.
    pub fn from_tags(seed: RngSeed, tags: &[u64]) -> Self {
        let mut state = mix64(seed.0 ^ GOLDEN);
        for &t in tags {
            state = mix64(state.wrapping_add(GOLDEN) ^ mix64(t.wrapping_add(GOLDEN)));
        }
        StreamRng { state }
    }

    /// Collapse a tag path into a derived root seed (for sub-samplers that
    /// take a seed rather than a stream).
    pub fn derive_seed(seed: RngSeed, tags: &[u64]) -> RngSeed {
        RngSeed(Self::from_tags(seed, tags).state)
    }

    #[inline]
    pub fn next_u64_raw(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform draw in [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64_raw() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for StreamRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64_raw() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.next_u64_raw()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let v = self.next_u64_raw().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
