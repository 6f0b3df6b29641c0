//! Counter-based randomness.
//!
//! Every random draw is a pure function of `(seed, stream, counter)`. Trees key their
//! streams by a stable hash of the word path, so a node's offspring do not depend on
//! traversal order or on how work is split across threads.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0xD1B5_4A32_D192_ED03;
const SYMBOL_MUL: u64 = 0xD6E8_FEB8_6659_FD93;

/// Hash of the empty word.
pub const ROOT_HASH: u64 = 0x243F_6A88_85A3_08D3;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of `parent · symbol` given the hash of `parent`.
#[inline]
pub fn child_hash(parent: u64, symbol: u32) -> u64 {
    mix64(parent.wrapping_mul(GOLDEN) ^ (u64::from(symbol) + 1).wrapping_mul(SYMBOL_MUL))
}

/// Hash of a whole word, folded from the root.
pub fn path_hash(symbols: &[u32]) -> u64 {
    symbols.iter().fold(ROOT_HASH, |h, &s| child_hash(h, s))
}

/// Derives an independent seed from `(seed, index)`; used for trials and resampling.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(STREAM_SALT)))
}

/// A keyed SplitMix64 stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: mix64(seed ^ mix64(stream ^ STREAM_SALT)),
            counter: 0,
        }
    }

    /// Value at an absolute position of the stream, without advancing.
    #[inline]
    pub fn at(&self, index: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)),
        )
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = self.at(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform integer in `0..n` (`n > 0`), by widening multiply with rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
