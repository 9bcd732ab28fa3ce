//! Seeded, splittable random streams.
//!
//! Every Monte Carlo routine draws from a [`RngStream`] identified by a
//! `(seed, stream)` pair. Identical pairs reproduce identical draws, and
//! parallel work is split into fixed chunks that each own a derived stream,
//! so results do not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier of a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Materialize the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Derive a child stream, e.g. one per Monte Carlo chunk.
    ///
    /// Children of distinct parents (or distinct indices) never share a
    /// stream id as long as `index < 2^20`.
    pub fn child(&self, index: u64) -> Self {
        debug_assert!(index < (1 << 20));
        Self {
            seed: self.seed,
            stream: self
                .stream
                .wrapping_mul(1 << 20)
                .wrapping_add(index)
                .wrapping_add(1 << 40),
        }
    }
}

/// Samples per chunk for chunked parallel Monte Carlo.
pub const CHUNK: usize = 1 << 14;

/// Split `n` draws into `(chunk_index, chunk_len)` pairs.
pub fn chunks(n: usize) -> Vec<(u64, usize)> {
    let mut out = Vec::with_capacity(n / CHUNK + 1);
    let mut left = n;
    let mut idx = 0u64;
    while left > 0 {
        let len = left.min(CHUNK);
        out.push((idx, len));
        left -= len;
        idx += 1;
    }
    out
}

/// Mean and standard error of a sample, accumulated with Welford's update.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanAcc {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanAcc {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan's parallel merge. Merge order is fixed by the caller.
    pub fn merge(&mut self, other: &MeanAcc) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl From<MeanAcc> for Estimate {
    fn from(acc: MeanAcc) -> Self {
        Self {
            mean: acc.mean(),
            std_err: acc.std_err(),
            samples: acc.count(),
        }
    }
}
