//! Bloom filter logging store and the two-filter rotation scheme that
//! keeps a long-running router's false-positive rate bounded.
//!
//! A filter holds `m` bits probed by `k` double-hashed positions per key.
//! With `j` insertions the false-positive probability is
//! `(1 - (1 - 1/m)^(kj))^k`, approximately `(1 - e^(-kj/m))^k`; both forms
//! are exposed for sizing and calibration.

use thiserror::Error;

use crate::hashing::mix64;
use crate::messages::Digest;

#[derive(Debug, Error, PartialEq)]
pub enum BloomError {
    #[error("bit count must be at least 1")]
    ZeroBits,
    #[error("hash count must be at least 1")]
    ZeroHashes,
    #[error("element count must be at least 1")]
    ZeroElements,
    #[error("target false-positive probability {0} is not attainable")]
    InfeasibleTarget(f64),
}

/// Exact false-positive probability after `inserted` insertions:
/// `(1 - (1 - 1/bits)^(hashes * inserted))^hashes`.
pub fn fp_probability(bits: u64, hashes: u32, inserted: u64) -> Result<f64, BloomError> {
    if bits == 0 {
        return Err(BloomError::ZeroBits);
    }
    if hashes == 0 {
        return Err(BloomError::ZeroHashes);
    }
    let exponent = hashes as f64 * inserted as f64;
    // (1 - 1/m)^(kj) evaluated in log space to stay accurate for large m
    let fill = -(exponent * (-1.0 / bits as f64).ln_1p()).exp_m1();
    Ok(fill.powf(hashes as f64))
}

/// Exponential approximation of [`fp_probability`]:
/// `(1 - e^(-hashes * inserted / bits))^hashes`.
pub fn fp_probability_approx(bits: u64, hashes: u32, inserted: u64) -> Result<f64, BloomError> {
    if bits == 0 {
        return Err(BloomError::ZeroBits);
    }
    if hashes == 0 {
        return Err(BloomError::ZeroHashes);
    }
    let fill = -(-(hashes as f64 * inserted as f64) / bits as f64).exp_m1();
    Ok(fill.powf(hashes as f64))
}

/// Smallest bit count for which the approximate false-positive formula
/// stays at or below `target_fp` after `elements` insertions:
/// `ceil(hashes * elements / -ln(1 - target_fp^(1/hashes)))`.
pub fn size_for(elements: u64, target_fp: f64, hashes: u32) -> Result<u64, BloomError> {
    if hashes == 0 {
        return Err(BloomError::ZeroHashes);
    }
    if elements == 0 {
        return Err(BloomError::ZeroElements);
    }
    if !(target_fp > 0.0 && target_fp < 1.0) {
        return Err(BloomError::InfeasibleTarget(target_fp));
    }
    let per_hash = target_fp.powf(1.0 / hashes as f64);
    if per_hash >= 1.0 {
        return Err(BloomError::InfeasibleTarget(target_fp));
    }
    let denom = -(-per_hash).ln_1p();
    Ok(((hashes as f64 * elements as f64) / denom).ceil() as u64)
}

/// Fixed-size Bloom filter keyed by 128-bit digests.
///
/// Probe positions come from the Kirsch-Mitzenmacher double-hashing
/// construction: `position_i = (h1 + i * h2) mod bits`, with `h1`, `h2`
/// derived from the digest halves and the filter seed, and `h2` forced odd
/// so the probe sequence covers the full range when `bits` is even.
#[derive(Debug, Clone)]
pub struct BloomFilter {
    words: Vec<u64>,
    bits: u64,
    hashes: u32,
    inserted: u64,
    capacity: u64,
    seed: u64,
}

impl BloomFilter {
    pub fn new(bits: u64, hashes: u32, capacity: u64, seed: u64) -> Result<Self, BloomError> {
        if bits == 0 {
            return Err(BloomError::ZeroBits);
        }
        if hashes == 0 {
            return Err(BloomError::ZeroHashes);
        }
        let words = vec![0u64; bits.div_ceil(64) as usize];
        Ok(BloomFilter {
            words,
            bits,
            hashes,
            inserted: 0,
            capacity,
            seed,
        })
    }

    /// Sizes the filter via [`size_for`] so that it hits `target_fp` when
    /// `capacity` elements have been inserted.
    pub fn with_target(
        capacity: u64,
        target_fp: f64,
        hashes: u32,
        seed: u64,
    ) -> Result<Self, BloomError> {
        let bits = size_for(capacity, target_fp, hashes)?;
        Self::new(bits, hashes, capacity, seed)
    }

    /// Sets the probe positions for `digest` and counts the insertion.
    /// Inserting past capacity is permitted here; the rotating pair is
    /// what enforces capacity.
    pub fn insert(&mut self, digest: Digest) {
        let (h1, h2) = self.base_hashes(digest);
        for i in 0..self.hashes as u64 {
            let pos = h1.wrapping_add(i.wrapping_mul(h2)) % self.bits;
            self.words[(pos / 64) as usize] |= 1 << (pos % 64);
        }
        self.inserted += 1;
    }

    /// `false` means the digest was definitely not inserted since the last
    /// reset; `true` means inserted or a false positive.
    pub fn query(&self, digest: Digest) -> bool {
        let (h1, h2) = self.base_hashes(digest);
        for i in 0..self.hashes as u64 {
            let pos = h1.wrapping_add(i.wrapping_mul(h2)) % self.bits;
            if self.words[(pos / 64) as usize] & (1 << (pos % 64)) == 0 {
                return false;
            }
        }
        true
    }

    /// Clears every bit and zeroes the insertion counter.
    pub fn reset(&mut self) {
        self.words.fill(0);
        self.inserted = 0;
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn is_full(&self) -> bool {
        self.inserted >= self.capacity
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn hashes(&self) -> u32 {
        self.hashes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Raw bit words, exposed for determinism checks.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    fn base_hashes(&self, digest: Digest) -> (u64, u64) {
        let h1 = mix64(digest.low64() ^ self.seed);
        let h2 = mix64(digest.high64() ^ mix64(self.seed)) | 1;
        (h1, h2)
    }
}

/// Two Bloom filters with one active for inserts. When the active filter
/// reaches capacity, the standby filter is reset and becomes active, so
/// the pair always retains at least the most recent `capacity` inserts.
#[derive(Debug, Clone)]
pub struct RotatingFilterPair {
    filters: [BloomFilter; 2],
    active: usize,
}

impl RotatingFilterPair {
    /// Builds two equally sized filters with seeds derived from `seed`.
    pub fn new(bits: u64, hashes: u32, capacity: u64, seed: u64) -> Result<Self, BloomError> {
        Ok(RotatingFilterPair {
            filters: [
                BloomFilter::new(bits, hashes, capacity, mix64(seed ^ 1))?,
                BloomFilter::new(bits, hashes, capacity, mix64(seed ^ 2))?,
            ],
            active: 0,
        })
    }

    pub fn with_target(
        capacity: u64,
        target_fp: f64,
        hashes: u32,
        seed: u64,
    ) -> Result<Self, BloomError> {
        let bits = size_for(capacity, target_fp, hashes)?;
        Self::new(bits, hashes, capacity, seed)
    }

    /// Inserts into the active filter; if that brings it to capacity, the
    /// standby filter is reset and made active.
    pub fn insert(&mut self, digest: Digest) {
        self.filters[self.active].insert(digest);
        if self.filters[self.active].is_full() {
            let standby = 1 - self.active;
            self.filters[standby].reset();
            self.active = standby;
        }
    }

    /// True iff either filter contains the digest.
    pub fn query(&self, digest: Digest) -> bool {
        self.filters[0].query(digest) || self.filters[1].query(digest)
    }

    pub fn reset_both(&mut self) {
        self.filters[0].reset();
        self.filters[1].reset();
        self.active = 0;
    }

    pub fn active_index(&self) -> usize {
        self.active
    }

    /// Direct access to the filter currently receiving inserts, e.g. for
    /// prefilling without triggering rotation.
    pub fn active_filter_mut(&mut self) -> &mut BloomFilter {
        &mut self.filters[self.active]
    }

    pub fn filters(&self) -> &[BloomFilter; 2] {
        &self.filters
    }

    /// Total storage of the pair in bits.
    pub fn storage_bits(&self) -> u64 {
        self.filters[0].bits() + self.filters[1].bits()
    }
}
