//! Seeded, portable hash primitives shared by the digest and Bloom filter
//! code. Everything here is plain wrapping arithmetic so that identical
//! seeds produce identical bits on every platform.

/// SplitMix64 finalizer. Bijective on `u64` with full avalanche.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives an independent sub-seed from a base seed and a purpose tag.
///
/// Used to split one run seed into per-router, per-stream seeds so that
/// lazily constructed state does not depend on construction order.
#[inline]
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    mix64(base ^ mix64(tag ^ 0x6A09_E667_F3BC_C908))
}

/// Seeded 128-bit hash of a byte string: two independently keyed 64-bit
/// lanes, each absorbing the input in 8-byte big-endian words through a
/// SplitMix64 compression step, cross-mixed at finalization.
pub fn hash128(data: &[u8], seed: u64) -> (u64, u64) {
    let mut a = mix64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut b = mix64(seed.rotate_left(32) ^ 0xC2B2_AE3D_27D4_EB4F);
    for chunk in data.chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        let word = u64::from_be_bytes(word);
        a = mix64(a ^ word);
        b = mix64(b ^ word.wrapping_mul(0xA24B_AED4_963E_E407));
    }
    let len = data.len() as u64;
    a = mix64(a ^ len);
    b = mix64(b ^ len.rotate_left(17) ^ a);
    (a, b)
}
