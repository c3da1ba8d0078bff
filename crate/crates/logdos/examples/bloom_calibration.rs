//! Sizes a Bloom filter for a target false-positive rate, fills it to
//! capacity, and compares the measured rate against both analytic forms.
//!
//! Run with: cargo run --example bloom_calibration

use logdos::bloom::{
    fp_probability, fp_probability_approx, size_for, BloomFilter, RotatingFilterPair,
};
use logdos::messages::Digest;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let capacity = 50_000u64;
    let hashes = 5u32;
    println!("target_fp  bits       predicted   measured   (over 500k probes)");
    for target in [0.001f64, 0.01, 0.05] {
        let bits = size_for(capacity, target, hashes).unwrap();
        let mut filter = BloomFilter::new(bits, hashes, capacity, 0xB10B).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..capacity {
            filter.insert(Digest::from_u128(rng.gen()));
        }
        let predicted = fp_probability(bits, hashes, capacity).unwrap();
        let probes = 500_000u32;
        let hits = (0..probes)
            .filter(|_| filter.query(Digest::from_u128(rng.gen())))
            .count();
        println!(
            "{target:<10} {bits:<10} {predicted:<11.5} {:<10.5}",
            hits as f64 / probes as f64
        );
    }

    println!("\nexact vs approximate false-positive forms at k=3:");
    for (bits, inserted) in [
        (10_000u64, 2_000u64),
        (100_000, 20_000),
        (1_000_000, 200_000),
    ] {
        let exact = fp_probability(bits, 3, inserted).unwrap();
        let approx = fp_probability_approx(bits, 3, inserted).unwrap();
        println!(
            "  m={bits:<9} j={inserted:<8} exact={exact:.6e}  approx={approx:.6e}  rel diff={:.2e}",
            (exact - approx).abs() / exact
        );
    }

    // the two-filter rotation keeps recent digests queryable while bounding
    // saturation: watch the third insert of a capacity-2 pair land in the
    // second filter, and the fifth evict the first two digests
    println!("\nrotation trace (capacity 2 per filter):");
    let mut pair = RotatingFilterPair::new(1 << 12, 3, 2, 7).unwrap();
    let digests: Vec<Digest> = (1..=5).map(Digest::from_u128).collect();
    for (i, d) in digests.iter().enumerate() {
        pair.insert(*d);
        let members: Vec<String> = digests
            .iter()
            .enumerate()
            .map(|(j, q)| format!("d{}={}", j + 1, if pair.query(*q) { "y" } else { "n" }))
            .collect();
        println!(
            "  after insert d{}: active filter {} | {}",
            i + 1,
            pair.active_index(),
            members.join(" ")
        );
    }
}
