//! Filter size required per router as a function of the logged GET count
//! and the false-positive target. Bits, megabits, and megabytes are shown
//! side by side; the two M-units differ by 8x and are easy to conflate.
//!
//! Run with: cargo run --example storage_curve

use logdos::analysis::storage_curve;

fn main() {
    let element_counts = [500_000u64, 1_000_000, 1_500_000, 2_000_000];
    let fp_targets = [1e-4f64, 1e-3, 1e-2, 5e-2];
    let hashes = 3;

    println!("filter size by logged GETs (rows) and false-positive target (columns), k = {hashes}");
    print!("{:>10}", "n \\ p");
    for p in fp_targets {
        print!("{p:>14}");
    }
    println!();
    let table = storage_curve(&element_counts, &fp_targets, hashes).unwrap();
    for chunk in table.chunks(fp_targets.len()) {
        print!("{:>10}", chunk[0].elements);
        for point in chunk {
            print!("{:>11.2} Mb", point.megabits());
        }
        println!();
    }

    let headline = table
        .iter()
        .find(|p| p.elements == 2_000_000 && p.target_fp == 1e-4)
        .unwrap();
    println!(
        "\na router logging 2M GETs at p = 1e-4 needs {} bits = {:.2} megabits = {:.2} megabytes",
        headline.bits,
        headline.megabits(),
        headline.megabytes()
    );
    println!("(sizes quoted in 'MB' for this point elsewhere are megabits misread as megabytes)");
}
