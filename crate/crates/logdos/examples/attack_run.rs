//! One data-flooding scenario end to end: draw a victim and attackers,
//! prefill every router's filters, flood, and compare the measured reach
//! fraction against the closed-form expectation over the drawn paths.
//!
//! Run with: cargo run --example attack_run

use logdos::analysis::expected_reach_fraction;
use logdos::bloom::fp_probability;
use logdos::engine::{Scenario, ScenarioConfig, TopologySource};
use logdos::strategies::StrategyKind;

fn main() {
    let mut cfg = ScenarioConfig::new(
        TopologySource::Synthetic {
            nodes: 1000,
            attachment: 2,
            seed: 7,
        },
        StrategyKind::Comprehensive,
    );
    cfg.target_fp = 0.1;
    cfg.filter_capacity = 20_000;
    cfg.num_attack_ases = 100;
    cfg.packets_per_attacker = 5_000;
    cfg.runs = 1;
    cfg.master_seed = 1;

    let scenario = Scenario::new(cfg).unwrap();
    let stats = scenario.topology().stats(0, 0);
    println!(
        "topology: {} ASes, {} edges, mean path {:.2} hops",
        stats.nodes, stats.edges, stats.mean_path_len
    );

    let mut ctx = scenario.setup_run(0).unwrap();
    println!(
        "victim AS {}, {} attacker ASes, path lengths {:?} (first five)",
        ctx.victim(),
        ctx.attacker_paths().len(),
        ctx.attacker_paths()
            .iter()
            .take(5)
            .map(|a| a.path.len())
            .collect::<Vec<_>>()
    );

    // per-check probability of a prefilled filter, exact form
    let p_check = fp_probability(
        scenario.filter_bits(),
        scenario.config().hash_count,
        scenario.config().filter_capacity,
    )
    .unwrap();
    let expected = expected_reach_fraction(
        scenario.topology(),
        &ctx.attacker_ases(),
        ctx.victim(),
        scenario.config().strategy,
        p_check,
    )
    .unwrap();

    let metrics = ctx.execute();
    println!(
        "\nsent {} packets: {} reached, {} rejected ({} storage bits per AS)",
        metrics.sent, metrics.reached, metrics.rejected, metrics.storage_bits_per_as
    );
    let mc_sigma = 100.0 / (expected * metrics.sent as f64).sqrt();
    println!(
        "reach fraction {:.4e} vs analytic {:.4e} ({:+.1}% relative, 1 sigma of sampling noise = {:.1}%)",
        metrics.reach_fraction,
        expected,
        (metrics.reach_fraction - expected) / expected * 100.0,
        mc_sigma
    );
    println!(
        "victim sees {:.4} Mbps of the {:.0} Mbps aggregate (filtered {:.4}%)",
        metrics.victim_mbps,
        scenario.config().aggregate_attack_mbps,
        metrics.filtered_fraction * 100.0
    );
}
