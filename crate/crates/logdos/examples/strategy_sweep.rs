//! Sweeps logging strategies against false-positive targets and emits the
//! scenario CSV (the same table `logdos sweep` produces).
//!
//! Run with: cargo run --example strategy_sweep

use logdos::cli::{cmd_sweep, config::parse_config_str};

fn main() {
    let config = r#"
[scenario]
name = "strategies"
strategy = "comprehensive"
filter_capacity = 10000
attack_ases = 25
packets_per_attacker = 2000
aggregate_attack_mbps = 3000.0
runs = 2
master_seed = 5

[topology]
source = "synthetic"
nodes = 500
attachment = 2
seed = 7

[sweep]
strategy = ["comprehensive", "even", "odd", "nodefense"]
target_fp = [0.01, 0.05]
"#;
    let spec = parse_config_str(config).unwrap();
    eprintln!(
        "running {} scenario points ({} runs each)...",
        spec.point_count(),
        spec.base.runs
    );
    cmd_sweep(&spec, std::io::stdout().lock()).unwrap();
}
