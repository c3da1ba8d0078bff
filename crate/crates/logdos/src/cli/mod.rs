//! Operator-facing surface: config files, subcommands, and CSV emission.
//!
//! Every command writes one CSV document to its output. Given the same
//! config file and master seed, re-running a command produces
//! byte-identical output regardless of thread count.

pub mod config;

use std::io::Write;

use thiserror::Error;

use crate::analysis::{dpid_closed_form, storage_curve, AnalysisError};
use crate::engine::{EngineError, Scenario, ScenarioConfig, ScenarioOutcome};
use crate::strategies::StrategyKind;
use crate::topology::TopologyError;
use config::{ConfigError, ExperimentSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for configuration problems, 2 for I/O problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(ConfigError::Read { .. }) => 2,
            CliError::Config(_) => 1,
            CliError::Engine(EngineError::Topology(TopologyError::Io(_))) => 2,
            CliError::Engine(_) => 1,
            CliError::Analysis(_) => 1,
            CliError::Io(_) => 2,
            CliError::Csv(_) => 2,
            CliError::Usage(_) => 1,
        }
    }
}

/// The pinned scenario CSV header: one row per (scenario point, run) plus
/// an aggregate row per point flagged `run=mean`.
pub const SCENARIO_CSV_HEADER: [&str; 15] = [
    "scenario",
    "strategy",
    "p",
    "k",
    "attack_ases",
    "aggregate_mbps",
    "run",
    "seed",
    "sent",
    "reached",
    "filtered_fraction",
    "victim_mbps",
    "legit_sent",
    "legit_dropped",
    "storage_bits_per_as",
];

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn write_scenario_rows<W: Write>(
    writer: &mut csv::Writer<W>,
    label: &str,
    cfg: &ScenarioConfig,
    outcome: &ScenarioOutcome,
) -> Result<(), CliError> {
    let fixed = [
        label.to_string(),
        cfg.strategy.to_string(),
        cfg.target_fp.to_string(),
        cfg.hash_count.to_string(),
        cfg.num_attack_ases.to_string(),
        cfg.aggregate_attack_mbps.to_string(),
    ];
    for run in &outcome.runs {
        let mut row = fixed.to_vec();
        row.extend([
            run.run_index.to_string(),
            run.seed.to_string(),
            run.sent.to_string(),
            run.reached.to_string(),
            run.filtered_fraction.to_string(),
            run.victim_mbps.to_string(),
            run.legit_sent.to_string(),
            run.legit_dropped.to_string(),
            run.storage_bits_per_as.to_string(),
        ]);
        writer.write_record(&row)?;
    }
    let agg = &outcome.aggregate;
    let mut row = fixed.to_vec();
    row.extend([
        "mean".to_string(),
        cfg.master_seed.to_string(),
        agg.sent.to_string(),
        agg.reached.to_string(),
        (1.0 - agg.mean_reach_fraction).to_string(),
        agg.victim_mbps.to_string(),
        agg.legit_sent.to_string(),
        agg.legit_dropped.to_string(),
        agg.storage_bits_per_as.to_string(),
    ]);
    writer.write_record(&row)?;
    Ok(())
}

/// Executes the spec's single scenario and emits the scenario CSV.
pub fn cmd_run<W: Write>(spec: &ExperimentSpec, out: W) -> Result<(), CliError> {
    if spec.point_count() > 1 {
        return Err(CliError::Usage(
            "config defines a sweep; use the sweep subcommand".to_string(),
        ));
    }
    let mut writer = csv_writer(out);
    writer.write_record(SCENARIO_CSV_HEADER)?;
    let (label, cfg) = spec.expand().remove(0);
    let outcome = Scenario::new(cfg.clone())?.run()?;
    write_scenario_rows(&mut writer, &label, &cfg, &outcome)?;
    writer.flush()?;
    Ok(())
}

/// Executes every point of the sweep cross product, in axis order.
pub fn cmd_sweep<W: Write>(spec: &ExperimentSpec, out: W) -> Result<(), CliError> {
    let mut writer = csv_writer(out);
    writer.write_record(SCENARIO_CSV_HEADER)?;
    for (label, cfg) in spec.expand() {
        let outcome = Scenario::new(cfg.clone())?.run()?;
        write_scenario_rows(&mut writer, &label, &cfg, &outcome)?;
    }
    writer.flush()?;
    Ok(())
}

/// Emits the filter-size table. Sizes are reported in bits with megabit
/// and megabyte conversions side by side, since quoted sizes in this
/// space routinely confuse the two units.
pub fn cmd_storage<W: Write>(spec: &config::StorageSpec, out: W) -> Result<(), CliError> {
    let mut writer = csv_writer(out);
    writer.write_record(["n", "p", "k", "m_bits", "m_megabits", "m_megabytes"])?;
    for point in storage_curve(&spec.elements, &spec.target_fp, spec.hash_count)? {
        writer.write_record(&[
            point.elements.to_string(),
            point.target_fp.to_string(),
            point.hashes.to_string(),
            point.bits.to_string(),
            format!("{:.4}", point.megabits()),
            format!("{:.4}", point.megabytes()),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Emits D-PID victim-rate curves over the (lambda, update period) grid,
/// with the closed-form prediction and simulated Even-logging victim
/// rates at the comparison false-positive targets.
pub fn cmd_dpid<W: Write>(spec: &ExperimentSpec, out: W) -> Result<(), CliError> {
    let lambdas = if spec.sweep_lambda_per_min.is_empty() {
        vec![spec.base.dpid.lambda_per_min]
    } else {
        spec.sweep_lambda_per_min.clone()
    };
    let periods = if spec.sweep_update_period_s.is_empty() {
        vec![spec.base.dpid.update_period_s]
    } else {
        spec.sweep_update_period_s.clone()
    };

    // Even logging does not depend on lambda or the update period, so its
    // victim rate is simulated once per comparison target
    let mut even_rates = Vec::with_capacity(spec.dpid_compare_fp.len());
    for &p in &spec.dpid_compare_fp {
        let mut cfg = spec.base.clone();
        cfg.strategy = StrategyKind::Even;
        cfg.target_fp = p;
        let outcome = Scenario::new(cfg)?.run()?;
        even_rates.push(outcome.aggregate.victim_mbps);
    }

    let mut header = vec![
        "lambda_per_min".to_string(),
        "t_update_s".to_string(),
        "aggregate_mbps".to_string(),
        "dpid_victim_mbps".to_string(),
        "dpid_closed_form_mbps".to_string(),
    ];
    for &p in &spec.dpid_compare_fp {
        header.push(format!("even_p{p}_victim_mbps"));
    }
    let mut writer = csv_writer(out);
    writer.write_record(&header)?;

    for &period in &periods {
        for &lambda in &lambdas {
            let mut cfg = spec.base.clone();
            cfg.strategy = StrategyKind::DPid;
            cfg.dpid.lambda_per_min = lambda;
            cfg.dpid.update_period_s = period;
            let outcome = Scenario::new(cfg.clone())?.run()?;
            let mut row = vec![
                lambda.to_string(),
                period.to_string(),
                cfg.aggregate_attack_mbps.to_string(),
                outcome.aggregate.victim_mbps.to_string(),
                dpid_closed_form(lambda, period, cfg.aggregate_attack_mbps).to_string(),
            ];
            for &rate in &even_rates {
                row.push(rate.to_string());
            }
            writer.write_record(&row)?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Emits node/edge counts, class counts, and path-length statistics of
/// the configured topology.
pub fn cmd_topostats<W: Write>(spec: &ExperimentSpec, out: W) -> Result<(), CliError> {
    let scenario = Scenario::new(spec.base.clone())?;
    let stats = scenario.topology().stats(100_000, spec.base.master_seed);
    let (transient, core) = scenario.topology().class_counts();
    let mut writer = csv_writer(out);
    writer.write_record([
        "nodes",
        "edges",
        "transient_ases",
        "core_ases",
        "mean_path_hops",
        "stddev_path_hops",
        "stderr_mean_path_hops",
        "sampled_pairs",
    ])?;
    writer.write_record(&[
        stats.nodes.to_string(),
        stats.edges.to_string(),
        transient.to_string(),
        core.to_string(),
        format!("{:.4}", stats.mean_path_len),
        format!("{:.4}", stats.stddev_path_len),
        format!("{:.6}", stats.stderr_mean_path_len),
        stats.sampled_pairs.to_string(),
    ])?;
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use config::parse_config_str;

    const BASE: &str = r#"
[scenario]
strategy = "comprehensive"
target_fp = 0.05
filter_capacity = 2000
attack_ases = 5
packets_per_attacker = 200
runs = 2
master_seed = 9

[topology]
source = "synthetic"
nodes = 120
attachment = 2
seed = 3
"#;

    #[test]
    fn run_csv_is_deterministic_and_has_the_pinned_header() {
        let spec = parse_config_str(BASE).unwrap();
        let mut first = Vec::new();
        cmd_run(&spec, &mut first).unwrap();
        let mut second = Vec::new();
        cmd_run(&spec, &mut second).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SCENARIO_CSV_HEADER.join(","));
        // 2 per-run rows + 1 mean row
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().last().unwrap().contains(",mean,"));
    }

    #[test]
    fn run_refuses_sweep_configs() {
        let text = format!("{BASE}\n[sweep]\ntarget_fp = [0.01, 0.05]\n");
        let spec = parse_config_str(&text).unwrap();
        let err = cmd_run(&spec, Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn sweep_emits_rows_for_every_point() {
        let text = format!("{BASE}\n[sweep]\ntarget_fp = [0.01, 0.05]\nattack_ases = [2, 5]\n");
        let spec = parse_config_str(&text).unwrap();
        let mut out = Vec::new();
        cmd_sweep(&spec, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        // header + 4 points x (2 runs + mean)
        assert_eq!(text.lines().count(), 1 + 4 * 3);
        assert!(text.contains("run#000"));
        assert!(text.contains("run#003"));
    }

    #[test]
    fn storage_table_covers_the_default_grid() {
        let spec = parse_config_str(BASE).unwrap();
        let mut out = Vec::new();
        cmd_storage(&spec.storage, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * 13);
        assert!(text.starts_with("n,p,k,m_bits,m_megabits,m_megabytes\n"));
        for n in ["500000", "1000000", "1500000", "2000000"] {
            assert!(
                text.lines().any(|l| l.starts_with(&format!("{n},"))),
                "{n} missing"
            );
        }
    }

    #[test]
    fn topostats_reports_counts_and_lengths() {
        let spec = parse_config_str(BASE).unwrap();
        let mut out = Vec::new();
        cmd_topostats(&spec, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("nodes,edges"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("120,"));
    }
}
