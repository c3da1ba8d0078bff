//! TOML experiment configuration: one scenario plus optional sweep axes.

use serde::Deserialize;
use thiserror::Error;

use crate::engine::{AttackSidMode, BackgroundParams, DpidParams, ScenarioConfig, TopologySource};
use crate::strategies::{DynamicParams, StrategyKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for {key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Raw config file shape. Unknown keys anywhere are rejected.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    topology: RawTopology,
    #[serde(default)]
    dynamic: RawDynamic,
    #[serde(default)]
    dpid: RawDpid,
    #[serde(default)]
    background: RawBackground,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    storage: RawStorage,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default = "default_name")]
    name: String,
    strategy: StrategyKind,
    #[serde(default = "default_target_fp")]
    target_fp: f64,
    #[serde(default = "default_hash_count")]
    hash_count: u32,
    #[serde(default = "default_filter_capacity")]
    filter_capacity: u64,
    #[serde(default = "default_attack_ases")]
    attack_ases: usize,
    #[serde(default = "default_aggregate_mbps")]
    aggregate_attack_mbps: f64,
    #[serde(default = "default_packets_per_attacker")]
    packets_per_attacker: u64,
    #[serde(default = "default_horizon_ticks")]
    horizon_ticks: u64,
    #[serde(default = "default_tick_ms")]
    tick_ms: f64,
    #[serde(default = "default_per_hop_ticks")]
    per_hop_ticks: u64,
    #[serde(default = "default_runs")]
    runs: u32,
    #[serde(default = "default_master_seed")]
    master_seed: u64,
    #[serde(default = "default_sid_mode")]
    attack_sid_mode: String,
    #[serde(default)]
    select_transient_only: bool,
}

fn default_name() -> String {
    "run".to_string()
}
fn default_target_fp() -> f64 {
    0.01
}
fn default_hash_count() -> u32 {
    3
}
fn default_filter_capacity() -> u64 {
    100_000
}
fn default_attack_ases() -> usize {
    100
}
fn default_aggregate_mbps() -> f64 {
    3000.0
}
fn default_packets_per_attacker() -> u64 {
    10_000
}
fn default_horizon_ticks() -> u64 {
    300_000
}
fn default_tick_ms() -> f64 {
    1.0
}
fn default_per_hop_ticks() -> u64 {
    10
}
fn default_runs() -> u32 {
    3
}
fn default_master_seed() -> u64 {
    42
}
fn default_sid_mode() -> String {
    "random".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    source: String,
    path: Option<String>,
    metadata_path: Option<String>,
    #[serde(default = "default_nodes")]
    nodes: usize,
    #[serde(default = "default_attachment")]
    attachment: usize,
    seed: Option<u64>,
}

fn default_nodes() -> usize {
    1000
}
fn default_attachment() -> usize {
    2
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDynamic {
    initial_duration_ticks: Option<u64>,
    silent_ticks: Option<u64>,
    validation_shift_ticks: Option<u64>,
    invalid_threshold: Option<u64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDpid {
    update_period_s: Option<f64>,
    lambda_per_min: Option<f64>,
    compare_fp: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawBackground {
    prefill_fraction: Option<f64>,
    live_get_rate: Option<f64>,
}

/// Sweep axes. The expansion is the cross product; each point inherits
/// every non-swept field from the base scenario.
#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    strategy: Option<Vec<StrategyKind>>,
    target_fp: Option<Vec<f64>>,
    attack_ases: Option<Vec<usize>>,
    aggregate_attack_mbps: Option<Vec<f64>>,
    lambda_per_min: Option<Vec<f64>>,
    update_period_s: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawStorage {
    elements: Option<Vec<u64>>,
    target_fp: Option<Vec<f64>>,
    hash_count: Option<u32>,
}

/// Parameters of the storage-curve table.
#[derive(Debug, Clone)]
pub struct StorageSpec {
    pub elements: Vec<u64>,
    pub target_fp: Vec<f64>,
    pub hash_count: u32,
}

impl Default for StorageSpec {
    fn default() -> Self {
        StorageSpec {
            elements: vec![500_000, 1_000_000, 1_500_000, 2_000_000],
            target_fp: vec![
                1e-5, 2e-5, 5e-5, 1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1,
            ],
            hash_count: 3,
        }
    }
}

/// A fully validated experiment: one base scenario and the sweep axes
/// that expand into concrete points.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub base: ScenarioConfig,
    pub sweep_strategy: Vec<StrategyKind>,
    pub sweep_target_fp: Vec<f64>,
    pub sweep_attack_ases: Vec<usize>,
    pub sweep_aggregate_mbps: Vec<f64>,
    pub sweep_lambda_per_min: Vec<f64>,
    pub sweep_update_period_s: Vec<f64>,
    pub dpid_compare_fp: Vec<f64>,
    pub storage: StorageSpec,
}

impl ExperimentSpec {
    /// Number of scenario points the sweep expands to.
    pub fn point_count(&self) -> usize {
        self.sweep_strategy.len().max(1)
            * self.sweep_target_fp.len().max(1)
            * self.sweep_attack_ases.len().max(1)
            * self.sweep_aggregate_mbps.len().max(1)
            * self.sweep_lambda_per_min.len().max(1)
            * self.sweep_update_period_s.len().max(1)
    }

    /// Cross product of all sweep axes, in a fixed axis order. Points are
    /// labeled `name#index` when there is more than one.
    pub fn expand(&self) -> Vec<(String, ScenarioConfig)> {
        let strategies = or_base(&self.sweep_strategy, self.base.strategy);
        let fps = or_base(&self.sweep_target_fp, self.base.target_fp);
        let attackers = or_base(&self.sweep_attack_ases, self.base.num_attack_ases);
        let rates = or_base(&self.sweep_aggregate_mbps, self.base.aggregate_attack_mbps);
        let lambdas = or_base(&self.sweep_lambda_per_min, self.base.dpid.lambda_per_min);
        let periods = or_base(&self.sweep_update_period_s, self.base.dpid.update_period_s);

        let total = strategies.len()
            * fps.len()
            * attackers.len()
            * rates.len()
            * lambdas.len()
            * periods.len();
        let mut points = Vec::with_capacity(total);
        for &strategy in &strategies {
            for &target_fp in &fps {
                for &num_attack in &attackers {
                    for &aggregate in &rates {
                        for &lambda in &lambdas {
                            for &period in &periods {
                                let mut cfg = self.base.clone();
                                cfg.strategy = strategy;
                                cfg.target_fp = target_fp;
                                cfg.num_attack_ases = num_attack;
                                cfg.aggregate_attack_mbps = aggregate;
                                cfg.dpid.lambda_per_min = lambda;
                                cfg.dpid.update_period_s = period;
                                let label = if total == 1 {
                                    self.name.clone()
                                } else {
                                    format!("{}#{:03}", self.name, points.len())
                                };
                                points.push((label, cfg));
                            }
                        }
                    }
                }
            }
        }
        points
    }
}

fn or_base<T: Clone>(axis: &[T], base: T) -> Vec<T> {
    if axis.is_empty() {
        vec![base]
    } else {
        axis.to_vec()
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &std::path::Path) -> Result<ExperimentSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

/// Parses config text. Split out so tests can feed strings directly.
pub fn parse_config_str(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;

    let topology = match raw.topology.source.as_str() {
        "file" => {
            let path = raw.topology.path.clone().ok_or_else(|| {
                invalid("topology.path", "required when topology.source = \"file\"")
            })?;
            TopologySource::File {
                path: path.into(),
                classes: raw.topology.metadata_path.clone().map(Into::into),
            }
        }
        "synthetic" => {
            if raw.topology.nodes < 2 {
                return Err(invalid("topology.nodes", "need at least 2 nodes"));
            }
            if raw.topology.attachment < 1 {
                return Err(invalid(
                    "topology.attachment",
                    "need at least 1 edge per node",
                ));
            }
            TopologySource::Synthetic {
                nodes: raw.topology.nodes,
                attachment: raw.topology.attachment,
                seed: raw.topology.seed.unwrap_or(raw.scenario.master_seed),
            }
        }
        other => {
            return Err(invalid(
                "topology.source",
                format!("expected \"file\" or \"synthetic\", got \"{other}\""),
            ))
        }
    };

    let attack_sid_mode = match raw.scenario.attack_sid_mode.as_str() {
        "random" => AttackSidMode::Random,
        "fixed" => AttackSidMode::Fixed,
        other => {
            return Err(invalid(
                "scenario.attack_sid_mode",
                format!("expected \"random\" or \"fixed\", got \"{other}\""),
            ))
        }
    };

    let dynamic_defaults = DynamicParams::default();
    let dynamic = DynamicParams {
        initial_duration: raw
            .dynamic
            .initial_duration_ticks
            .unwrap_or(dynamic_defaults.initial_duration),
        silent_period: raw
            .dynamic
            .silent_ticks
            .unwrap_or(dynamic_defaults.silent_period),
        validation_shift: raw
            .dynamic
            .validation_shift_ticks
            .unwrap_or(dynamic_defaults.validation_shift),
        invalid_threshold: raw
            .dynamic
            .invalid_threshold
            .unwrap_or(dynamic_defaults.invalid_threshold),
    };

    let base = ScenarioConfig {
        topology,
        strategy: raw.scenario.strategy,
        target_fp: raw.scenario.target_fp,
        hash_count: raw.scenario.hash_count,
        filter_capacity: raw.scenario.filter_capacity,
        num_attack_ases: raw.scenario.attack_ases,
        aggregate_attack_mbps: raw.scenario.aggregate_attack_mbps,
        packets_per_attacker: raw.scenario.packets_per_attacker,
        horizon_ticks: raw.scenario.horizon_ticks,
        tick_ms: raw.scenario.tick_ms,
        per_hop_ticks: raw.scenario.per_hop_ticks,
        runs: raw.scenario.runs,
        master_seed: raw.scenario.master_seed,
        attack_sid_mode,
        select_transient_only: raw.scenario.select_transient_only,
        dynamic,
        dpid: DpidParams {
            update_period_s: raw.dpid.update_period_s.unwrap_or(60.0),
            lambda_per_min: raw.dpid.lambda_per_min.unwrap_or(8.0),
        },
        background: BackgroundParams {
            prefill_fraction: raw.background.prefill_fraction.unwrap_or(1.0),
            live_get_rate: raw.background.live_get_rate.unwrap_or(0.0),
        },
    };

    validate_base(&base, &raw)?;

    let storage_defaults = StorageSpec::default();
    let storage = StorageSpec {
        elements: raw.storage.elements.unwrap_or(storage_defaults.elements),
        target_fp: raw.storage.target_fp.unwrap_or(storage_defaults.target_fp),
        hash_count: raw
            .storage
            .hash_count
            .unwrap_or(storage_defaults.hash_count),
    };
    for &p in &storage.target_fp {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(
                "storage.target_fp",
                format!("{p} is not in (0, 1)"),
            ));
        }
    }

    let spec = ExperimentSpec {
        name: raw.scenario.name,
        base,
        sweep_strategy: raw.sweep.strategy.unwrap_or_default(),
        sweep_target_fp: raw.sweep.target_fp.unwrap_or_default(),
        sweep_attack_ases: raw.sweep.attack_ases.unwrap_or_default(),
        sweep_aggregate_mbps: raw.sweep.aggregate_attack_mbps.unwrap_or_default(),
        sweep_lambda_per_min: raw.sweep.lambda_per_min.unwrap_or_default(),
        sweep_update_period_s: raw.sweep.update_period_s.unwrap_or_default(),
        dpid_compare_fp: raw.dpid.compare_fp.unwrap_or_else(|| vec![0.05, 0.1, 0.2]),
        storage,
    };

    for &p in &spec.sweep_target_fp {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("sweep.target_fp", format!("{p} is not in (0, 1)")));
        }
    }
    for &p in &spec.dpid_compare_fp {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("dpid.compare_fp", format!("{p} is not in (0, 1)")));
        }
    }
    Ok(spec)
}

fn validate_base(base: &ScenarioConfig, _raw: &RawConfig) -> Result<(), ConfigError> {
    if !(base.target_fp > 0.0 && base.target_fp < 1.0) {
        return Err(invalid(
            "scenario.target_fp",
            format!("{} is not in (0, 1)", base.target_fp),
        ));
    }
    if base.hash_count == 0 {
        return Err(invalid("scenario.hash_count", "must be at least 1"));
    }
    if base.filter_capacity == 0 {
        return Err(invalid("scenario.filter_capacity", "must be at least 1"));
    }
    if base.num_attack_ases == 0 {
        return Err(invalid("scenario.attack_ases", "must be at least 1"));
    }
    if base.runs == 0 {
        return Err(invalid("scenario.runs", "must be at least 1"));
    }
    if base.horizon_ticks == 0 {
        return Err(invalid("scenario.horizon_ticks", "must be at least 1"));
    }
    if base.tick_ms <= 0.0 {
        return Err(invalid("scenario.tick_ms", "must be positive"));
    }
    if base.dynamic.initial_duration == 0 {
        return Err(invalid(
            "dynamic.initial_duration_ticks",
            "must be at least 1",
        ));
    }
    if let Some(bg) = Some(&base.background) {
        if !(0.0..=1.0).contains(&bg.prefill_fraction) {
            return Err(invalid(
                "background.prefill_fraction",
                format!("{} is not in [0, 1]", bg.prefill_fraction),
            ));
        }
        if bg.live_get_rate < 0.0 {
            return Err(invalid("background.live_get_rate", "must be nonnegative"));
        }
    }
    if base.dpid.update_period_s <= 0.0 {
        return Err(invalid("dpid.update_period_s", "must be positive"));
    }
    if base.dpid.lambda_per_min < 0.0 {
        return Err(invalid("dpid.lambda_per_min", "must be nonnegative"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
strategy = "comprehensive"

[topology]
source = "synthetic"
"#;

    #[test]
    fn minimal_config_gets_all_defaults() {
        let spec = parse_config_str(MINIMAL).unwrap();
        assert_eq!(spec.name, "run");
        assert_eq!(spec.base.strategy, StrategyKind::Comprehensive);
        assert_eq!(spec.base.target_fp, 0.01);
        assert_eq!(spec.base.hash_count, 3);
        assert_eq!(spec.base.filter_capacity, 100_000);
        assert_eq!(spec.base.num_attack_ases, 100);
        assert_eq!(spec.base.runs, 3);
        assert_eq!(spec.base.master_seed, 42);
        assert_eq!(spec.base.per_hop_ticks, 10);
        assert_eq!(spec.point_count(), 1);
        match &spec.base.topology {
            TopologySource::Synthetic {
                nodes,
                attachment,
                seed,
            } => {
                assert_eq!((*nodes, *attachment, *seed), (1000, 2, 42));
            }
            other => panic!("unexpected source {other:?}"),
        }
    }

    #[test]
    fn sweep_expands_to_cross_product() {
        let text = format!(
            "{MINIMAL}\n[sweep]\ntarget_fp = [1e-4, 1e-3, 1e-2, 5e-2]\nattack_ases = [100, 200, 500, 1000, 2000]\n"
        );
        let spec = parse_config_str(&text).unwrap();
        assert_eq!(spec.point_count(), 20);
        let points = spec.expand();
        assert_eq!(points.len(), 20);
        assert_eq!(points[0].0, "run#000");
        // axis order: target_fp outer, attack_ases inner
        assert_eq!(points[0].1.target_fp, 1e-4);
        assert_eq!(points[0].1.num_attack_ases, 100);
        assert_eq!(points[1].1.num_attack_ases, 200);
        assert_eq!(points[5].1.target_fp, 1e-3);
    }

    #[test]
    fn invalid_probability_names_the_key() {
        let text = MINIMAL.replace(
            "strategy = \"comprehensive\"",
            "strategy = \"comprehensive\"\ntarget_fp = 1.5",
        );
        let err = parse_config_str(&text).unwrap_err();
        match err {
            ConfigError::Invalid { key, .. } => assert_eq!(key, "scenario.target_fp"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nbogus_section = 3\n");
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::Parse(_))
        ));
        let text = MINIMAL.replace(
            "source = \"synthetic\"",
            "source = \"synthetic\"\nwhatever = 1",
        );
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn file_source_requires_a_path() {
        let text = MINIMAL.replace("source = \"synthetic\"", "source = \"file\"");
        let err = parse_config_str(&text).unwrap_err();
        match err {
            ConfigError::Invalid { key, .. } => assert_eq!(key, "topology.path"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn storage_defaults_cover_half_to_two_million() {
        let spec = parse_config_str(MINIMAL).unwrap();
        assert_eq!(
            spec.storage.elements,
            vec![500_000, 1_000_000, 1_500_000, 2_000_000]
        );
        assert_eq!(spec.storage.hash_count, 3);
    }
}
