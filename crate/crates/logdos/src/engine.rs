//! Tick-based event-driven simulation core: scenario setup, filter
//! prefill, background GET/DATA round trips, attack injection, and
//! per-run metrics.
//!
//! A run owns all mutable state (router filters, window state machines,
//! RNG streams) and processes packet hops strictly in tick order, since
//! dynamic-logging decisions depend on it. Independent runs of the same
//! scenario execute in parallel.

use std::collections::{BinaryHeap, HashMap};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bloom::{size_for, BloomError, RotatingFilterPair};
use crate::hashing::derive_seed;
use crate::messages::{DataMessage, Digest, GetMessage, NodeId, ServiceId};
use crate::strategies::{
    DataContext, DynamicParams, DynamicState, RouterState, StrategyKind, Verdict,
};
use crate::topology::{assign_pids, generate_synthetic, load_as_classes, load_edge_list};
use crate::topology::{AsId, PathId, PidMap, Topology, TopologyError};
use crate::Tick;

const TAG_SETUP: u64 = 1;
const TAG_PIDS: u64 = 2;
const TAG_ROUTER: u64 = 3;
const TAG_ATTACK: u64 = 4;
const TAG_BACKGROUND: u64 = 5;
const TAG_DPID: u64 = 6;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Bloom(#[from] BloomError),
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("could not draw {needed} reachable attacker ASes from a pool of {pool}")]
    AttackerDraw { needed: usize, pool: usize },
    #[error("could not draw a reachable consumer/provider pair for background traffic")]
    BackgroundDraw,
}

/// Where the AS graph comes from.
#[derive(Debug, Clone)]
pub enum TopologySource {
    /// Edge-list file ("asid asid" lines), with an optional
    /// "asid class" metadata file.
    File {
        path: PathBuf,
        classes: Option<PathBuf>,
    },
    /// Preferential-attachment graph generated at setup.
    Synthetic {
        nodes: usize,
        attachment: usize,
        seed: u64,
    },
}

/// How attack packets choose their SID. Either way the attacker's
/// (SID, prefix) digests were never logged; a fixed SID just makes all
/// packets from one attacker share their per-AS false-positive outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackSidMode {
    Random,
    Fixed,
}

/// Background traffic knobs.
#[derive(Debug, Clone, Copy)]
pub struct BackgroundParams {
    /// Fraction of each router's filter capacity inserted as random
    /// digests before the run, imitating prior legitimate traffic.
    pub prefill_fraction: f64,
    /// Live legitimate GET/DATA round trips per tick.
    pub live_get_rate: f64,
}

/// D-PID baseline knobs.
#[derive(Debug, Clone, Copy)]
pub struct DpidParams {
    /// Seconds between global PID re-negotiations.
    pub update_period_s: f64,
    /// Full-path learning events per attacker AS per minute.
    pub lambda_per_min: f64,
}

/// Complete description of one experiment point.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub topology: TopologySource,
    pub strategy: StrategyKind,
    /// Target per-check false-positive probability of each router filter.
    pub target_fp: f64,
    pub hash_count: u32,
    /// Design insert count of each filter; also the rotation trigger.
    pub filter_capacity: u64,
    pub num_attack_ases: usize,
    pub aggregate_attack_mbps: f64,
    pub packets_per_attacker: u64,
    pub horizon_ticks: u64,
    pub tick_ms: f64,
    pub per_hop_ticks: u64,
    pub runs: u32,
    pub master_seed: u64,
    pub attack_sid_mode: AttackSidMode,
    /// Restrict victim/attacker draws to transient ASes when class
    /// metadata is present.
    pub select_transient_only: bool,
    pub dynamic: DynamicParams,
    pub dpid: DpidParams,
    pub background: BackgroundParams,
}

impl ScenarioConfig {
    /// A config with the documented defaults for everything except the
    /// topology source and the strategy.
    pub fn new(topology: TopologySource, strategy: StrategyKind) -> Self {
        ScenarioConfig {
            topology,
            strategy,
            target_fp: 0.01,
            hash_count: 3,
            filter_capacity: 100_000,
            num_attack_ases: 100,
            aggregate_attack_mbps: 3000.0,
            packets_per_attacker: 10_000,
            horizon_ticks: 300_000,
            tick_ms: 1.0,
            per_hop_ticks: 10,
            runs: 3,
            master_seed: 42,
            attack_sid_mode: AttackSidMode::Random,
            select_transient_only: false,
            dynamic: DynamicParams::default(),
            dpid: DpidParams {
                update_period_s: 60.0,
                lambda_per_min: 8.0,
            },
            background: BackgroundParams {
                prefill_fraction: 1.0,
                live_get_rate: 0.0,
            },
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |msg: String| Err(EngineError::InvalidConfig(msg));
        if !(self.target_fp > 0.0 && self.target_fp < 1.0) {
            return fail(format!("target_fp {} must be in (0, 1)", self.target_fp));
        }
        if self.hash_count == 0 {
            return fail("hash_count must be at least 1".into());
        }
        if self.filter_capacity == 0 {
            return fail("filter_capacity must be at least 1".into());
        }
        if self.num_attack_ases == 0 {
            return fail("num_attack_ases must be at least 1".into());
        }
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if self.horizon_ticks == 0 {
            return fail("horizon_ticks must be at least 1".into());
        }
        if self.tick_ms <= 0.0 {
            return fail(format!("tick_ms {} must be positive", self.tick_ms));
        }
        if !(0.0..=1.0).contains(&self.background.prefill_fraction) {
            return fail(format!(
                "prefill_fraction {} must be in [0, 1]",
                self.background.prefill_fraction
            ));
        }
        if self.background.live_get_rate < 0.0 {
            return fail("live_get_rate must be nonnegative".into());
        }
        if self.dynamic.initial_duration == 0 {
            return fail("dynamic initial_duration must be at least 1 tick".into());
        }
        if self.dpid.update_period_s <= 0.0 {
            return fail("dpid update_period_s must be positive".into());
        }
        if self.dpid.lambda_per_min < 0.0 {
            return fail("dpid lambda_per_min must be nonnegative".into());
        }
        Ok(())
    }

    fn run_seed(&self, run_index: u32) -> u64 {
        self.master_seed ^ run_index as u64
    }
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub run_index: u32,
    pub seed: u64,
    pub sent: u64,
    pub reached: u64,
    pub rejected: u64,
    pub malformed: u64,
    pub reach_fraction: f64,
    pub filtered_fraction: f64,
    pub victim_mbps: f64,
    pub legit_sent: u64,
    pub legit_dropped: u64,
    pub storage_bits_per_as: u64,
}

/// Aggregation over all runs of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMetrics {
    pub runs: u32,
    pub sent: u64,
    pub reached: u64,
    pub rejected: u64,
    pub malformed: u64,
    pub legit_sent: u64,
    pub legit_dropped: u64,
    pub mean_reach_fraction: f64,
    pub stddev_reach_fraction: f64,
    pub victim_mbps: f64,
    pub mean_legit_dropped_fraction: f64,
    pub storage_bits_per_as: u64,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub runs: Vec<RunMetrics>,
    pub aggregate: AggregateMetrics,
}

/// A validated scenario with its topology resolved. Immutable once built;
/// shared read-only by parallel run workers.
#[derive(Debug)]
pub struct Scenario {
    cfg: ScenarioConfig,
    topology: Topology,
    filter_bits: u64,
}

impl Scenario {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, EngineError> {
        let topology = match &cfg.topology {
            TopologySource::File { path, classes } => {
                let file = std::fs::File::open(path).map_err(TopologyError::Io)?;
                let mut t = load_edge_list(std::io::BufReader::new(file))?;
                if let Some(classes_path) = classes {
                    let file = std::fs::File::open(classes_path).map_err(TopologyError::Io)?;
                    t.set_classes(load_as_classes(std::io::BufReader::new(file))?);
                }
                t
            }
            TopologySource::Synthetic {
                nodes,
                attachment,
                seed,
            } => generate_synthetic(*nodes, *attachment, *seed),
        };
        Self::with_topology(cfg, topology)
    }

    /// Builds a scenario around an already-constructed graph, ignoring the
    /// config's topology source.
    pub fn with_topology(cfg: ScenarioConfig, topology: Topology) -> Result<Self, EngineError> {
        cfg.validate()?;
        let filter_bits = size_for(cfg.filter_capacity, cfg.target_fp, cfg.hash_count)?;
        Ok(Scenario {
            cfg,
            topology,
            filter_bits,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Bits per filter; each router carries two.
    pub fn filter_bits(&self) -> u64 {
        self.filter_bits
    }

    fn storage_bits_per_as(&self) -> u64 {
        match self.cfg.strategy {
            StrategyKind::Comprehensive
            | StrategyKind::Odd
            | StrategyKind::Even
            | StrategyKind::Dynamic => 2 * self.filter_bits,
            StrategyKind::NoDefense | StrategyKind::DPid => 0,
        }
    }

    /// Draws the victim, the attacker set, and their paths for one run.
    /// Deterministic in (config, run_index).
    pub fn setup_run(&self, run_index: u32) -> Result<RunContext<'_>, EngineError> {
        let run_seed = self.cfg.run_seed(run_index);
        let pid_map = assign_pids(&self.topology, derive_seed(run_seed, TAG_PIDS));

        let eligible: Vec<AsId> = if self.cfg.select_transient_only && self.topology.has_classes() {
            self.topology
                .nodes()
                .filter(|&a| self.topology.class_of(a) == Some(crate::topology::AsClass::Transient))
                .collect()
        } else {
            self.topology.nodes().collect()
        };
        if eligible.len() < self.cfg.num_attack_ases + 1 {
            return Err(EngineError::AttackerDraw {
                needed: self.cfg.num_attack_ases,
                pool: eligible.len(),
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, TAG_SETUP));
        let victim = eligible[rng.gen_range(0..eligible.len())];

        let mut attackers: Vec<AttackerPath> = Vec::with_capacity(self.cfg.num_attack_ases);
        let mut used: std::collections::HashSet<AsId> = std::collections::HashSet::new();
        used.insert(victim);
        let mut tries = 0usize;
        let limit = 100 * self.cfg.num_attack_ases + 1000;
        while attackers.len() < self.cfg.num_attack_ases {
            if tries >= limit {
                return Err(EngineError::AttackerDraw {
                    needed: self.cfg.num_attack_ases,
                    pool: eligible.len(),
                });
            }
            tries += 1;
            let candidate = eligible[rng.gen_range(0..eligible.len())];
            if used.contains(&candidate) {
                continue;
            }
            // unreachable candidates are redrawn
            let Ok(mut path) = self.topology.shortest_path(candidate, victim) else {
                continue;
            };
            path.reverse(); // GET direction: victim first, attacker last
            let pids = (0..path.len() - 1)
                .map(|i| {
                    pid_map
                        .pid(path[i], path[i + 1])
                        .expect("PidMap covers every directed edge of its topology")
                })
                .collect();
            used.insert(candidate);
            attackers.push(AttackerPath {
                attacker: candidate,
                path,
                pids,
            });
        }

        Ok(RunContext {
            scenario: self,
            run_index,
            run_seed,
            victim,
            attackers,
            pid_map,
            routers: HashMap::new(),
        })
    }

    /// Executes all runs (in parallel) and aggregates. D-PID scenarios go
    /// through the rate-based epoch model instead of the packet engine.
    pub fn run(&self) -> Result<ScenarioOutcome, EngineError> {
        let indices: Vec<u32> = (0..self.cfg.runs).collect();
        let runs = indices
            .par_iter()
            .map(|&i| {
                if self.cfg.strategy == StrategyKind::DPid {
                    Ok(self.dpid_run(i))
                } else {
                    Ok(self.setup_run(i)?.execute())
                }
            })
            .collect::<Result<Vec<RunMetrics>, EngineError>>()?;
        let aggregate = self.aggregate(&runs);
        Ok(ScenarioOutcome { runs, aggregate })
    }

    fn aggregate(&self, runs: &[RunMetrics]) -> AggregateMetrics {
        let n = runs.len() as f64;
        let mean_reach = runs.iter().map(|r| r.reach_fraction).sum::<f64>() / n;
        let stddev_reach = if runs.len() < 2 {
            0.0
        } else {
            (runs
                .iter()
                .map(|r| (r.reach_fraction - mean_reach).powi(2))
                .sum::<f64>()
                / (n - 1.0))
                .sqrt()
        };
        let mean_dropped = runs
            .iter()
            .map(|r| {
                if r.legit_sent == 0 {
                    0.0
                } else {
                    r.legit_dropped as f64 / r.legit_sent as f64
                }
            })
            .sum::<f64>()
            / n;
        AggregateMetrics {
            runs: runs.len() as u32,
            sent: runs.iter().map(|r| r.sent).sum(),
            reached: runs.iter().map(|r| r.reached).sum(),
            rejected: runs.iter().map(|r| r.rejected).sum(),
            malformed: runs.iter().map(|r| r.malformed).sum(),
            legit_sent: runs.iter().map(|r| r.legit_sent).sum(),
            legit_dropped: runs.iter().map(|r| r.legit_dropped).sum(),
            mean_reach_fraction: mean_reach,
            stddev_reach_fraction: stddev_reach,
            victim_mbps: self.cfg.aggregate_attack_mbps * mean_reach,
            mean_legit_dropped_fraction: mean_dropped,
            storage_bits_per_as: self.storage_bits_per_as(),
        }
    }

    /// Rate-based D-PID run: per attacker AS, Poisson full-path learning
    /// events at `lambda_per_min`; learned paths stay usable until the
    /// next global PID update. The victim rate is each attacker's share of
    /// the aggregate rate weighted by its learned-time fraction.
    pub fn dpid_run(&self, run_index: u32) -> RunMetrics {
        let cfg = &self.cfg;
        let run_seed = cfg.run_seed(run_index);
        let horizon_s = cfg.horizon_ticks as f64 * cfg.tick_ms / 1000.0;
        let period = cfg.dpid.update_period_s;
        let rate_per_s = cfg.dpid.lambda_per_min / 60.0;
        let per_as_mbps = cfg.aggregate_attack_mbps / cfg.num_attack_ases as f64;

        let mut victim_mbps = 0.0;
        for a in 0..cfg.num_attack_ases as u64 {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(run_seed, TAG_DPID.wrapping_add(a << 3)));
            let mut covered = 0.0f64;
            if rate_per_s > 0.0 {
                let mut t = 0.0f64;
                let mut covered_until = 0.0f64;
                loop {
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    t += -u.ln() / rate_per_s;
                    if t >= horizon_s {
                        break;
                    }
                    if t >= covered_until {
                        let boundary = ((t / period).floor() + 1.0) * period;
                        covered += boundary.min(horizon_s) - t;
                        covered_until = boundary;
                    }
                }
            }
            victim_mbps += per_as_mbps * (covered / horizon_s);
        }

        let reach_fraction = victim_mbps / cfg.aggregate_attack_mbps;
        RunMetrics {
            run_index,
            seed: run_seed,
            sent: 0,
            reached: 0,
            rejected: 0,
            malformed: 0,
            reach_fraction,
            filtered_fraction: 1.0 - reach_fraction,
            victim_mbps,
            legit_sent: 0,
            legit_dropped: 0,
            storage_bits_per_as: 0,
        }
    }
}

/// Shortest path from the victim to one attacker (GET direction) and the
/// path identifiers along it.
#[derive(Debug, Clone)]
pub struct AttackerPath {
    pub attacker: AsId,
    /// victim first, attacker last
    pub path: Vec<AsId>,
    /// pids\[i\] crosses path\[i\] -> path\[i+1\]; length = path length - 1
    pub pids: Vec<PathId>,
}

/// All mutable state of one run.
pub struct RunContext<'a> {
    scenario: &'a Scenario,
    run_index: u32,
    run_seed: u64,
    victim: AsId,
    attackers: Vec<AttackerPath>,
    pid_map: PidMap,
    routers: HashMap<AsId, RouterState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Event {
    tick: Tick,
    seq: u64,
    kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    /// Attack DATA checked at path position `pos` (origin first, victim
    /// at position 0).
    AttackCheck { packet: u32, pos: u32 },
    /// Legitimate GET arriving at path position `pos`.
    GetStep { flow: u32, pos: u32 },
    /// Legitimate DATA checked at path position `pos`.
    DataCheck { flow: u32, pos: u32 },
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.tick, self.seq).cmp(&(other.tick, other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct AttackPacket {
    attacker: u32,
    sid: ServiceId,
}

struct LegitFlow {
    path: Vec<AsId>,
    pids: Vec<PathId>,
    sid: ServiceId,
}

impl<'a> RunContext<'a> {
    pub fn victim(&self) -> AsId {
        self.victim
    }

    pub fn attacker_paths(&self) -> &[AttackerPath] {
        &self.attackers
    }

    pub fn attacker_ases(&self) -> Vec<AsId> {
        self.attackers.iter().map(|a| a.attacker).collect()
    }

    pub fn run_seed(&self) -> u64 {
        self.run_seed
    }

    pub fn pid_map(&self) -> &PidMap {
        &self.pid_map
    }

    /// Router state of one AS, constructed (and prefilled) on first touch.
    /// Construction depends only on (config, run seed, AS id), so lazy
    /// materialization cannot perturb determinism.
    pub fn router_mut(&mut self, asn: AsId) -> &mut RouterState {
        let scenario = self.scenario;
        let run_seed = self.run_seed;
        self.routers
            .entry(asn)
            .or_insert_with(|| make_router(scenario, run_seed, asn))
    }

    /// Runs attack injection plus background traffic to completion and
    /// returns the metrics.
    pub fn execute(&mut self) -> RunMetrics {
        let scenario = self.scenario;
        let cfg = &scenario.cfg;
        let run_seed = self.run_seed;
        let attackers = &self.attackers;
        let routers = &mut self.routers;
        let mut heap: BinaryHeap<std::cmp::Reverse<Event>> = BinaryHeap::new();
        let mut seq = 0u64;

        // attack packets: one origin-check event each, at a random send tick
        let mut attack_rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, TAG_ATTACK));
        let fixed_sid = ServiceId(attack_rng.gen());
        let mut packets: Vec<AttackPacket> =
            Vec::with_capacity(attackers.len() * cfg.packets_per_attacker as usize);
        for (attacker_idx, attacker) in attackers.iter().enumerate() {
            let origin_pos = (attacker.path.len() - 1) as u32;
            for _ in 0..cfg.packets_per_attacker {
                let tick = attack_rng.gen_range(0..cfg.horizon_ticks);
                let sid = match cfg.attack_sid_mode {
                    AttackSidMode::Random => ServiceId(attack_rng.gen()),
                    AttackSidMode::Fixed => fixed_sid,
                };
                let packet = packets.len() as u32;
                packets.push(AttackPacket {
                    attacker: attacker_idx as u32,
                    sid,
                });
                heap.push(std::cmp::Reverse(Event {
                    tick,
                    seq,
                    kind: EventKind::AttackCheck {
                        packet,
                        pos: origin_pos,
                    },
                }));
                seq += 1;
            }
        }

        // background round trips at random issue ticks
        let mut bg_rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, TAG_BACKGROUND));
        let flow_count = (cfg.background.live_get_rate * cfg.horizon_ticks as f64).round() as u64;
        let mut flows: Vec<LegitFlow> = Vec::with_capacity(flow_count as usize);
        let nodes: Vec<AsId> = scenario.topology.nodes().collect();
        for _ in 0..flow_count {
            let mut guard = 0;
            let path = loop {
                guard += 1;
                if guard > 1000 {
                    // isolated graphs cannot carry background traffic
                    break None;
                }
                let consumer = nodes[bg_rng.gen_range(0..nodes.len())];
                let provider = nodes[bg_rng.gen_range(0..nodes.len())];
                if consumer == provider {
                    continue;
                }
                if let Ok(path) = scenario.topology.shortest_path(consumer, provider) {
                    break Some(path);
                }
            };
            let Some(path) = path else { continue };
            let tick = bg_rng.gen_range(0..cfg.horizon_ticks);
            let pids = (0..path.len() - 1)
                .map(|i| {
                    self.pid_map
                        .pid(path[i], path[i + 1])
                        .expect("PidMap totality")
                })
                .collect();
            let flow = flows.len() as u32;
            flows.push(LegitFlow {
                path,
                pids,
                sid: ServiceId(bg_rng.gen()),
            });
            heap.push(std::cmp::Reverse(Event {
                tick,
                seq,
                kind: EventKind::GetStep { flow, pos: 0 },
            }));
            seq += 1;
        }

        let mut reached = 0u64;
        let mut rejected = 0u64;
        let malformed = 0u64;
        let mut legit_dropped = 0u64;
        let per_hop = cfg.per_hop_ticks;
        let current_epoch = self.pid_map.epoch();

        while let Some(std::cmp::Reverse(event)) = heap.pop() {
            match event.kind {
                EventKind::AttackCheck { packet, pos } => {
                    let pkt = &packets[packet as usize];
                    let attacker = &attackers[pkt.attacker as usize];
                    let asn = attacker.path[pos as usize];
                    let prefix = &attacker.pids[..pos as usize];
                    let ctx = DataContext {
                        tick: event.tick,
                        packet_epoch: current_epoch,
                        current_epoch,
                    };
                    let router = router_entry(routers, scenario, run_seed, asn);
                    router.advance(event.tick);
                    match router.on_data(pkt.sid, prefix, &ctx) {
                        Verdict::Reject => rejected += 1,
                        Verdict::Allow => {
                            if pos == 0 {
                                reached += 1;
                            } else {
                                heap.push(std::cmp::Reverse(Event {
                                    tick: event.tick + per_hop,
                                    seq,
                                    kind: EventKind::AttackCheck {
                                        packet,
                                        pos: pos - 1,
                                    },
                                }));
                                seq += 1;
                            }
                        }
                    }
                }
                EventKind::GetStep { flow, pos } => {
                    let f = &flows[flow as usize];
                    let asn = f.path[pos as usize];
                    let at_provider = (pos as usize) + 1 == f.path.len();
                    let router = router_entry(routers, scenario, run_seed, asn);
                    router.advance(event.tick);
                    router.on_get(f.sid, &f.pids[..pos as usize], event.tick);
                    let next = if at_provider {
                        // turn around: origin check uses the full PID list
                        Event {
                            tick: event.tick,
                            seq,
                            kind: EventKind::DataCheck { flow, pos },
                        }
                    } else {
                        Event {
                            tick: event.tick + per_hop,
                            seq,
                            kind: EventKind::GetStep { flow, pos: pos + 1 },
                        }
                    };
                    heap.push(std::cmp::Reverse(next));
                    seq += 1;
                }
                EventKind::DataCheck { flow, pos } => {
                    let f = &flows[flow as usize];
                    let asn = f.path[pos as usize];
                    let ctx = DataContext {
                        tick: event.tick,
                        packet_epoch: current_epoch,
                        current_epoch,
                    };
                    let router = router_entry(routers, scenario, run_seed, asn);
                    router.advance(event.tick);
                    match router.on_data(f.sid, &f.pids[..pos as usize], &ctx) {
                        Verdict::Reject => legit_dropped += 1,
                        Verdict::Allow => {
                            if pos > 0 {
                                heap.push(std::cmp::Reverse(Event {
                                    tick: event.tick + per_hop,
                                    seq,
                                    kind: EventKind::DataCheck { flow, pos: pos - 1 },
                                }));
                                seq += 1;
                            }
                        }
                    }
                }
            }
        }

        let sent = packets.len() as u64;
        let reach_fraction = if sent == 0 {
            0.0
        } else {
            reached as f64 / sent as f64
        };
        RunMetrics {
            run_index: self.run_index,
            seed: self.run_seed,
            sent,
            reached,
            rejected,
            malformed,
            reach_fraction,
            filtered_fraction: 1.0 - reach_fraction,
            victim_mbps: cfg.aggregate_attack_mbps * reach_fraction,
            legit_sent: flows.len() as u64,
            legit_dropped,
            storage_bits_per_as: self.scenario.storage_bits_per_as(),
        }
    }
}

fn router_entry<'r>(
    routers: &'r mut HashMap<AsId, RouterState>,
    scenario: &Scenario,
    run_seed: u64,
    asn: AsId,
) -> &'r mut RouterState {
    routers
        .entry(asn)
        .or_insert_with(|| make_router(scenario, run_seed, asn))
}

fn make_router(scenario: &Scenario, run_seed: u64, asn: AsId) -> RouterState {
    let cfg = &scenario.cfg;
    let as_seed = derive_seed(derive_seed(run_seed, TAG_ROUTER), asn.0 as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(as_seed);
    let mut pair = RotatingFilterPair::new(
        scenario.filter_bits,
        cfg.hash_count,
        cfg.filter_capacity,
        rng.gen(),
    )
    .expect("scenario validation guarantees filter parameters");
    let logs = matches!(
        cfg.strategy,
        StrategyKind::Comprehensive
            | StrategyKind::Odd
            | StrategyKind::Even
            | StrategyKind::Dynamic
    );
    if logs {
        let prefill = (cfg.background.prefill_fraction * cfg.filter_capacity as f64).round() as u64;
        let active = pair.active_filter_mut();
        for _ in 0..prefill {
            active.insert(Digest::from_u128(rng.gen()));
        }
    }
    let dynamic = (cfg.strategy == StrategyKind::Dynamic).then(|| {
        let span = cfg.dynamic.initial_duration + cfg.dynamic.silent_period;
        DynamicState::new(cfg.dynamic, rng.gen_range(0..span.max(1)))
    });
    RouterState::new(cfg.strategy, pair, dynamic, run_seed)
}

/// Outcome of a single legitimate GET/DATA round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTripOutcome {
    pub delivered: bool,
    pub rejected_at: Option<AsId>,
    pub malformed: bool,
}

/// Plays one GET/DATA round trip over caller-provided routers: the GET is
/// logged per strategy at every AS on the way out, the DATA is verified at
/// the provider AS (full PID list) and then stripped and verified at each
/// AS on the way back. One-way latency is `per_hop_ticks` per hop.
///
/// Panics if `routers` lacks an AS on the path or if `pids` does not have
/// exactly one entry per hop.
pub fn simulate_round_trip(
    routers: &mut HashMap<AsId, RouterState>,
    path: &[AsId],
    pids: &[PathId],
    sid: ServiceId,
    issue_tick: Tick,
    per_hop_ticks: u64,
) -> RoundTripOutcome {
    assert!(!path.is_empty(), "path must contain at least one AS");
    assert_eq!(pids.len() + 1, path.len(), "one PID per hop");

    let mut get = GetMessage::new(sid, NodeId(0), issue_tick);
    let mut tick = issue_tick;
    for (pos, &asn) in path.iter().enumerate() {
        let router = routers.get_mut(&asn).expect("router for every path AS");
        router.advance(tick);
        router.on_get(sid, &get.pids, tick);
        if pos + 1 < path.len() {
            get.append_pid(pids[pos]);
            tick += per_hop_ticks;
        }
    }

    let mut data = DataMessage::reply_to(&get, 0);
    for (pos, &asn) in path.iter().enumerate().rev() {
        let router = routers.get_mut(&asn).expect("router for every path AS");
        router.advance(tick);
        if pos + 1 < path.len() {
            // restore this AS's arrival prefix
            if data.strip_last().is_err() {
                return RoundTripOutcome {
                    delivered: false,
                    rejected_at: None,
                    malformed: true,
                };
            }
        }
        let verdict = router.on_data(sid, &data.pids, &DataContext::at(tick));
        if verdict == Verdict::Reject {
            return RoundTripOutcome {
                delivered: false,
                rejected_at: Some(asn),
                malformed: false,
            };
        }
        if pos > 0 {
            tick += per_hop_ticks;
        }
    }
    RoundTripOutcome {
        delivered: true,
        rejected_at: None,
        malformed: false,
    }
}
