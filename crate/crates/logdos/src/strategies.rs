//! Per-AS defense logic: which GET digests a router logs, which DATA
//! messages it verifies, and the adaptive on/off windows of dynamic
//! logging.
//!
//! The position of a router on a path is captured by the length of the
//! PID prefix a GET carries when it arrives. Verification on the return
//! path recomputes the same prefix (routing symmetry), so a router checks
//! exactly the digests it logged.

use serde::{Deserialize, Serialize};

use crate::bloom::RotatingFilterPair;
use crate::messages::{digest_of, ServiceId};
use crate::topology::PathId;
use crate::Tick;

/// Defense variant assigned to every AS in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    NoDefense,
    Comprehensive,
    Odd,
    Even,
    Dynamic,
    DPid,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::NoDefense,
        StrategyKind::Comprehensive,
        StrategyKind::Odd,
        StrategyKind::Even,
        StrategyKind::Dynamic,
        StrategyKind::DPid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::NoDefense => "nodefense",
            StrategyKind::Comprehensive => "comprehensive",
            StrategyKind::Odd => "odd",
            StrategyKind::Even => "even",
            StrategyKind::Dynamic => "dynamic",
            StrategyKind::DPid => "dpid",
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether a router logs a GET arriving with the given PID prefix length.
/// Parity variants split the path: odd prefix lengths go to Odd logging,
/// even lengths (including zero) to Even logging.
pub fn should_log(kind: StrategyKind, arrival_prefix_len: usize) -> bool {
    match kind {
        StrategyKind::Comprehensive | StrategyKind::Dynamic => true,
        StrategyKind::Odd => arrival_prefix_len % 2 == 1,
        StrategyKind::Even => arrival_prefix_len.is_multiple_of(2),
        StrategyKind::NoDefense | StrategyKind::DPid => false,
    }
}

/// Parameters of the dynamic logging window state machine, in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicParams {
    /// Initial logging window duration; extensions add this amount.
    pub initial_duration: u64,
    /// Silent span between a closed window and the next one.
    pub silent_period: u64,
    /// Lag of the validation window behind the logging window, covering
    /// the GET-to-DATA round trip.
    pub validation_shift: u64,
    /// Invalid-DATA count above which the current window is extended.
    pub invalid_threshold: u64,
}

impl Default for DynamicParams {
    // artifact defaults at 1 ms per tick: 10 s windows, 10 s silence,
    // 200 ms validation lag
    fn default() -> Self {
        DynamicParams {
            initial_duration: 10_000,
            silent_period: 10_000,
            validation_shift: 200,
            invalid_threshold: 100,
        }
    }
}

/// Mutable state of one dynamic-logging router.
#[derive(Debug, Clone)]
pub struct DynamicState {
    pub params: DynamicParams,
    /// Start of the current logging window.
    pub window_start: Tick,
    /// Current window duration; grows by `initial_duration` per detection.
    pub duration: Tick,
    /// Invalid DATA messages seen in the current validation window.
    pub invalid_count: u64,
    /// The initial window start this router drew, kept for metadata.
    pub phase_offset: Tick,
}

impl DynamicState {
    pub fn new(params: DynamicParams, phase_offset: Tick) -> Self {
        assert!(
            params.initial_duration > 0,
            "logging duration must be positive"
        );
        DynamicState {
            params,
            window_start: phase_offset,
            duration: params.initial_duration,
            invalid_count: 0,
            phase_offset,
        }
    }

    pub fn logging_at(&self, tick: Tick) -> bool {
        tick >= self.window_start && tick < self.window_start + self.duration
    }

    pub fn validating_at(&self, tick: Tick) -> bool {
        let shift = self.params.validation_shift;
        tick >= self.window_start + shift && tick < self.window_start + self.duration + shift
    }
}

/// Verdict of a router on a DATA message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Allow,
    Reject,
}

/// Ambient facts a router needs when judging a DATA message.
#[derive(Debug, Clone, Copy)]
pub struct DataContext {
    pub tick: Tick,
    /// PID epoch the packet's path identifiers belong to.
    pub packet_epoch: u64,
    /// Current global PID epoch.
    pub current_epoch: u64,
}

impl DataContext {
    pub fn at(tick: Tick) -> Self {
        DataContext {
            tick,
            packet_epoch: 0,
            current_epoch: 0,
        }
    }
}

/// Defense state of one AS: its strategy, its logging store, and (for
/// dynamic logging) the window state machine.
#[derive(Debug, Clone)]
pub struct RouterState {
    kind: StrategyKind,
    pair: RotatingFilterPair,
    dynamic: Option<DynamicState>,
    run_seed: u64,
}

impl RouterState {
    pub fn new(
        kind: StrategyKind,
        pair: RotatingFilterPair,
        dynamic: Option<DynamicState>,
        run_seed: u64,
    ) -> Self {
        debug_assert_eq!(kind == StrategyKind::Dynamic, dynamic.is_some());
        RouterState {
            kind,
            pair,
            dynamic,
            run_seed,
        }
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn pair(&self) -> &RotatingFilterPair {
        &self.pair
    }

    pub fn pair_mut(&mut self) -> &mut RotatingFilterPair {
        &mut self.pair
    }

    pub fn dynamic(&self) -> Option<&DynamicState> {
        self.dynamic.as_ref()
    }

    pub fn storage_bits(&self) -> u64 {
        self.pair.storage_bits()
    }

    /// Handles a GET crossing this AS with the given arrival prefix.
    /// Logging never drops a GET; this only records the digest.
    pub fn on_get(&mut self, sid: ServiceId, arrival_prefix: &[PathId], tick: Tick) {
        if !should_log(self.kind, arrival_prefix.len()) {
            return;
        }
        if let Some(dy) = &self.dynamic {
            if !dy.logging_at(tick) {
                return;
            }
        }
        let digest = digest_of(sid, arrival_prefix, self.run_seed);
        self.pair.insert(digest);
    }

    /// Judges a DATA message whose PID list has already been restored to
    /// this AS's arrival prefix (full list at the origin AS, stripped once
    /// per hop after that).
    pub fn on_data(&mut self, sid: ServiceId, prefix: &[PathId], ctx: &DataContext) -> Verdict {
        match self.kind {
            StrategyKind::NoDefense => Verdict::Allow,
            StrategyKind::DPid => {
                // stale path identifiers are unroutable
                if ctx.packet_epoch == ctx.current_epoch {
                    Verdict::Allow
                } else {
                    Verdict::Reject
                }
            }
            StrategyKind::Comprehensive => self.check(sid, prefix),
            StrategyKind::Odd => {
                if prefix.len() % 2 == 1 {
                    self.check(sid, prefix)
                } else {
                    Verdict::Allow
                }
            }
            StrategyKind::Even => {
                if prefix.len().is_multiple_of(2) {
                    self.check(sid, prefix)
                } else {
                    Verdict::Allow
                }
            }
            StrategyKind::Dynamic => {
                let validating = self
                    .dynamic
                    .as_ref()
                    .is_some_and(|dy| dy.validating_at(ctx.tick));
                if !validating {
                    return Verdict::Allow;
                }
                let verdict = self.check(sid, prefix);
                if verdict == Verdict::Reject {
                    if let Some(dy) = &mut self.dynamic {
                        dy.invalid_count += 1;
                    }
                }
                verdict
            }
        }
    }

    fn check(&self, sid: ServiceId, prefix: &[PathId]) -> Verdict {
        if self.pair.query(digest_of(sid, prefix, self.run_seed)) {
            Verdict::Allow
        } else {
            Verdict::Reject
        }
    }

    /// Advances the dynamic window state machine to `tick`. At each window
    /// end (validation shift included): a detection extends the window in
    /// place, otherwise a silent period passes and a fresh window starts
    /// with both filters reset. Catches up over any number of elapsed
    /// intervals, so sparse traffic is handled correctly.
    pub fn advance(&mut self, tick: Tick) {
        let Some(dy) = &mut self.dynamic else { return };
        while tick >= dy.window_start + dy.duration + dy.params.validation_shift {
            if dy.invalid_count > dy.params.invalid_threshold {
                dy.duration += dy.params.initial_duration;
                dy.invalid_count = 0;
            } else {
                dy.window_start += dy.duration + dy.params.silent_period;
                dy.duration = dy.params.initial_duration;
                dy.invalid_count = 0;
                self.pair.reset_both();
            }
        }
    }
}
