//! Event-driven simulator and analysis toolkit for data-flooding DDoS
//! defense in path-identifier-based information-centric networks.
//!
//! Consumers in these networks request content with GET messages that
//! accumulate one path identifier (PID) per inter-domain hop; DATA
//! messages retrace the path in reverse, shedding one PID per hop. The
//! LogDos defense family has each AS log Bloom-filter digests of passing
//! GETs and reject DATA whose digest was never logged, which stops
//! attackers that flood crafted DATA along learned PID paths. This crate
//! models:
//!
//! - [`bloom`]: the logging store — filters with an analytic
//!   false-positive model and a two-filter rotation scheme,
//! - [`topology`]: AS-level graphs, PID assignment, and BFS routing,
//! - [`messages`]: GET/DATA messages and the canonical (SID, PID-prefix)
//!   digest,
//! - [`strategies`]: the per-AS variants — Comprehensive, Odd, Even,
//!   Dynamic (adaptive windows), plus a D-PID epoch baseline,
//! - [`engine`]: tick-ordered packet simulation with prefill, background
//!   traffic, and multi-run aggregation,
//! - [`analysis`]: closed-form oracles the simulation is checked against,
//! - [`cli`]: config parsing, experiment sweeps, and CSV emission behind
//!   the `logdos` binary.
//!
//! The `examples/` directory has one runnable program per capability;
//! `cargo run --example attack_run` is a good starting point.

pub mod analysis;
pub mod bloom;
pub mod cli;
pub mod engine;
mod hashing;
pub mod messages;
pub mod strategies;
pub mod topology;

/// Discrete simulation time unit. Packet send times, hop latencies, and
/// dynamic-logging windows are all expressed in ticks.
pub type Tick = u64;
