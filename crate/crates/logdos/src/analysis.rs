//! Closed-form oracles for the simulator: per-path attack pass
//! probabilities, expected reach fractions over real paths, storage
//! curves, and the D-PID residual-validity formula.

use thiserror::Error;

use crate::bloom::{size_for, BloomError};
use crate::strategies::StrategyKind;
use crate::topology::{AsId, Topology, TopologyError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no closed form for strategy {0}")]
    Unsupported(StrategyKind),
    #[error("per-check probability {0} is not in (0, 1)")]
    InvalidProbability(f64),
    #[error("path must contain at least one AS")]
    EmptyPath,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Bloom(#[from] BloomError),
}

/// Analytic model of one attack path: every AS on it runs `strategy` with
/// per-check false-positive probability `fp_per_check`, and the path
/// crosses `path_nodes` ASes in total.
#[derive(Debug, Clone, Copy)]
pub struct PassModel {
    pub strategy: StrategyKind,
    pub fp_per_check: f64,
    pub path_nodes: usize,
}

/// Probability that an attack packet survives every check on its path.
///
/// Comprehensive checks at all `n` ASes (`p^n`); Odd checks where the
/// restored prefix length is odd (`p^floor(n/2)`); Even where it is even,
/// zero included (`p^ceil(n/2)`); NoDefense never checks.
pub fn pr_attack(model: &PassModel) -> Result<f64, AnalysisError> {
    if model.path_nodes == 0 {
        return Err(AnalysisError::EmptyPath);
    }
    if model.strategy != StrategyKind::NoDefense
        && !(model.fp_per_check > 0.0 && model.fp_per_check < 1.0)
    {
        return Err(AnalysisError::InvalidProbability(model.fp_per_check));
    }
    let n = model.path_nodes;
    let p = model.fp_per_check;
    match model.strategy {
        StrategyKind::NoDefense => Ok(1.0),
        StrategyKind::Comprehensive => Ok(p.powi(n as i32)),
        StrategyKind::Odd => Ok(p.powi((n / 2) as i32)),
        StrategyKind::Even => Ok(p.powi(n.div_ceil(2) as i32)),
        StrategyKind::Dynamic | StrategyKind::DPid => {
            Err(AnalysisError::Unsupported(model.strategy))
        }
    }
}

/// Mean of [`pr_attack`] over the shortest paths from each attacker to the
/// victim, with `path_nodes` set to that path's AS count. This is the
/// analytic counterpart of the engine's measured reach fraction on
/// prefill-only runs.
pub fn expected_reach_fraction(
    topology: &Topology,
    attackers: &[AsId],
    victim: AsId,
    strategy: StrategyKind,
    fp_per_check: f64,
) -> Result<f64, AnalysisError> {
    if attackers.is_empty() {
        return Err(AnalysisError::EmptyPath);
    }
    let mut total = 0.0;
    for &attacker in attackers {
        let path = topology.shortest_path(attacker, victim)?;
        total += pr_attack(&PassModel {
            strategy,
            fp_per_check,
            path_nodes: path.len(),
        })?;
    }
    Ok(total / attackers.len() as f64)
}

/// One row of the storage-overhead table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoragePoint {
    pub elements: u64,
    pub target_fp: f64,
    pub hashes: u32,
    pub bits: u64,
}

impl StoragePoint {
    pub fn megabits(&self) -> f64 {
        self.bits as f64 / 1e6
    }

    pub fn megabytes(&self) -> f64 {
        self.bits as f64 / 8e6
    }
}

/// Required filter size for every (elements, target_fp) combination.
pub fn storage_curve(
    element_counts: &[u64],
    fp_targets: &[f64],
    hashes: u32,
) -> Result<Vec<StoragePoint>, AnalysisError> {
    let mut out = Vec::with_capacity(element_counts.len() * fp_targets.len());
    for &elements in element_counts {
        for &target_fp in fp_targets {
            out.push(StoragePoint {
                elements,
                target_fp,
                hashes,
                bits: size_for(elements, target_fp, hashes)?,
            });
        }
    }
    Ok(out)
}

/// Expected victim rate under D-PID when attackers re-learn full paths as
/// a Poisson process with rate `lambda_per_min` and all path identifiers
/// are re-drawn every `update_period_s` seconds.
///
/// Within one update period of length `T`, traffic gets through from the
/// first learning event until the period ends, so the covered fraction is
/// `E[max(0, 1 - A/T)]` with `A ~ Exp(lambda)`, which integrates to
/// `1 - (1 - e^(-lambda*T)) / (lambda*T)`.
pub fn dpid_closed_form(lambda_per_min: f64, update_period_s: f64, total_attack_mbps: f64) -> f64 {
    assert!(lambda_per_min >= 0.0, "rate must be nonnegative");
    assert!(update_period_s > 0.0, "update period must be positive");
    let events_per_period = lambda_per_min * update_period_s / 60.0;
    if events_per_period == 0.0 {
        return 0.0;
    }
    let covered = 1.0 - (-(-events_per_period).exp_m1()) / events_per_period;
    total_attack_mbps * covered
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::load_edge_list;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::io::Cursor;

    fn model(strategy: StrategyKind, p: f64, n: usize) -> PassModel {
        PassModel {
            strategy,
            fp_per_check: p,
            path_nodes: n,
        }
    }

    #[test]
    fn pr_attack_direct_substitution() {
        let comp = pr_attack(&model(StrategyKind::Comprehensive, 0.01, 3)).unwrap();
        assert!((comp - 1e-6).abs() < 1e-18);
        let odd = pr_attack(&model(StrategyKind::Odd, 0.05, 4)).unwrap();
        assert!((odd - 0.0025).abs() < 1e-12);
        let even = pr_attack(&model(StrategyKind::Even, 0.05, 5)).unwrap();
        assert!((even - 1.25e-4).abs() < 1e-12);
        assert_eq!(
            pr_attack(&model(StrategyKind::NoDefense, 0.05, 5)).unwrap(),
            1.0
        );
        assert!(pr_attack(&model(StrategyKind::Dynamic, 0.05, 5)).is_err());
    }

    #[test]
    fn pr_attack_ordering_for_fixed_p_and_n() {
        for n in 1..12usize {
            for &p in &[0.01f64, 0.05, 0.3, 0.9] {
                let comp = pr_attack(&model(StrategyKind::Comprehensive, p, n)).unwrap();
                let even = pr_attack(&model(StrategyKind::Even, p, n)).unwrap();
                let odd = pr_attack(&model(StrategyKind::Odd, p, n)).unwrap();
                assert!(comp <= even && even <= odd && odd <= 1.0, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn expected_reach_uniform_and_mixed_paths() {
        // star around 2: every leaf is 2 hops (3 nodes) from another leaf
        let t = load_edge_list(Cursor::new("1 2\n2 3\n2 4\n")).unwrap();
        let r = expected_reach_fraction(
            &t,
            &[AsId(3), AsId(4)],
            AsId(1),
            StrategyKind::Comprehensive,
            0.1,
        )
        .unwrap();
        assert!((r - 1e-3).abs() < 1e-15);

        // mixed lengths 3 and 5 nodes, equal weight
        let t = load_edge_list(Cursor::new("1 2\n2 3\n3 4\n4 5\n1 6\n6 7\n")).unwrap();
        let r = expected_reach_fraction(
            &t,
            &[AsId(7), AsId(5)],
            AsId(1),
            StrategyKind::Comprehensive,
            0.1,
        )
        .unwrap();
        assert!((r - 5.05e-4).abs() < 1e-12, "r = {r}");
    }

    #[test]
    fn pr_attack_matches_bernoulli_enumeration() {
        // brute force over all 2^n per-AS outcomes on a 3-AS path
        let p = 0.3f64;
        let n = 3usize;
        for strategy in [
            StrategyKind::Comprehensive,
            StrategyKind::Odd,
            StrategyKind::Even,
        ] {
            let checks: Vec<usize> = (0..n)
                .filter(|&i| match strategy {
                    StrategyKind::Comprehensive => true,
                    StrategyKind::Odd => i % 2 == 1,
                    StrategyKind::Even => i % 2 == 0,
                    _ => unreachable!(),
                })
                .collect();
            let mut total = 0.0;
            for mask in 0..(1u32 << n) {
                let mut prob = 1.0;
                let mut passes = true;
                for i in 0..n {
                    let pass = mask & (1 << i) != 0;
                    prob *= if pass { p } else { 1.0 - p };
                    if checks.contains(&i) && !pass {
                        passes = false;
                    }
                }
                if passes {
                    total += prob;
                }
            }
            let closed = pr_attack(&model(strategy, p, n)).unwrap();
            assert!(
                (total - closed).abs() < 1e-12,
                "{strategy:?}: {total} vs {closed}"
            );
        }
    }

    #[test]
    fn storage_curve_shape() {
        let points = storage_curve(&[500_000, 2_000_000], &[1e-4, 1e-3, 1e-2], 3).unwrap();
        assert_eq!(points.len(), 6);
        // decreasing in p for fixed n
        assert!(points[0].bits > points[1].bits && points[1].bits > points[2].bits);
        // linear in n: 2M row is 4x the 0.5M row up to rounding
        for i in 0..3 {
            let small = points[i].bits as f64;
            let big = points[i + 3].bits as f64;
            assert!((big / small - 4.0).abs() < 1e-6, "{big} vs {small}");
        }
    }

    #[test]
    fn storage_headline_point() {
        let points = storage_curve(&[2_000_000], &[1e-4], 3).unwrap();
        assert!((points[0].bits as i64 - 126_242_319).unsigned_abs() <= 10);
        assert!((points[0].megabits() - 126.24).abs() < 0.01);
        assert!((points[0].megabytes() - 15.78).abs() < 0.01);
    }

    #[test]
    fn dpid_closed_form_anchors() {
        assert_eq!(dpid_closed_form(0.0, 60.0, 2000.0), 0.0);
        let at8 = dpid_closed_form(8.0, 60.0, 2000.0);
        assert!((at8 - 1750.083866).abs() < 1e-4, "at8 = {at8}");
        let at1 = dpid_closed_form(1.0, 60.0, 2000.0);
        assert!((at1 - 735.7588823).abs() < 1e-4, "at1 = {at1}");
    }

    #[test]
    fn dpid_closed_form_matches_monte_carlo_first_arrival() {
        // independent oracle: sample the first Poisson arrival per update
        // period and integrate the residual validity time
        let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
        for &(lambda, period) in &[(8.0f64, 60.0f64), (1.0, 60.0), (4.0, 120.0), (2.0, 240.0)] {
            let rate_per_s = lambda / 60.0;
            let periods = 200_000;
            let mut covered = 0.0;
            for _ in 0..periods {
                let u: f64 = 1.0 - rng.gen::<f64>();
                let first_arrival = -u.ln() / rate_per_s;
                if first_arrival < period {
                    covered += (period - first_arrival) / period;
                }
            }
            let simulated = 2000.0 * covered / periods as f64;
            let closed = dpid_closed_form(lambda, period, 2000.0);
            let rel = (simulated - closed).abs() / closed;
            assert!(
                rel < 0.01,
                "lambda={lambda} T={period}: {simulated} vs {closed} ({rel})"
            );
        }
    }

    #[test]
    fn dpid_closed_form_is_monotone_and_bounded() {
        let mut last = 0.0;
        for lambda in [0.5f64, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let v = dpid_closed_form(lambda, 60.0, 2000.0);
            assert!(v > last && v < 2000.0);
            last = v;
        }
        let mut last = 0.0;
        for period in [30.0f64, 60.0, 120.0, 240.0] {
            let v = dpid_closed_form(4.0, period, 2000.0);
            assert!(v > last && v < 2000.0);
            last = v;
        }
    }
}
