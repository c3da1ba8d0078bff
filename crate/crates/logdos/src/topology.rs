//! AS-level network graph: edge-list ingestion, synthetic generation at
//! desk scale, deterministic BFS routing, path-length statistics, and the
//! per-directed-edge path identifier map.
//!
//! Each autonomous system is collapsed to a single routing node. Edges are
//! undirected; path identifiers are per direction, one per inter-domain
//! crossing.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Identifier of an autonomous system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AsId(pub u32);

impl std::fmt::Display for AsId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier assigned to one direction of an inter-domain link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathId(pub u64);

/// Optional per-AS classification from a metadata file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsClass {
    Transient,
    Core,
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: self-loop on AS {asn}")]
    SelfLoop { line: usize, asn: u32 },
    #[error("unknown AS {0}")]
    UnknownAs(AsId),
    #[error("no path from {0} to {1}")]
    Unreachable(AsId, AsId),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Undirected AS graph with deterministic neighbor ordering.
#[derive(Debug, Clone)]
pub struct Topology {
    ids: Vec<u32>,
    index_of: HashMap<u32, usize>,
    neighbors: Vec<Vec<usize>>,
    edge_count: usize,
    classes: HashMap<AsId, AsClass>,
}

impl Topology {
    /// Builds a topology from undirected edges. Duplicates (in either
    /// orientation) collapse to one edge; self-loops are rejected.
    pub fn from_edges<I>(edges: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = (AsId, AsId)>,
    {
        let mut set = BTreeSet::new();
        for (line, (a, b)) in edges.into_iter().enumerate() {
            if a == b {
                return Err(TopologyError::SelfLoop {
                    line: line + 1,
                    asn: a.0,
                });
            }
            set.insert((a.0.min(b.0), a.0.max(b.0)));
        }
        Ok(Self::from_edge_set(set))
    }

    fn from_edge_set(edges: BTreeSet<(u32, u32)>) -> Self {
        let mut nodes = BTreeSet::new();
        for &(a, b) in &edges {
            nodes.insert(a);
            nodes.insert(b);
        }
        let ids: Vec<u32> = nodes.into_iter().collect();
        let index_of: HashMap<u32, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut neighbors = vec![Vec::new(); ids.len()];
        for &(a, b) in &edges {
            let (ia, ib) = (index_of[&a], index_of[&b]);
            neighbors[ia].push(ib);
            neighbors[ib].push(ia);
        }
        // ids are sorted, so sorting by index sorts by AS id
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Topology {
            ids,
            index_of,
            neighbors,
            edge_count: edges.len(),
            classes: HashMap::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, asn: AsId) -> bool {
        self.index_of.contains_key(&asn.0)
    }

    /// All AS ids in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = AsId> + '_ {
        self.ids.iter().map(|&v| AsId(v))
    }

    /// Neighbors of an AS in ascending id order.
    pub fn neighbors_of(
        &self,
        asn: AsId,
    ) -> Result<impl Iterator<Item = AsId> + '_, TopologyError> {
        let idx = *self
            .index_of
            .get(&asn.0)
            .ok_or(TopologyError::UnknownAs(asn))?;
        Ok(self.neighbors[idx].iter().map(move |&i| AsId(self.ids[i])))
    }

    /// All directed edges in ascending (from, to) order.
    pub fn directed_edges(&self) -> Vec<(AsId, AsId)> {
        let mut out = Vec::with_capacity(2 * self.edge_count);
        for (i, list) in self.neighbors.iter().enumerate() {
            for &j in list {
                out.push((AsId(self.ids[i]), AsId(self.ids[j])));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn set_classes(&mut self, classes: HashMap<AsId, AsClass>) {
        self.classes = classes;
    }

    pub fn class_of(&self, asn: AsId) -> Option<AsClass> {
        self.classes.get(&asn).copied()
    }

    pub fn has_classes(&self) -> bool {
        !self.classes.is_empty()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let transient = self
            .classes
            .values()
            .filter(|c| matches!(c, AsClass::Transient))
            .count();
        (transient, self.classes.len() - transient)
    }

    /// BFS shortest path from `src` to `dst`, inclusive of both endpoints.
    /// Ties are broken by expanding the lowest-id neighbor first, so the
    /// result is deterministic.
    pub fn shortest_path(&self, src: AsId, dst: AsId) -> Result<Vec<AsId>, TopologyError> {
        let s = *self
            .index_of
            .get(&src.0)
            .ok_or(TopologyError::UnknownAs(src))?;
        let d = *self
            .index_of
            .get(&dst.0)
            .ok_or(TopologyError::UnknownAs(dst))?;
        if s == d {
            return Ok(vec![src]);
        }
        let mut parent = vec![usize::MAX; self.ids.len()];
        let mut queue = VecDeque::new();
        parent[s] = s;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    if v == d {
                        let mut path = vec![d];
                        let mut cur = d;
                        while cur != s {
                            cur = parent[cur];
                            path.push(cur);
                        }
                        path.reverse();
                        return Ok(path.into_iter().map(|i| AsId(self.ids[i])).collect());
                    }
                    queue.push_back(v);
                }
            }
        }
        Err(TopologyError::Unreachable(src, dst))
    }

    /// Hop distances from `src` to every node (usize::MAX if unreachable).
    fn bfs_distances(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.ids.len()];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Path-length statistics in hops. Exact over all unordered pairs when
    /// the graph has at most 2000 nodes, otherwise estimated over
    /// `sample_pairs` random reachable pairs.
    pub fn stats(&self, sample_pairs: usize, seed: u64) -> TopologyStats {
        let n = self.ids.len();
        let mut lengths: Vec<usize> = Vec::new();
        if n <= 2000 {
            for u in 0..n {
                let dist = self.bfs_distances(u);
                for &d in dist.iter().skip(u + 1) {
                    if d != usize::MAX {
                        lengths.push(d);
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cache: HashMap<usize, Vec<usize>> = HashMap::new();
            let mut drawn = 0usize;
            let mut guard = 0usize;
            while drawn < sample_pairs && guard < sample_pairs * 10 {
                guard += 1;
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u == v {
                    continue;
                }
                let dist = cache.entry(u).or_insert_with(|| self.bfs_distances(u));
                if dist[v] != usize::MAX {
                    lengths.push(dist[v]);
                    drawn += 1;
                }
            }
        }
        let count = lengths.len();
        let mean = if count == 0 {
            0.0
        } else {
            lengths.iter().sum::<usize>() as f64 / count as f64
        };
        let variance = if count == 0 {
            0.0
        } else {
            lengths
                .iter()
                .map(|&l| (l as f64 - mean).powi(2))
                .sum::<f64>()
                / count as f64
        };
        let stddev = variance.sqrt();
        TopologyStats {
            nodes: n,
            edges: self.edge_count,
            mean_path_len: mean,
            stddev_path_len: stddev,
            stderr_mean_path_len: if count == 0 {
                0.0
            } else {
                stddev / (count as f64).sqrt()
            },
            sampled_pairs: count,
        }
    }
}

/// Summary returned by [`Topology::stats`]. Path lengths are in hops.
/// Both the per-pair standard deviation and the standard error of the
/// mean are reported, since quoted per-path deviations are sometimes
/// actually the latter.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyStats {
    pub nodes: usize,
    pub edges: usize,
    pub mean_path_len: f64,
    pub stddev_path_len: f64,
    pub stderr_mean_path_len: f64,
    pub sampled_pairs: usize,
}

/// Parses a whitespace-separated "asid asid" edge list. `#` starts a
/// comment, blank lines are skipped, reversed duplicates collapse.
pub fn load_edge_list<R: BufRead>(source: R) -> Result<Topology, TopologyError> {
    let mut edges = BTreeSet::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let a = parse_asn(fields.next(), line_no)?;
        let b = parse_asn(fields.next(), line_no)?;
        if let Some(extra) = fields.next() {
            return Err(TopologyError::Parse {
                line: line_no,
                message: format!("unexpected trailing field '{extra}'"),
            });
        }
        if a == b {
            return Err(TopologyError::SelfLoop {
                line: line_no,
                asn: a,
            });
        }
        edges.insert((a.min(b), a.max(b)));
    }
    Ok(Topology::from_edge_set(edges))
}

fn parse_asn(field: Option<&str>, line: usize) -> Result<u32, TopologyError> {
    let field = field.ok_or_else(|| TopologyError::Parse {
        line,
        message: "expected two AS ids".to_string(),
    })?;
    field.parse::<u32>().map_err(|e| TopologyError::Parse {
        line,
        message: format!("invalid AS id '{field}': {e}"),
    })
}

/// Parses an "asid class" metadata file with class in {transient, core}.
pub fn load_as_classes<R: BufRead>(source: R) -> Result<HashMap<AsId, AsClass>, TopologyError> {
    let mut classes = HashMap::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let asn = parse_asn(fields.next(), line_no)?;
        let class = match fields.next() {
            Some("transient") => AsClass::Transient,
            Some("core") => AsClass::Core,
            Some(other) => {
                return Err(TopologyError::Parse {
                    line: line_no,
                    message: format!("unknown class '{other}' (expected transient or core)"),
                })
            }
            None => {
                return Err(TopologyError::Parse {
                    line: line_no,
                    message: "expected an AS id and a class".to_string(),
                })
            }
        };
        classes.insert(AsId(asn), class);
    }
    Ok(classes)
}

/// Connected preferential-attachment graph: node `i` joins by linking to
/// `min(i, attachment)` distinct earlier nodes sampled proportionally to
/// degree. Deterministic for a fixed seed.
pub fn generate_synthetic(n_nodes: usize, attachment: usize, seed: u64) -> Topology {
    assert!(n_nodes >= 2, "need at least two nodes");
    assert!(attachment >= 1, "need at least one edge per new node");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // endpoint pool: each node id appears once per incident edge end,
    // so uniform draws from the pool are degree-proportional
    let mut pool: Vec<u32> = Vec::with_capacity(2 * n_nodes * attachment);
    let mut edges = BTreeSet::new();
    for new in 1..n_nodes as u32 {
        let want = attachment.min(new as usize);
        let mut targets = BTreeSet::new();
        let mut tries = 0usize;
        while targets.len() < want {
            let candidate = if pool.is_empty() {
                0
            } else if tries < 64 {
                pool[rng.gen_range(0..pool.len())]
            } else {
                // degenerate pools can starve distinct draws; fall back to uniform
                rng.gen_range(0..new)
            };
            tries += 1;
            targets.insert(candidate);
        }
        for &t in &targets {
            edges.insert((t, new));
            pool.push(t);
            pool.push(new);
        }
    }
    Topology::from_edge_set(edges)
}

/// Directed-edge to path-identifier mapping for one epoch. Every directed
/// edge of the topology the map was built from has exactly one PathId;
/// values are unique within the epoch (collisions are redrawn).
#[derive(Debug, Clone)]
pub struct PidMap {
    map: HashMap<(AsId, AsId), PathId>,
    epoch: u64,
}

impl PidMap {
    pub fn pid(&self, from: AsId, to: AsId) -> Option<PathId> {
        self.map.get(&(from, to)).copied()
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Redraws every PathId and increments the epoch, modeling a global
    /// PID renegotiation.
    pub fn reassigned(&self, seed: u64) -> PidMap {
        let mut keys: Vec<(AsId, AsId)> = self.map.keys().copied().collect();
        keys.sort_unstable();
        PidMap {
            map: draw_unique_pids(&keys, seed),
            epoch: self.epoch + 1,
        }
    }
}

/// Assigns a fresh 64-bit PathId to every directed edge (epoch 0).
pub fn assign_pids(topology: &Topology, seed: u64) -> PidMap {
    let keys = topology.directed_edges();
    PidMap {
        map: draw_unique_pids(&keys, seed),
        epoch: 0,
    }
}

fn draw_unique_pids(keys: &[(AsId, AsId)], seed: u64) -> HashMap<(AsId, AsId), PathId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = HashSet::with_capacity(keys.len());
    let mut map = HashMap::with_capacity(keys.len());
    for &key in keys {
        let mut pid: u64 = rng.gen();
        while !used.insert(pid) {
            pid = rng.gen();
        }
        map.insert(key, PathId(pid));
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{BTreeMap, BinaryHeap};
    use std::io::Cursor;

    #[test]
    fn load_simple_edge_list() {
        let t = load_edge_list(Cursor::new("1 2\n2 3\n")).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.edge_count(), 2);
    }

    #[test]
    fn load_dedups_reversed_edges() {
        let t = load_edge_list(Cursor::new("1 2\n2 1\n")).unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.edge_count(), 1);
    }

    #[test]
    fn load_skips_comments_and_blanks() {
        let t = load_edge_list(Cursor::new(
            "# header\n\n1 2 # trailing comment\n  3   4  \n",
        ))
        .unwrap();
        assert_eq!(t.node_count(), 4);
        assert_eq!(t.edge_count(), 2);
    }

    #[test]
    fn load_reports_line_numbers_on_errors() {
        let err = load_edge_list(Cursor::new("1 2\nnonsense here\n")).unwrap_err();
        match err {
            TopologyError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        let err = load_edge_list(Cursor::new("1 2\n3 3\n")).unwrap_err();
        match err {
            TopologyError::SelfLoop { line, asn } => {
                assert_eq!((line, asn), (2, 3));
            }
            other => panic!("unexpected error {other:?}"),
        }
        let err = load_edge_list(Cursor::new("1\n")).unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 1, .. }));
        let err = load_edge_list(Cursor::new("1 2 3\n")).unwrap_err();
        assert!(matches!(err, TopologyError::Parse { line: 1, .. }));
    }

    #[test]
    fn metadata_parses_classes() {
        let classes = load_as_classes(Cursor::new("1 transient\n2 core\n# note\n")).unwrap();
        assert_eq!(classes[&AsId(1)], AsClass::Transient);
        assert_eq!(classes[&AsId(2)], AsClass::Core);
        assert!(load_as_classes(Cursor::new("1 borked\n")).is_err());
    }

    #[test]
    fn synthetic_minimal_graph_is_a_single_edge() {
        let t = generate_synthetic(2, 1, 0);
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.edge_count(), 1);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let a = generate_synthetic(500, 2, 99);
        let b = generate_synthetic(500, 2, 99);
        assert_eq!(a.directed_edges(), b.directed_edges());
        let c = generate_synthetic(500, 2, 100);
        assert_ne!(a.directed_edges(), c.directed_edges());
    }

    #[test]
    fn synthetic_is_connected_with_short_paths() {
        let t = generate_synthetic(1000, 2, 7);
        assert_eq!(t.node_count(), 1000);
        let stats = t.stats(0, 0);
        // all pairs reachable
        assert_eq!(stats.sampled_pairs, 1000 * 999 / 2);
        assert!(
            (stats.mean_path_len - 4.0).abs() <= 1.0,
            "mean path length {} outside 4 +/- 1",
            stats.mean_path_len
        );
    }

    #[test]
    fn shortest_path_trivial_cases() {
        let t = load_edge_list(Cursor::new("1 2\n2 3\n")).unwrap();
        assert_eq!(t.shortest_path(AsId(1), AsId(1)).unwrap(), vec![AsId(1)]);
        assert_eq!(
            t.shortest_path(AsId(1), AsId(3)).unwrap(),
            vec![AsId(1), AsId(2), AsId(3)]
        );
    }

    #[test]
    fn shortest_path_unreachable_is_an_error() {
        let t = load_edge_list(Cursor::new("1 2\n3 4\n")).unwrap();
        assert!(matches!(
            t.shortest_path(AsId(1), AsId(4)),
            Err(TopologyError::Unreachable(..))
        ));
    }

    #[test]
    fn shortest_path_prefers_lowest_id_on_ties() {
        // two equal-length routes 1-2-4 and 1-3-4; must take the one via 2
        let t = load_edge_list(Cursor::new("1 2\n1 3\n2 4\n3 4\n")).unwrap();
        assert_eq!(
            t.shortest_path(AsId(1), AsId(4)).unwrap(),
            vec![AsId(1), AsId(2), AsId(4)]
        );
    }

    #[test]
    fn stats_triangle_and_line() {
        let triangle = load_edge_list(Cursor::new("1 2\n2 3\n1 3\n")).unwrap();
        let s = triangle.stats(0, 0);
        assert_eq!(s.mean_path_len, 1.0);
        assert_eq!(s.stddev_path_len, 0.0);

        let line = load_edge_list(Cursor::new("1 2\n2 3\n")).unwrap();
        let s = line.stats(0, 0);
        assert!((s.mean_path_len - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.sampled_pairs, 3);
    }

    #[test]
    fn pid_map_covers_every_directed_edge() {
        let t = generate_synthetic(100, 2, 1);
        let pm = assign_pids(&t, 5);
        assert_eq!(pm.len(), 2 * t.edge_count());
        for (a, b) in t.directed_edges() {
            assert!(pm.pid(a, b).is_some());
        }
        // determinism
        let pm2 = assign_pids(&t, 5);
        for (a, b) in t.directed_edges() {
            assert_eq!(pm.pid(a, b), pm2.pid(a, b));
        }
    }

    #[test]
    fn reassign_changes_every_pid_and_bumps_epoch() {
        let t = generate_synthetic(200, 2, 2);
        let pm = assign_pids(&t, 5);
        let next = pm.reassigned(6);
        assert_eq!(next.epoch(), pm.epoch() + 1);
        assert_eq!(next.len(), pm.len());
        let kept = t
            .directed_edges()
            .into_iter()
            .filter(|&(a, b)| pm.pid(a, b) == next.pid(a, b))
            .count();
        assert_eq!(kept, 0, "{kept} directed edges kept their PathId");
    }

    /// Unit-weight Dijkstra, used only as an independent distance oracle.
    fn dijkstra_len(edges: &[(u32, u32)], src: u32, dst: u32) -> Option<usize> {
        let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for &(a, b) in edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut dist: BTreeMap<u32, usize> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        heap.push(std::cmp::Reverse((0usize, src)));
        while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
            if dist.contains_key(&u) {
                continue;
            }
            dist.insert(u, d);
            if u == dst {
                return Some(d);
            }
            for &v in adj.get(&u).into_iter().flatten() {
                if !dist.contains_key(&v) {
                    heap.push(std::cmp::Reverse((d + 1, v)));
                }
            }
        }
        None
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bfs_length_matches_dijkstra(
            raw_edges in proptest::collection::vec((0u32..30, 0u32..30), 1..80),
            src in 0u32..30,
            dst in 0u32..30,
        ) {
            let edges: Vec<(u32, u32)> = raw_edges.into_iter().filter(|(a, b)| a != b).collect();
            prop_assume!(!edges.is_empty());
            let t = Topology::from_edges(edges.iter().map(|&(a, b)| (AsId(a), AsId(b)))).unwrap();
            prop_assume!(t.contains(AsId(src)) && t.contains(AsId(dst)));
            let bfs = t.shortest_path(AsId(src), AsId(dst));
            let oracle = dijkstra_len(&edges, src, dst);
            match (bfs, oracle) {
                (Ok(path), Some(len)) => {
                    prop_assert_eq!(path.len() - 1, len);
                    // validity: consecutive hops are edges
                    for pair in path.windows(2) {
                        let hop: Vec<AsId> = t.neighbors_of(pair[0]).unwrap().collect();
                        prop_assert!(hop.contains(&pair[1]));
                    }
                }
                (Err(_), None) => {}
                (bfs, oracle) => prop_assert!(false, "disagreement: bfs={bfs:?} oracle={oracle:?}"),
            }
        }

        #[test]
        fn path_length_is_symmetric(
            raw_edges in proptest::collection::vec((0u32..25, 0u32..25), 1..60),
            src in 0u32..25,
            dst in 0u32..25,
        ) {
            let edges: Vec<(u32, u32)> = raw_edges.into_iter().filter(|(a, b)| a != b).collect();
            prop_assume!(!edges.is_empty());
            let t = Topology::from_edges(edges.iter().map(|&(a, b)| (AsId(a), AsId(b)))).unwrap();
            prop_assume!(t.contains(AsId(src)) && t.contains(AsId(dst)));
            let fwd = t.shortest_path(AsId(src), AsId(dst));
            let rev = t.shortest_path(AsId(dst), AsId(src));
            match (fwd, rev) {
                (Ok(f), Ok(r)) => prop_assert_eq!(f.len(), r.len()),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "asymmetric reachability: {other:?}"),
            }
        }
    }
}
