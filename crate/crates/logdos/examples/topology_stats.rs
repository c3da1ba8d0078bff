//! Builds AS topologies (from an edge list and synthetically), routes
//! over them, and prints path statistics and PID-map behavior.
//!
//! Run with: cargo run --example topology_stats

use logdos::topology::{assign_pids, generate_synthetic, load_edge_list, AsId};
use std::io::Cursor;

fn main() {
    // the edge-list format: "asid asid" per line, '#' comments, reversed
    // duplicates collapse
    let text = "\
# tiny inter-domain fabric
1 2
2 3
2 4
3 5
4 5  # parallel branch
5 1
";
    let small = load_edge_list(Cursor::new(text)).unwrap();
    println!(
        "parsed {} ASes, {} edges from the inline edge list",
        small.node_count(),
        small.edge_count()
    );
    let path = small.shortest_path(AsId(1), AsId(5)).unwrap();
    let hops: Vec<String> = path.iter().map(|a| a.to_string()).collect();
    println!("shortest path 1 -> 5: {}", hops.join(" -> "));

    // deterministic ties: the lowest-id branch wins
    let path = small.shortest_path(AsId(2), AsId(5)).unwrap();
    let hops: Vec<String> = path.iter().map(|a| a.to_string()).collect();
    println!(
        "shortest path 2 -> 5: {} (lowest-id tie-break)",
        hops.join(" -> ")
    );

    for attachment in [1usize, 2, 3] {
        let t = generate_synthetic(1000, attachment, 7);
        let s = t.stats(0, 0);
        println!(
            "synthetic 1000 nodes, attachment {attachment}: {} edges, mean path {:.2} hops (sd {:.2}, stderr {:.4})",
            s.edges, s.mean_path_len, s.stddev_path_len, s.stderr_mean_path_len
        );
    }

    // directed-edge path identifiers: total per epoch, fully redrawn on
    // reassignment
    let t = generate_synthetic(300, 2, 7);
    let pids = assign_pids(&t, 99);
    println!(
        "\nassigned {} PathIds ({} per undirected edge) at epoch {}",
        pids.len(),
        pids.len() / t.edge_count(),
        pids.epoch()
    );
    let next = pids.reassigned(100);
    let kept = t
        .directed_edges()
        .into_iter()
        .filter(|&(a, b)| pids.pid(a, b) == next.pid(a, b))
        .count();
    println!(
        "after reassignment: epoch {}, {} of {} directed edges kept their PathId",
        next.epoch(),
        kept,
        next.len()
    );
}
