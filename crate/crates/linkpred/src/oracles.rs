//! Brute-force reference implementations used only by unit tests. These stay
//! independent of the production code paths they check: plain BFS over edge
//! lists, no caps, no early exits.

use std::collections::HashSet;
use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::graph::Graph;

/// Random connected graph: a random spanning tree plus `extra_per_node * n`
/// additional random edges.
pub fn random_connected_graph(seed: u64, n: usize, extra_per_node: f64) -> Graph {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n as u32 {
        let u = rng.gen_range(0..v);
        edges.push((u, v));
    }
    let extra = (extra_per_node * n as f64) as usize;
    for _ in 0..extra {
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u != v {
            edges.push((u.min(v), u.max(v)));
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Random graph that may be disconnected.
pub fn random_graph(seed: u64, n: usize, edge_prob: f64) -> Graph {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if rng.gen_bool(edge_prob) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Uncapped BFS distances from every node; `u32::MAX` marks unreachable.
pub fn all_pairs_bfs(g: &Graph) -> Vec<Vec<u32>> {
    (0..g.node_count() as u32).map(|s| bfs_from(g, s)).collect()
}

fn bfs_from(g: &Graph, source: u32) -> Vec<u32> {
    let mut dist = vec![u32::MAX; g.node_count()];
    dist[source as usize] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Bridges found the slow way: drop each edge in turn and rerun a full BFS.
pub fn bridges_by_removal(g: &Graph) -> HashSet<(u32, u32)> {
    let all_edges = g.edges();
    let mut bridges = HashSet::new();
    for &(u, v) in &all_edges {
        let remaining: Vec<(u32, u32)> =
            all_edges.iter().copied().filter(|&e| e != (u, v)).collect();
        let without = Graph::from_edges(g.node_count(), &remaining).unwrap();
        let dist = bfs_from(&without, u);
        if dist[v as usize] == u32::MAX {
            bridges.insert((u, v));
        }
    }
    bridges
}
