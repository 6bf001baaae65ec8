//! Undirected graph storage and queries: adjacency, degrees, capped BFS,
//! bridge detection, connected components.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Immutable undirected graph with dense node indices `0..node_count` and
/// sorted adjacency lists. Safe to share across threads once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

/// Result of [`load_edge_list`]: the graph plus counts of dropped lines.
#[derive(Debug)]
pub struct LoadReport {
    pub graph: Graph,
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

impl Graph {
    /// Build a graph from internal-index edges. Self-loops and duplicates
    /// are dropped silently; labels default to the decimal index.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in edges {
            check_index(u as usize, node_count)?;
            check_index(v as usize, node_count)?;
            if u == v {
                continue;
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        let labels = (0..node_count).map(|i| i.to_string()).collect();
        Ok(Self::from_adjacency(adjacency, labels))
    }

    /// Assemble from per-node neighbor lists (not necessarily sorted or
    /// deduplicated) and external labels.
    pub(crate) fn from_adjacency(mut adjacency: Vec<Vec<u32>>, labels: Vec<String>) -> Graph {
        let mut half_edges = 0usize;
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            list.dedup();
            half_edges += list.len();
        }
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as u32))
            .collect();
        Graph { adjacency, edge_count: half_edges / 2, labels, index }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, u: u32) -> Result<usize> {
        check_index(u as usize, self.node_count())?;
        Ok(self.adjacency[u as usize].len())
    }

    /// Sorted neighbor list. Panics on out-of-range index; use [`Graph::degree`]
    /// for a checked variant.
    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.adjacency[u as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        match self.adjacency.get(u as usize) {
            Some(list) => list.binary_search(&v).is_ok(),
            None => false,
        }
    }

    /// All edges as (u, v) with u < v, in ascending order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, list) in self.adjacency.iter().enumerate() {
            let u = u as u32;
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// External label of a node.
    pub fn label(&self, u: u32) -> &str {
        &self.labels[u as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Internal index of an external id, if present.
    pub fn index_of(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    /// Hop distances from `source` for every node within `cap` hops.
    /// The source itself maps to 0.
    pub fn bfs_distances_within(&self, source: u32, cap: u32) -> Result<HashMap<u32, u32>> {
        check_index(source as usize, self.node_count())?;
        let mut scratch = BfsScratch::new(self.node_count());
        self.bfs_capped_into(source, cap, &mut scratch);
        Ok(scratch
            .touched
            .iter()
            .map(|&n| (n, scratch.dist[n as usize]))
            .collect())
    }

    /// Capped BFS into a reusable scratch buffer. After the call,
    /// `scratch.touched` holds every node within `cap` hops (source included)
    /// and `scratch.dist` its distance.
    pub(crate) fn bfs_capped_into(&self, source: u32, cap: u32, scratch: &mut BfsScratch) {
        scratch.reset();
        scratch.dist[source as usize] = 0;
        scratch.touched.push(source);
        scratch.queue.push_back(source);
        while let Some(u) = scratch.queue.pop_front() {
            let d = scratch.dist[u as usize];
            if d == cap {
                continue;
            }
            for &v in &self.adjacency[u as usize] {
                if scratch.dist[v as usize] == u32::MAX {
                    scratch.dist[v as usize] = d + 1;
                    scratch.touched.push(v);
                    scratch.queue.push_back(v);
                }
            }
        }
    }

    /// True iff `v` stays reachable from `u` when the edge (u, v) is ignored,
    /// i.e. (u, v) is not a bridge. Uses a bidirectional search so the common
    /// case (endpoints sharing a neighbor) is O(deg).
    pub fn is_connected_after_removal(&self, u: u32, v: u32) -> Result<bool> {
        check_index(u as usize, self.node_count())?;
        check_index(v as usize, self.node_count())?;
        if !self.has_edge(u, v) {
            return Err(Error::InvalidEdge { u: u as usize, v: v as usize });
        }
        Ok(connected_avoiding_edge(&self.adjacency, u, v))
    }

    /// Number of connected components (isolated nodes count as components).
    pub fn connected_components(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start as u32);
            while let Some(x) = queue.pop_front() {
                for &y in &self.adjacency[x as usize] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        components
    }
}

/// Reusable BFS buffers, sized once per graph.
pub(crate) struct BfsScratch {
    pub dist: Vec<u32>,
    pub touched: Vec<u32>,
    queue: VecDeque<u32>,
}

impl BfsScratch {
    pub fn new(node_count: usize) -> Self {
        BfsScratch {
            dist: vec![u32::MAX; node_count],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        for &n in &self.touched {
            self.dist[n as usize] = u32::MAX;
        }
        self.touched.clear();
        self.queue.clear();
    }
}

/// Bidirectional BFS between the endpoints of a (present) edge, with that
/// edge excluded. Expands the smaller frontier each round.
pub(crate) fn connected_avoiding_edge(adjacency: &[Vec<u32>], u: u32, v: u32) -> bool {
    // A shared neighbor means a 2-path survives the removal.
    let (au, av) = (&adjacency[u as usize], &adjacency[v as usize]);
    if sorted_intersects(au, av) {
        return true;
    }

    let n = adjacency.len();
    // side: 0 = unvisited, 1 = reached from u, 2 = reached from v
    let mut side = vec![0u8; n];
    side[u as usize] = 1;
    side[v as usize] = 2;
    let mut frontier_u = vec![u];
    let mut frontier_v = vec![v];

    while !frontier_u.is_empty() && !frontier_v.is_empty() {
        let expand_u = frontier_u.len() <= frontier_v.len();
        let (frontier, own, other) =
            if expand_u { (&mut frontier_u, 1, 2) } else { (&mut frontier_v, 2, 1) };
        let mut next = Vec::new();
        for &x in frontier.iter() {
            for &y in &adjacency[x as usize] {
                if (x == u && y == v) || (x == v && y == u) {
                    continue;
                }
                match side[y as usize] {
                    0 => {
                        side[y as usize] = own;
                        next.push(y);
                    }
                    s if s == other => return true,
                    _ => {}
                }
            }
        }
        *frontier = next;
    }
    false
}

fn sorted_intersects(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

fn check_index(index: usize, count: usize) -> Result<()> {
    if index < count {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index, count })
    }
}

/// Load an undirected graph from whitespace-delimited edge-list text.
///
/// Lines starting with `#` and blank lines are skipped. External ids are
/// remapped to dense indices; ids that all parse as integers are ordered
/// numerically, otherwise lexicographically, so the numbering does not
/// depend on line order. Duplicate edges and self-loops are dropped and
/// counted in the report.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadReport> {
    let mut raw_edges: Vec<(String, String)> = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    let mut seen = HashMap::new();
    let mut self_loops = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected two node tokens, got {trimmed:?}"),
                })
            }
        };
        if a == b {
            self_loops += 1;
            continue;
        }
        for id in [a, b] {
            if !seen.contains_key(id) {
                seen.insert(id.to_string(), ());
                ids.push(id.to_string());
            }
        }
        raw_edges.push((a.to_string(), b.to_string()));
    }

    if ids.is_empty() {
        return Err(Error::EmptyInput("edge list has no edges".into()));
    }

    ids.sort_by(|a, b| id_sort_key(a).cmp(&id_sort_key(b)));
    let index: HashMap<&str, u32> =
        ids.iter().enumerate().map(|(i, s)| (s.as_str(), i as u32)).collect();

    let mut adjacency = vec![Vec::new(); ids.len()];
    let mut duplicate_edges = 0usize;
    let mut edge_set = std::collections::HashSet::with_capacity(raw_edges.len());
    for (a, b) in &raw_edges {
        let (mut u, mut v) = (index[a.as_str()], index[b.as_str()]);
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        if !edge_set.insert((u, v)) {
            duplicate_edges += 1;
            continue;
        }
        adjacency[u as usize].push(v);
        adjacency[v as usize].push(u);
    }

    Ok(LoadReport {
        graph: Graph::from_adjacency(adjacency, ids),
        self_loops,
        duplicate_edges,
    })
}

/// Numeric-aware ordering key: integer ids sort numerically before any
/// non-numeric id, non-numeric ids sort lexicographically.
fn id_sort_key(id: &str) -> (u8, u64, &str) {
    match id.parse::<u64>() {
        Ok(n) => (0, n, id),
        Err(_) => (1, 0, id),
    }
}
