//! Labeled pair-dataset construction: positives by connectivity-safe edge
//! removal, negatives from non-adjacent pairs within a hop bound, and a
//! stratified train/test split over both.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{BfsScratch, Graph};
use crate::seed::rng_for;

/// A node pair with a binary label: 1 = edge removed from the original
/// graph, 0 = sampled non-edge. Stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabeledPair {
    pub u: u32,
    pub v: u32,
    pub label: u8,
}

impl LabeledPair {
    pub fn new(u: u32, v: u32, label: u8) -> Self {
        LabeledPair { u: u.min(v), v: u.max(v), label }
    }
}

/// Sampling parameters with the pipeline defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    /// Fraction of edges to remove as positives.
    pub removal_fraction: f64,
    /// Negatives per positive.
    pub negative_ratio: f64,
    /// Fraction of each class held out for testing.
    pub test_fraction: f64,
    /// Maximum shortest-path distance for negative pairs.
    pub max_distance: u32,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            removal_fraction: 0.2,
            negative_ratio: 1.0,
            test_fraction: 0.3,
            max_distance: 3,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.removal_fraction > 0.0 && self.removal_fraction < 1.0) {
            return Err(Error::Config(format!(
                "sampler.removal_fraction must lie in (0, 1), got {}",
                self.removal_fraction
            )));
        }
        if !(self.negative_ratio > 0.0) {
            return Err(Error::Config("sampler.negative_ratio must be positive".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "sampler.test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.max_distance < 2 {
            return Err(Error::Config("sampler.max_distance must be >= 2".into()));
        }
        Ok(())
    }
}

/// The assembled experiment dataset.
#[derive(Debug, Clone)]
pub struct PairDataset {
    /// Original graph minus the removed positive edges.
    pub residual_graph: Graph,
    pub train_pairs: Vec<LabeledPair>,
    pub test_pairs: Vec<LabeledPair>,
    pub seed: u64,
    pub config: SamplerConfig,
}

/// Non-adjacent pairs (u < v) with shortest-path distance in
/// `[2, max_distance]`, sampled uniformly from the full eligible set.
/// Returns everything if fewer than `target_count` pairs exist. Distances
/// are measured on `g` as given (the original graph in the pipeline).
pub fn sample_unconnected_pairs(
    g: &Graph,
    max_distance: u32,
    target_count: usize,
    seed: u64,
) -> Vec<LabeledPair> {
    let eligible = enumerate_unconnected_pairs(g, max_distance);
    let mut rng = rng_for(seed, "negative-sample");
    let mut chosen: Vec<(u32, u32)> = if eligible.len() <= target_count {
        eligible
    } else {
        // partial Fisher-Yates over a copy, first target_count slots
        let mut pool = eligible;
        for i in 0..target_count {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.truncate(target_count);
        pool
    };
    chosen.sort_unstable();
    chosen.into_iter().map(|(u, v)| LabeledPair { u, v, label: 0 }).collect()
}

/// Every pair (u < v) with no edge and distance within [2, max_distance],
/// in ascending order. BFS fans out across source nodes; per-source blocks
/// are concatenated in node order, so the result is deterministic.
fn enumerate_unconnected_pairs(g: &Graph, max_distance: u32) -> Vec<(u32, u32)> {
    let n = g.node_count();
    let mut per_source: Vec<Vec<(u32, u32)>> = Vec::with_capacity(n);
    (0..n as u32)
        .into_par_iter()
        .map_init(
            || BfsScratch::new(n),
            |scratch, u| {
                let mut found = Vec::new();
                g.bfs_capped_into(u, max_distance, scratch);
                for &v in &scratch.touched {
                    if v > u && scratch.dist[v as usize] >= 2 {
                        found.push((u, v));
                    }
                }
                found.sort_unstable();
                found
            },
        )
        .collect_into_vec(&mut per_source);
    per_source.into_iter().flatten().collect()
}

/// Remove up to `round(removal_fraction * edge_count)` edges, visiting
/// edges in seeded random order. An edge is removed only if both endpoints
/// keep degree >= 1 and its endpoints stay connected in the current
/// residual graph. Returns the residual graph and the removed edges as
/// label-1 pairs (ascending order).
pub fn sample_connected_pairs(
    g: &Graph,
    removal_fraction: f64,
    seed: u64,
) -> Result<(Graph, Vec<LabeledPair>)> {
    if !(removal_fraction > 0.0 && removal_fraction < 1.0) {
        return Err(Error::Config(format!(
            "removal fraction must lie in (0, 1), got {removal_fraction}"
        )));
    }
    let target = (removal_fraction * g.edge_count() as f64).round() as usize;
    let mut order = g.edges();
    order.shuffle(&mut rng_for(seed, "edge-removal"));

    let mut working: Vec<Vec<u32>> =
        (0..g.node_count() as u32).map(|u| g.neighbors(u).to_vec()).collect();
    let mut removed = Vec::new();

    for (u, v) in order {
        if removed.len() == target {
            break;
        }
        if working[u as usize].len() < 2 || working[v as usize].len() < 2 {
            continue;
        }
        remove_working_edge(&mut working, u, v);
        if crate::graph::connected_avoiding_edge(&working, u, v) {
            removed.push(LabeledPair { u, v, label: 1 });
        } else {
            restore_working_edge(&mut working, u, v);
        }
    }

    removed.sort_unstable_by_key(|p| (p.u, p.v));
    let residual = Graph::from_adjacency(working, g.labels().to_vec());
    Ok((residual, removed))
}

fn remove_working_edge(adj: &mut [Vec<u32>], u: u32, v: u32) {
    for (a, b) in [(u, v), (v, u)] {
        let list = &mut adj[a as usize];
        if let Ok(pos) = list.binary_search(&b) {
            list.remove(pos);
        }
    }
}

fn restore_working_edge(adj: &mut [Vec<u32>], u: u32, v: u32) {
    for (a, b) in [(u, v), (v, u)] {
        let list = &mut adj[a as usize];
        if let Err(pos) = list.binary_search(&b) {
            list.insert(pos, b);
        }
    }
}

/// Compose the two samplers and split into train/test, stratified by label.
pub fn build_dataset(g: &Graph, config: &SamplerConfig, seed: u64) -> Result<PairDataset> {
    config.validate()?;
    let (residual, positives) = sample_connected_pairs(g, config.removal_fraction, seed)?;
    if positives.is_empty() {
        return Err(Error::Data(
            "no removable edge: every edge is a bridge or isolates an endpoint".into(),
        ));
    }
    let wanted = (config.negative_ratio * positives.len() as f64).round() as usize;
    let negatives = sample_unconnected_pairs(g, config.max_distance, wanted, seed);

    let (train_pos, test_pos) = split_class(positives, config.test_fraction, seed, "split-pos");
    let (train_neg, test_neg) = split_class(negatives, config.test_fraction, seed, "split-neg");

    let mut train_pairs = train_pos;
    train_pairs.extend(train_neg);
    let mut test_pairs = test_pos;
    test_pairs.extend(test_neg);
    train_pairs.shuffle(&mut rng_for(seed, "shuffle-train"));
    test_pairs.shuffle(&mut rng_for(seed, "shuffle-test"));

    Ok(PairDataset {
        residual_graph: residual,
        train_pairs,
        test_pairs,
        seed,
        config: *config,
    })
}

fn split_class(
    mut pairs: Vec<LabeledPair>,
    test_fraction: f64,
    seed: u64,
    tag: &str,
) -> (Vec<LabeledPair>, Vec<LabeledPair>) {
    pairs.shuffle(&mut rng_for(seed, tag));
    let test_count = (test_fraction * pairs.len() as f64).round() as usize;
    let test = pairs.split_off(pairs.len() - test_count.min(pairs.len()));
    (pairs, test)
}

// ---------------------------------------------------------------------------
// Persistence: pair files (u-id, v-id, label), residual edge list, manifest.
// ---------------------------------------------------------------------------

/// Write pairs as tab-separated `u_label v_label label` lines using the
/// graph's external ids.
pub fn write_pairs<W: Write>(mut w: W, g: &Graph, pairs: &[LabeledPair]) -> Result<()> {
    for p in pairs {
        writeln!(w, "{}\t{}\t{}", g.label(p.u), g.label(p.v), p.label)?;
    }
    Ok(())
}

/// Read pairs written by [`write_pairs`], mapping external ids through `g`.
pub fn read_pairs<R: BufRead>(r: R, g: &Graph) -> Result<Vec<LabeledPair>> {
    let mut pairs = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 'u<TAB>v<TAB>label', got {trimmed:?}"),
            });
        }
        let resolve = |id: &str| {
            g.index_of(id).ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: format!("unknown node id {id:?}"),
            })
        };
        let u = resolve(fields[0])?;
        let v = resolve(fields[1])?;
        let label: u8 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("bad label {:?}", fields[2]),
        })?;
        if label > 1 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("label must be 0 or 1, got {label}"),
            });
        }
        pairs.push(LabeledPair::new(u, v, label));
    }
    Ok(pairs)
}

/// Write a graph as an edge-list file (external ids, ascending index order).
pub fn write_edge_list<W: Write>(mut w: W, g: &Graph) -> Result<()> {
    for (u, v) in g.edges() {
        writeln!(w, "{}\t{}", g.label(u), g.label(v))?;
    }
    Ok(())
}

/// Key-value manifest describing a dataset build.
pub fn dataset_manifest(ds: &PairDataset, original: &Graph) -> Vec<(String, String)> {
    let count = |pairs: &[LabeledPair], label: u8| {
        pairs.iter().filter(|p| p.label == label).count()
    };
    vec![
        ("seed".into(), ds.seed.to_string()),
        ("removal_fraction".into(), ds.config.removal_fraction.to_string()),
        ("negative_ratio".into(), ds.config.negative_ratio.to_string()),
        ("test_fraction".into(), ds.config.test_fraction.to_string()),
        ("max_distance".into(), ds.config.max_distance.to_string()),
        ("original_nodes".into(), original.node_count().to_string()),
        ("original_edges".into(), original.edge_count().to_string()),
        ("residual_edges".into(), ds.residual_graph.edge_count().to_string()),
        ("train_positives".into(), count(&ds.train_pairs, 1).to_string()),
        ("train_negatives".into(), count(&ds.train_pairs, 0).to_string()),
        ("test_positives".into(), count(&ds.test_pairs, 1).to_string()),
        ("test_negatives".into(), count(&ds.test_pairs, 0).to_string()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;
    use std::collections::HashSet;

    #[test]
    fn path_has_single_eligible_negative() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let pairs = sample_unconnected_pairs(&g, 3, 10, 7);
        assert_eq!(pairs, vec![LabeledPair { u: 0, v: 2, label: 0 }]);
    }

    #[test]
    fn triangle_has_no_negatives() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(sample_unconnected_pairs(&g, 3, 10, 7).is_empty());
    }

    #[test]
    fn negatives_verified_by_all_pairs_bfs() {
        let g = oracles::random_connected_graph(11, 50, 1.2);
        let dist = oracles::all_pairs_bfs(&g);
        let pairs = sample_unconnected_pairs(&g, 3, 10_000, 3);
        assert!(!pairs.is_empty());
        for p in &pairs {
            assert!(!g.has_edge(p.u, p.v));
            let d = dist[p.u as usize][p.v as usize];
            assert!((2..=3).contains(&d), "pair ({}, {}) at distance {d}", p.u, p.v);
        }
        // eligible set recovered exactly when target exceeds availability
        let want: HashSet<(u32, u32)> = (0..50u32)
            .flat_map(|u| ((u + 1)..50).map(move |v| (u, v)))
            .filter(|&(u, v)| (2..=3).contains(&dist[u as usize][v as usize]))
            .collect();
        let got: HashSet<(u32, u32)> = pairs.iter().map(|p| (p.u, p.v)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn sampling_is_uniform_given_seed_and_respects_target() {
        let g = oracles::random_connected_graph(5, 60, 1.5);
        let a = sample_unconnected_pairs(&g, 3, 40, 9);
        let b = sample_unconnected_pairs(&g, 3, 40, 9);
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        let c = sample_unconnected_pairs(&g, 3, 40, 10);
        assert_ne!(a, c, "different seeds should select different samples");
    }

    #[test]
    fn triangle_removal_keeps_a_path() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let (residual, removed) = sample_connected_pairs(&g, 0.34, 13).unwrap();
        assert_eq!(removed.len(), 1);
        assert_eq!(residual.edge_count(), 2);
        assert_eq!(residual.connected_components(), 1);
    }

    #[test]
    fn tree_yields_no_removals() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let (residual, removed) = sample_connected_pairs(&g, 0.5, 99).unwrap();
        assert!(removed.is_empty());
        assert_eq!(residual.edge_count(), g.edge_count());
    }

    #[test]
    fn karate_removal_preserves_connectivity() {
        let text = std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/karate.txt"),
        )
        .unwrap();
        let g = crate::graph::load_edge_list(std::io::Cursor::new(text)).unwrap().graph;
        let (residual, removed) = sample_connected_pairs(&g, 0.2, 42).unwrap();
        assert_eq!(removed.len(), (0.2f64 * 78.0).round() as usize);
        assert_eq!(residual.connected_components(), 1);
    }

    #[test]
    fn removal_preserves_component_count_across_seeds() {
        for seed in 0..30 {
            let g = oracles::random_graph(seed, 80, 0.05);
            let before = g.connected_components();
            let (residual, removed) = sample_connected_pairs(&g, 0.25, seed * 7 + 1).unwrap();
            assert_eq!(residual.connected_components(), before, "seed {seed}");
            for p in &removed {
                assert!(g.has_edge(p.u, p.v));
                assert!(!residual.has_edge(p.u, p.v));
            }
        }
    }

    #[test]
    fn dataset_on_triangle_with_pendant() {
        // triangle 0-1-2 plus pendant 3 attached to 0; fraction 0.3 of 4
        // edges rounds to 1 removable (a triangle edge), and the only
        // eligible negatives involve node 3 or the opposite triangle pair.
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (0, 3)]).unwrap();
        let ds = build_dataset(&g, &SamplerConfig::default(), 5).unwrap();
        let all: Vec<&LabeledPair> = ds.train_pairs.iter().chain(&ds.test_pairs).collect();
        assert_eq!(all.iter().filter(|p| p.label == 1).count(), 1);
        assert_eq!(all.iter().filter(|p| p.label == 0).count(), 1);
        assert_eq!(ds.residual_graph.connected_components(), 1);
    }

    #[test]
    fn dataset_errors_when_no_positive_exists() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            build_dataset(&g, &SamplerConfig::default(), 1),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn dataset_is_deterministic_and_disjoint() {
        let g = oracles::random_connected_graph(21, 120, 1.0);
        let cfg = SamplerConfig::default();
        let a = build_dataset(&g, &cfg, 77).unwrap();
        let b = build_dataset(&g, &cfg, 77).unwrap();
        assert_eq!(a.train_pairs, b.train_pairs);
        assert_eq!(a.test_pairs, b.test_pairs);

        let train: HashSet<(u32, u32)> = a.train_pairs.iter().map(|p| (p.u, p.v)).collect();
        let test: HashSet<(u32, u32)> = a.test_pairs.iter().map(|p| (p.u, p.v)).collect();
        assert!(train.is_disjoint(&test));
        assert_eq!(train.len(), a.train_pairs.len(), "duplicate train pairs");
        assert_eq!(test.len(), a.test_pairs.len(), "duplicate test pairs");

        // label-1 pairs are original edges absent from the residual;
        // label-0 pairs are original non-edges
        for p in a.train_pairs.iter().chain(&a.test_pairs) {
            if p.label == 1 {
                assert!(g.has_edge(p.u, p.v));
                assert!(!a.residual_graph.has_edge(p.u, p.v));
            } else {
                assert!(!g.has_edge(p.u, p.v));
            }
        }
    }

    #[test]
    fn split_is_stratified() {
        let g = oracles::random_connected_graph(22, 150, 1.3);
        let ds = build_dataset(&g, &SamplerConfig::default(), 3).unwrap();
        let frac = |pairs: &[LabeledPair]| {
            pairs.iter().filter(|p| p.label == 1).count() as f64 / pairs.len() as f64
        };
        let bound = 1.0 / ds.train_pairs.len().min(ds.test_pairs.len()) as f64;
        assert!(
            (frac(&ds.train_pairs) - frac(&ds.test_pairs)).abs() <= bound + 1e-12,
            "train {} vs test {}",
            frac(&ds.train_pairs),
            frac(&ds.test_pairs)
        );
    }

    #[test]
    fn pairs_round_trip_through_files() {
        let g = oracles::random_connected_graph(8, 40, 1.0);
        let ds = build_dataset(&g, &SamplerConfig::default(), 11).unwrap();
        let mut bytes = Vec::new();
        write_pairs(&mut bytes, &g, &ds.train_pairs).unwrap();
        let back = read_pairs(std::io::Cursor::new(&bytes), &g).unwrap();
        assert_eq!(back, ds.train_pairs);
    }
}
