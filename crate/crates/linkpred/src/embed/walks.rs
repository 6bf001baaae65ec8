//! Second-order biased random walks. The transition out of (prev -> cur)
//! weights each neighbor x of cur as 1/p if x = prev, 1 if x is adjacent
//! to prev, 1/q otherwise; the first step is uniform.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::embed::alias::AliasTable;
use crate::embed::WalkConfig;
use crate::error::Result;
use crate::graph::Graph;
use crate::seed::{derive_seed, derive_seed_indexed};

/// Precomputed alias tables: one per node for the first step, one per
/// directed edge (prev, cur) for subsequent steps.
pub struct TransitionTables {
    first_step: Vec<Option<AliasTable>>,
    by_edge: HashMap<(u32, u32), AliasTable>,
}

impl TransitionTables {
    pub fn edge_table(&self, prev: u32, cur: u32) -> Option<&AliasTable> {
        self.by_edge.get(&(prev, cur))
    }

    pub fn first_step_table(&self, node: u32) -> Option<&AliasTable> {
        self.first_step[node as usize].as_ref()
    }
}

/// The three-case transition weights for stepping out of `cur` having
/// arrived from `prev`, aligned with `neighbors(cur)`.
pub(crate) fn transition_weights(g: &Graph, prev: u32, cur: u32, p: f64, q: f64) -> Vec<f64> {
    g.neighbors(cur)
        .iter()
        .map(|&x| {
            if x == prev {
                1.0 / p
            } else if g.has_edge(x, prev) {
                1.0
            } else {
                1.0 / q
            }
        })
        .collect()
}

/// Build all transition tables. Table construction per directed edge is
/// independent, so it fans out across edges.
pub fn preprocess_transition_tables(g: &Graph, p: f64, q: f64) -> Result<TransitionTables> {
    let first_step: Vec<Option<AliasTable>> = (0..g.node_count() as u32)
        .map(|u| {
            let deg = g.neighbors(u).len();
            if deg == 0 {
                None
            } else {
                Some(AliasTable::new(&vec![1.0; deg]).expect("uniform weights"))
            }
        })
        .collect();

    let directed: Vec<(u32, u32)> = (0..g.node_count() as u32)
        .flat_map(|u| g.neighbors(u).iter().map(move |&v| (u, v)))
        .collect();
    let by_edge: HashMap<(u32, u32), AliasTable> = directed
        .into_par_iter()
        .map(|(prev, cur)| {
            let table = AliasTable::new(&transition_weights(g, prev, cur, p, q))
                .expect("neighbor weights are positive");
            ((prev, cur), table)
        })
        .collect();

    Ok(TransitionTables { first_step, by_edge })
}

/// Generate `walks_per_node` walks from every non-isolated node, each of
/// exactly `walk_length` nodes (an undirected neighbor always has a back
/// edge, so walks never dead-end). Walks are ordered by (node, repetition)
/// and each draws from its own seeded generator, so the output does not
/// depend on thread count. Both table modes consume identical randomness.
pub fn generate_walks(g: &Graph, cfg: &WalkConfig, seed: u64) -> Result<Vec<Vec<u32>>> {
    cfg.validate()?;
    let tables = if cfg.precompute_tables {
        Some(preprocess_transition_tables(g, cfg.return_param, cfg.inout_param)?)
    } else {
        None
    };

    let starts: Vec<u32> =
        (0..g.node_count() as u32).filter(|&u| !g.neighbors(u).is_empty()).collect();
    let walk_seed = derive_seed(seed, "walks");
    let r = cfg.walks_per_node;

    let mut jobs: Vec<(u32, usize)> = Vec::with_capacity(starts.len() * r);
    for &u in &starts {
        for rep in 0..r {
            jobs.push((u, rep));
        }
    }

    let mut walks = Vec::with_capacity(jobs.len());
    jobs.into_par_iter()
        .map(|(start, rep)| {
            let stream = (start as u64) * (r as u64) + rep as u64;
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed_indexed(walk_seed, "walk", stream));
            single_walk(g, cfg, tables.as_ref(), start, &mut rng)
        })
        .collect_into_vec(&mut walks);
    Ok(walks)
}

fn single_walk(
    g: &Graph,
    cfg: &WalkConfig,
    tables: Option<&TransitionTables>,
    start: u32,
    rng: &mut ChaCha20Rng,
) -> Vec<u32> {
    let mut walk = Vec::with_capacity(cfg.walk_length);
    walk.push(start);
    while walk.len() < cfg.walk_length {
        let cur = *walk.last().unwrap();
        let neighbors = g.neighbors(cur);
        if neighbors.is_empty() {
            break;
        }
        let choice = if walk.len() == 1 {
            match tables {
                Some(t) => t.first_step_table(cur).expect("non-isolated start").sample(rng),
                None => AliasTable::new(&vec![1.0; neighbors.len()])
                    .expect("uniform weights")
                    .sample(rng),
            }
        } else {
            let prev = walk[walk.len() - 2];
            match tables {
                Some(t) => t.edge_table(prev, cur).expect("edge on walk").sample(rng),
                None => {
                    let weights =
                        transition_weights(g, prev, cur, cfg.return_param, cfg.inout_param);
                    AliasTable::new(&weights).expect("neighbor weights").sample(rng)
                }
            }
        };
        walk.push(neighbors[choice]);
    }
    walk
}
