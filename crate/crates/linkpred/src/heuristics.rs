//! Classical link-prediction scores: Adamic-Adar, Jaccard coefficient,
//! preferential attachment. Pure functions over an immutable graph.

use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicKind {
    AdamicAdar,
    Jaccard,
    PreferentialAttachment,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 3] = [
        HeuristicKind::AdamicAdar,
        HeuristicKind::Jaccard,
        HeuristicKind::PreferentialAttachment,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            HeuristicKind::AdamicAdar => "aa",
            HeuristicKind::Jaccard => "jc",
            HeuristicKind::PreferentialAttachment => "pa",
        }
    }
}

impl FromStr for HeuristicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aa" | "adamic-adar" | "adamic_adar" => Ok(HeuristicKind::AdamicAdar),
            "jc" | "jaccard" => Ok(HeuristicKind::Jaccard),
            "pa" | "preferential-attachment" | "preferential_attachment" => {
                Ok(HeuristicKind::PreferentialAttachment)
            }
            other => Err(Error::Config(format!("unknown heuristic {other:?}"))),
        }
    }
}

/// Similarity score for one node pair.
///
/// Adamic-Adar sums 1/ln(degree) over common neighbors; a common neighbor
/// of degree < 2 would make the log non-positive and is guarded to
/// contribute 0 (it cannot occur in a simple graph, where a shared
/// neighbor has degree >= 2). Jaccard with an empty neighborhood union
/// scores 0 by convention.
pub fn score(g: &Graph, kind: HeuristicKind, u: u32, v: u32) -> Result<f64> {
    let n = g.node_count();
    for node in [u, v] {
        if node as usize >= n {
            return Err(Error::IndexOutOfRange { index: node as usize, count: n });
        }
    }
    if u == v {
        return Err(Error::Data(format!("heuristic score of a self-pair ({u}, {u})")));
    }
    let (nu, nv) = (g.neighbors(u), g.neighbors(v));
    Ok(match kind {
        HeuristicKind::AdamicAdar => {
            common_neighbors(nu, nv)
                .map(|x| {
                    let k = g.neighbors(x).len();
                    if k < 2 {
                        0.0
                    } else {
                        1.0 / (k as f64).ln()
                    }
                })
                .sum()
        }
        HeuristicKind::Jaccard => {
            let common = common_neighbors(nu, nv).count();
            let union = nu.len() + nv.len() - common;
            if union == 0 {
                0.0
            } else {
                common as f64 / union as f64
            }
        }
        HeuristicKind::PreferentialAttachment => nu.len() as f64 * nv.len() as f64,
    })
}

/// Score a list of pairs, order preserved. Fans out across pairs; errors
/// carry the offending pair.
pub fn score_all(g: &Graph, kind: HeuristicKind, pairs: &[(u32, u32)]) -> Result<Vec<f64>> {
    pairs
        .par_iter()
        .map(|&(u, v)| {
            score(g, kind, u, v).map_err(|e| Error::Data(format!("pair ({u}, {v}): {e}")))
        })
        .collect()
}

fn common_neighbors<'a>(a: &'a [u32], b: &'a [u32]) -> impl Iterator<Item = u32> + 'a {
    // both lists are sorted
    let mut i = 0;
    let mut j = 0;
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let x = a[i];
                    i += 1;
                    j += 1;
                    return Some(x);
                }
            }
        }
        None
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;
    use std::collections::HashSet;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn hand_evaluated_path_scores() {
        let g = path3();
        // Both endpoints' neighborhoods are exactly {1}.
        assert!((score(&g, HeuristicKind::Jaccard, 0, 2).unwrap() - 1.0).abs() < 1e-12);
        let aa = score(&g, HeuristicKind::AdamicAdar, 0, 2).unwrap();
        assert!((aa - 1.0 / 2f64.ln()).abs() < 1e-12, "AA gave {aa}");
        assert!((score(&g, HeuristicKind::PreferentialAttachment, 0, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_neighborhoods_score_zero() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        assert_eq!(score(&g, HeuristicKind::Jaccard, 0, 5).unwrap(), 0.0);
        assert_eq!(score(&g, HeuristicKind::AdamicAdar, 0, 5).unwrap(), 0.0);
    }

    #[test]
    fn star_degree_product() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(score(&g, HeuristicKind::PreferentialAttachment, 0, 1).unwrap(), 4.0);
    }

    #[test]
    fn isolated_endpoints_jaccard_zero() {
        let g = Graph::from_edges(3, &[(1, 2)]).unwrap();
        assert_eq!(score(&g, HeuristicKind::Jaccard, 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn self_pair_and_bad_index_are_errors() {
        let g = path3();
        assert!(score(&g, HeuristicKind::Jaccard, 1, 1).is_err());
        assert!(score(&g, HeuristicKind::Jaccard, 0, 7).is_err());
    }

    #[test]
    fn score_all_preserves_order_and_matches_single_calls() {
        let g = oracles::random_connected_graph(3, 40, 2.0);
        let pairs: Vec<(u32, u32)> =
            (0..40u32).flat_map(|u| ((u + 1)..40).map(move |v| (u, v))).collect();
        for kind in HeuristicKind::ALL {
            let bulk = score_all(&g, kind, &pairs).unwrap();
            for (i, &(u, v)) in pairs.iter().enumerate() {
                assert_eq!(bulk[i], score(&g, kind, u, v).unwrap());
            }
        }
        assert!(score_all(&g, HeuristicKind::Jaccard, &[]).unwrap().is_empty());
    }

    #[test]
    fn symmetry_and_ranges_on_random_graphs() {
        for seed in 0..5 {
            let g = oracles::random_graph(seed, 60, 0.08);
            for u in 0..60u32 {
                for v in (u + 1)..60u32 {
                    for kind in HeuristicKind::ALL {
                        let a = score(&g, kind, u, v).unwrap();
                        let b = score(&g, kind, v, u).unwrap();
                        assert_eq!(a, b, "{kind:?} asymmetric on ({u},{v})");
                        assert!(a >= 0.0);
                        if kind == HeuristicKind::Jaccard {
                            assert!(a <= 1.0 + 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn jaccard_is_one_iff_neighborhoods_equal_and_nonempty() {
        for seed in 20..25 {
            let g = oracles::random_graph(seed, 30, 0.15);
            for u in 0..30u32 {
                for v in (u + 1)..30u32 {
                    let jc = score(&g, HeuristicKind::Jaccard, u, v).unwrap();
                    let (nu, nv): (HashSet<u32>, HashSet<u32>) = (
                        g.neighbors(u).iter().copied().collect(),
                        g.neighbors(v).iter().copied().collect(),
                    );
                    let equal_nonempty = nu == nv && !nu.is_empty();
                    assert_eq!((jc - 1.0).abs() < 1e-12, equal_nonempty, "pair ({u},{v})");
                }
            }
        }
    }

    #[test]
    fn scores_agree_with_set_arithmetic_oracle() {
        for seed in 30..33 {
            let g = oracles::random_graph(seed, 50, 0.1);
            for u in 0..50u32 {
                for v in (u + 1)..50u32 {
                    let (nu, nv): (HashSet<u32>, HashSet<u32>) = (
                        g.neighbors(u).iter().copied().collect(),
                        g.neighbors(v).iter().copied().collect(),
                    );
                    let inter: Vec<u32> = nu.intersection(&nv).copied().collect();
                    let union = nu.union(&nv).count();

                    let want_aa: f64 = inter
                        .iter()
                        .map(|&x| {
                            let k = g.degree(x).unwrap();
                            if k < 2 { 0.0 } else { 1.0 / (k as f64).ln() }
                        })
                        .sum();
                    let want_jc =
                        if union == 0 { 0.0 } else { inter.len() as f64 / union as f64 };
                    let want_pa = (nu.len() * nv.len()) as f64;

                    assert!((score(&g, HeuristicKind::AdamicAdar, u, v).unwrap() - want_aa).abs() < 1e-12);
                    assert!((score(&g, HeuristicKind::Jaccard, u, v).unwrap() - want_jc).abs() < 1e-12);
                    assert!((score(&g, HeuristicKind::PreferentialAttachment, u, v).unwrap() - want_pa).abs() < 1e-12);
                }
            }
        }
    }
}
