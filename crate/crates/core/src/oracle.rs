//! Brute-force reference routines for certifying the solver on small
//! graphs: exhaustive simple-cycle enumeration and a naive
//! minimum-mean-cycle search. Deliberately slow and simple.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::ostg::Ostg;

pub const MAX_ORACLE_VERTICES: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    TooManyVertices(usize),
    NoCycles,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooManyVertices(n) => {
                write!(f, "{} vertices exceed the oracle guard of {}", n, MAX_ORACLE_VERTICES)
            }
            OracleError::NoCycles => write!(f, "graph has no cycles"),
        }
    }
}

/// A simple cycle in canonical form: the vertex sequence is rotated so
/// the smallest state index leads (and closes the cycle).
#[derive(Clone, Debug, PartialEq)]
pub struct Cycle {
    pub vertices: Vec<u32>,
    pub weight: f64,
    pub mean: f64,
}

fn canonical_rotation(cycle_body: &[u32]) -> Vec<u32> {
    // cycle_body has no closing repeat
    let min_pos = cycle_body
        .iter()
        .enumerate()
        .min_by_key(|&(_, &v)| v)
        .map(|(i, _)| i)
        .unwrap();
    let mut out = Vec::with_capacity(cycle_body.len() + 1);
    out.extend_from_slice(&cycle_body[min_pos..]);
    out.extend_from_slice(&cycle_body[..min_pos]);
    out.push(out[0]);
    out
}

fn cycle_from_body(ostg: &Ostg, body: &[u32]) -> Cycle {
    let vertices = canonical_rotation(body);
    let mut weight = 0.0;
    for pair in vertices.windows(2) {
        weight += ostg.edge(pair[0], pair[1]).unwrap().weight;
    }
    Cycle { weight, mean: weight / body.len() as f64, vertices }
}

/// Every simple cycle, found by a rooted DFS: for each root (in
/// position order) only positions >= root may participate, so each
/// cycle is discovered exactly once at its minimum position. Output is
/// sorted by canonical vertex sequence.
pub fn enumerate_simple_cycles(ostg: &Ostg) -> Result<Vec<Cycle>, OracleError> {
    let n = ostg.vertex_count();
    if n > MAX_ORACLE_VERTICES {
        return Err(OracleError::TooManyVertices(n));
    }
    let mut cycles = Vec::new();
    let mut on_path = alloc::vec![false; n];
    let mut path: Vec<usize> = Vec::new();
    for root in 0..n {
        dfs_cycles(ostg, root, root, &mut on_path, &mut path, &mut cycles);
    }
    let mut out: Vec<Cycle> = cycles
        .iter()
        .map(|body| {
            let states: Vec<u32> = body.iter().map(|&p| ostg.state_of(p)).collect();
            cycle_from_body(ostg, &states)
        })
        .collect();
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(out)
}

fn dfs_cycles(
    ostg: &Ostg,
    root: usize,
    v: usize,
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    cycles: &mut Vec<Vec<usize>>,
) {
    on_path[v] = true;
    path.push(v);
    for e in ostg.out_edges(v) {
        let w = ostg.position_of(e.to).unwrap();
        if w == root {
            cycles.push(path.clone());
        } else if w > root && !on_path[w] {
            dfs_cycles(ostg, root, w, on_path, path, cycles);
        }
    }
    path.pop();
    on_path[v] = false;
}

/// Independent second strategy: unrooted DFS from every start vertex,
/// deduplicated by canonical form. Used only to cross-check the rooted
/// enumeration's completeness.
pub fn enumerate_simple_cycles_unrooted(ostg: &Ostg) -> Result<Vec<Cycle>, OracleError> {
    let n = ostg.vertex_count();
    if n > MAX_ORACLE_VERTICES {
        return Err(OracleError::TooManyVertices(n));
    }
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut on_path = alloc::vec![false; n];
    let mut path: Vec<usize> = Vec::new();
    for start in 0..n {
        dfs_all(ostg, start, start, &mut on_path, &mut path, &mut seen);
    }
    Ok(seen
        .into_iter()
        .map(|canon| {
            let body = &canon[..canon.len() - 1];
            cycle_from_body(ostg, body)
        })
        .collect())
}

fn dfs_all(
    ostg: &Ostg,
    start: usize,
    v: usize,
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    seen: &mut BTreeSet<Vec<u32>>,
) {
    on_path[v] = true;
    path.push(v);
    for e in ostg.out_edges(v) {
        let w = ostg.position_of(e.to).unwrap();
        if w == start {
            let states: Vec<u32> = path.iter().map(|&p| ostg.state_of(p)).collect();
            seen.insert(canonical_rotation(&states));
        } else if !on_path[w] {
            dfs_all(ostg, start, w, on_path, path, seen);
        }
    }
    path.pop();
    on_path[v] = false;
}

/// The exhaustive minimum-mean cycle; ties go to the lexicographically
/// smallest canonical cycle (which the sorted enumeration yields
/// first).
pub fn brute_min_mean(ostg: &Ostg) -> Result<(f64, Cycle), OracleError> {
    let cycles = enumerate_simple_cycles(ostg)?;
    let mut best: Option<Cycle> = None;
    for c in cycles {
        if best.as_ref().map_or(true, |b| c.mean < b.mean) {
            best = Some(c);
        }
    }
    match best {
        Some(c) => Ok((c.mean, c)),
        None => Err(OracleError::NoCycles),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmc;
    use crate::ostg::{build_ostg, Edge};
    use crate::testutil;
    use alloc::vec;

    #[test]
    fn example1_known_cycles() {
        let g = build_ostg(&testutil::example1_instance()).unwrap();
        let cycles = enumerate_simple_cycles(&g).unwrap();
        let find = |seq: &[u32]| cycles.iter().find(|c| c.vertices == seq).unwrap();
        assert!((find(&[2, 5, 7, 8, 2]).mean - 3.5).abs() < 1e-9);
        assert!((find(&[3, 3]).mean - 7.0).abs() < 1e-9);
        assert!((find(&[3, 8, 6, 5, 3]).mean - 5.75).abs() < 1e-9);
    }

    #[test]
    fn acyclic_graph_has_no_cycles() {
        let g = Ostg::from_parts(
            1,
            vec![1, 2, 3],
            vec![
                Edge { from: 1, to: 2, input: 1, subsystem: 1, weight: 1.0 },
                Edge { from: 2, to: 3, input: 1, subsystem: 1, weight: 1.0 },
            ],
        );
        assert!(enumerate_simple_cycles(&g).unwrap().is_empty());
        assert_eq!(brute_min_mean(&g), Err(OracleError::NoCycles));
    }

    #[test]
    fn complete_digraph_on_three_vertices() {
        let mut edges = Vec::new();
        for a in 1..=3u32 {
            for b in 1..=3u32 {
                if a != b {
                    edges.push(Edge { from: a, to: b, input: 1, subsystem: 1, weight: 1.0 });
                }
            }
        }
        let g = Ostg::from_parts(1, vec![1, 2, 3], edges);
        let cycles = enumerate_simple_cycles(&g).unwrap();
        assert_eq!(cycles.len(), 5);
        let unrooted = enumerate_simple_cycles_unrooted(&g).unwrap();
        assert_eq!(unrooted.len(), 5);
    }

    #[test]
    fn single_self_loop() {
        let g = Ostg::from_parts(
            4,
            vec![4],
            vec![Edge { from: 4, to: 4, input: 1, subsystem: 1, weight: 2.5 }],
        );
        let (mu, c) = brute_min_mean(&g).unwrap();
        assert_eq!(mu, 2.5);
        assert_eq!(c.vertices, vec![4, 4]);
    }

    #[test]
    fn example1_brute_matches_solver() {
        let g = build_ostg(&testutil::example1_instance()).unwrap();
        let (mu, c) = brute_min_mean(&g).unwrap();
        assert!((mu - 3.5).abs() < 1e-9);
        assert_eq!(c.vertices, vec![2, 5, 7, 8, 2]);
        let r = mmc::solve(&g).unwrap();
        assert!((r.mu_star - mu).abs() < 1e-9);
        // no cycle beats mu*: the periodic-policy lower bound
        for cyc in enumerate_simple_cycles(&g).unwrap() {
            assert!(cyc.mean >= mu - 1e-9);
        }
    }

    #[test]
    fn size_guard() {
        let vertices: Vec<u32> = (1..=17).collect();
        let edges: Vec<Edge> = (1..=17)
            .map(|v| Edge { from: v, to: v, input: 1, subsystem: 1, weight: 1.0 })
            .collect();
        let g = Ostg::from_parts(1, vertices, edges);
        assert_eq!(enumerate_simple_cycles(&g), Err(OracleError::TooManyVertices(17)));
    }

    #[test]
    fn enumeration_strategies_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        for _ in 0..40 {
            let n = rng.gen_range(1..=8u32);
            let vertices: Vec<u32> = (1..=n).collect();
            let mut edges = Vec::new();
            for v in 1..=n {
                let deg = rng.gen_range(1..=3usize);
                let mut targets: Vec<u32> =
                    (0..deg).map(|_| rng.gen_range(1..=n)).collect();
                targets.sort_unstable();
                targets.dedup();
                for t in targets {
                    edges.push(Edge {
                        from: v,
                        to: t,
                        input: 1,
                        subsystem: 1,
                        weight: rng.gen_range(-10.0..10.0),
                    });
                }
            }
            let g = Ostg::from_parts(1, vertices, edges);
            let rooted = enumerate_simple_cycles(&g).unwrap();
            let unrooted = enumerate_simple_cycles_unrooted(&g).unwrap();
            assert_eq!(rooted.len(), unrooted.len());
            let a: Vec<&Vec<u32>> = rooted.iter().map(|c| &c.vertices).collect();
            let b: Vec<&Vec<u32>> = unrooted.iter().map(|c| &c.vertices).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn brute_matches_karp_on_random_graphs() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        for _ in 0..60 {
            let g = testutil::random_reachable_graph(&mut rng, 10);
            let (mu_brute, _) = brute_min_mean(&g).unwrap();
            let r = mmc::solve(&g).unwrap();
            assert!(
                (r.mu_star - mu_brute).abs() < 1e-9,
                "karp {} vs brute {}",
                r.mu_star,
                mu_brute
            );
        }
    }
}
