//! Karp's minimum-mean-cycle dynamic program, |V|-edge path
//! reconstruction, first-simple-cycle extraction, and the general
//! path-decomposition routine.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::ostg::Ostg;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MmcError {
    /// All F[|V|][.] entries are unreachable; cannot happen on a pruned
    /// graph whose source reaches every vertex.
    NoCycleReachable,
}

impl fmt::Display for MmcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MmcError::NoCycleReachable => write!(f, "no cycle reachable from the source"),
        }
    }
}

/// The Karp DP table over vertex positions 0..V. `f[k][v]` is the
/// minimum weight of any k-edge path from the source to v, `None`
/// standing in for +infinity (a sentinel, never IEEE infinity, so
/// arithmetic on unreachable entries is impossible by construction).
/// `b[k][v]` is the backpointer to the minimizing predecessor.
#[derive(Clone, Debug, PartialEq)]
pub struct KarpTable {
    pub source: usize,
    pub f: Vec<Vec<Option<f64>>>,
    pub b: Vec<Vec<Option<usize>>>,
}

/// Fills the table level by level, one pass over all edges per level.
/// Edge endpoints are vertex positions; `state_ids` only matters later
/// for tie-breaking in [`min_mean`]. Argmin ties at a level go to the
/// smallest predecessor position (edges must be sorted accordingly by
/// the caller; [`karp_dp`] guarantees it).
pub fn karp_dp_edges(
    vertex_count: usize,
    edges: &[(usize, usize, f64)],
    source: usize,
) -> KarpTable {
    let v = vertex_count;
    let mut f: Vec<Vec<Option<f64>>> = alloc::vec![alloc::vec![None; v]; v + 1];
    let mut b: Vec<Vec<Option<usize>>> = alloc::vec![alloc::vec![None; v]; v + 1];
    f[0][source] = Some(0.0);
    for k in 0..v {
        for &(i, j, w) in edges {
            if let Some(fi) = f[k][i] {
                let cand = fi + w;
                let better = match f[k + 1][j] {
                    None => true,
                    Some(cur) => cand < cur,
                };
                if better {
                    f[k + 1][j] = Some(cand);
                    b[k + 1][j] = Some(i);
                }
            }
        }
    }
    KarpTable { source, f, b }
}

/// Karp table of a full OSTG, sourced at x0. Edges are relaxed in
/// ascending (predecessor state, successor state) order so argmin ties
/// resolve to the smallest predecessor state index.
pub fn karp_dp(ostg: &Ostg) -> KarpTable {
    let edges = sorted_position_edges(ostg);
    karp_dp_edges(ostg.vertex_count(), &edges, ostg.position_of(ostg.x0()).unwrap())
}

fn sorted_position_edges(ostg: &Ostg) -> Vec<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..ostg.vertex_count()).collect();
    order.sort_by_key(|&p| ostg.state_of(p));
    let mut edges = Vec::with_capacity(ostg.edge_count());
    for &p in &order {
        for e in ostg.out_edges(p) {
            edges.push((p, ostg.position_of(e.to).unwrap(), e.weight));
        }
    }
    edges
}

/// The minimum cycle mean: mu* = min over v of max over k of
/// (F[|V|][v] - F[k][v]) / (|V| - k), skipping unreachable entries.
/// Returns (mu*, v* position, k*). Ties go to the smallest state index,
/// then the smallest k. Each candidate is a single division of two
/// exact sums.
pub fn min_mean(table: &KarpTable, state_ids: &[u32]) -> Result<(f64, usize, usize), MmcError> {
    let v = state_ids.len();
    let mut order: Vec<usize> = (0..v).collect();
    order.sort_by_key(|&p| state_ids[p]);
    let mut best: Option<(f64, usize, usize)> = None;
    for &p in &order {
        let fv = match table.f[v][p] {
            Some(x) => x,
            None => continue,
        };
        let mut inner: Option<(f64, usize)> = None;
        for k in 0..v {
            if let Some(fk) = table.f[k][p] {
                let ratio = (fv - fk) / (v - k) as f64;
                // strict improvement keeps the smallest k on ties
                if inner.map_or(true, |(r, _)| ratio > r) {
                    inner = Some((ratio, k));
                }
            }
        }
        if let Some((mu, k)) = inner {
            if best.map_or(true, |(bm, _, _)| mu < bm) {
                best = Some((mu, p, k));
            }
        }
    }
    best.ok_or(MmcError::NoCycleReachable)
}

/// Walks backpointers from (|V|, v*) down to (0, source); the result
/// has |V| edges and starts at the source.
pub fn reconstruct_path(table: &KarpTable, v_star: usize) -> Vec<usize> {
    let v = table.f.len() - 1;
    let mut path = alloc::vec![0usize; v + 1];
    path[v] = v_star;
    for k in (1..=v).rev() {
        path[k - 1] = table.b[k][path[k]]
            .expect("broken backpointer chain: F finite but no predecessor");
    }
    debug_assert_eq!(path[0], table.source);
    path
}

/// A |V|-edge path from the source to v* of weight F[|V|][v*],
/// reconstructed forward instead of via backpointers. At each step
/// every successor that still completes a weight-optimal path is
/// valid; the walk takes the one reached by the largest (subsystem,
/// input) action, the same action order the graph uses for argmin
/// ties, so the choice commutes with input augmentation. Returns
/// vertex positions.
pub fn reconstruct_path_forward(ostg: &Ostg, table: &KarpTable, v_star: usize) -> Vec<usize> {
    let v = table.f.len() - 1;
    // g[r][p] = min weight of an r-edge path from p to v*
    let mut g: Vec<Vec<Option<f64>>> = alloc::vec![alloc::vec![None; v]; v + 1];
    g[0][v_star] = Some(0.0);
    for r in 1..=v {
        for p in 0..v {
            let mut best: Option<f64> = None;
            for e in ostg.out_edges(p) {
                let q = ostg.position_of(e.to).unwrap();
                if let Some(gq) = g[r - 1][q] {
                    let cand = e.weight + gq;
                    if best.map_or(true, |b| cand < b) {
                        best = Some(cand);
                    }
                }
            }
            g[r][p] = best;
        }
    }

    let total = table.f[v][v_star].expect("v* must be reachable in |V| edges");
    let mut path = alloc::vec![table.source];
    let mut walked = 0.0;
    for t in 0..v {
        let x = *path.last().unwrap();
        let mut choice: Option<((u32, u32), usize, f64)> = None;
        for e in ostg.out_edges(x) {
            let q = ostg.position_of(e.to).unwrap();
            if let Some(gq) = g[v - t - 1][q] {
                if (walked + e.weight + gq - total).abs() < 1e-9 {
                    let action = (e.subsystem, e.input);
                    if choice.map_or(true, |(a, _, _)| action > a) {
                        choice = Some((action, q, e.weight));
                    }
                }
            }
        }
        let (_, q, w) = choice.expect("an optimal continuation must exist at every step");
        walked += w;
        path.push(q);
    }
    debug_assert_eq!(*path.last().unwrap(), v_star);
    path
}

/// Locates the first simple cycle in a path: alpha is the first
/// occurrence of the first repeated vertex, beta the position just
/// before the repeat (so path[beta + 1] == path[alpha]).
pub fn first_simple_cycle<T: Copy + Ord>(path: &[T]) -> (usize, usize) {
    let mut first_occ: BTreeMap<T, usize> = BTreeMap::new();
    for (t, &v) in path.iter().enumerate() {
        if let Some(&a) = first_occ.get(&v) {
            return (a, t - 1);
        }
        first_occ.insert(v, t);
    }
    panic!("path has no repeated vertex");
}

/// Full solver output, in state indices.
#[derive(Clone, Debug, PartialEq)]
pub struct MmcResult {
    pub mu_star: f64,
    pub v_star: u32,
    pub k_star: usize,
    /// The |V|-edge path from x0 to v*.
    pub path: Vec<u32>,
    pub alpha: usize,
    pub beta: usize,
    /// path[alpha..=beta] closed by its first vertex; a simple
    /// minimum-mean cycle.
    pub cycle: Vec<u32>,
    /// path[0..=alpha]; a simple path from x0 into the cycle.
    pub transient: Vec<u32>,
}

/// Runs the three tasks end to end on a pruned OSTG.
pub fn solve(ostg: &Ostg) -> Result<MmcResult, MmcError> {
    let table = karp_dp(ostg);
    let (mu_star, v_pos, k_star) = min_mean(&table, ostg.vertices())?;
    let pos_path = reconstruct_path_forward(ostg, &table, v_pos);
    let path: Vec<u32> = pos_path.iter().map(|&p| ostg.state_of(p)).collect();
    let (alpha, beta) = first_simple_cycle(&path);
    let mut cycle: Vec<u32> = path[alpha..=beta].to_vec();
    cycle.push(path[alpha]);
    let transient = path[..=alpha].to_vec();
    Ok(MmcResult {
        mu_star,
        v_star: ostg.state_of(v_pos),
        k_star,
        path,
        alpha,
        beta,
        cycle,
        transient,
    })
}

/// Decomposes a walk into simple cycles plus a simple remainder path by
/// repeatedly cutting out the leftmost simple cycle (the earliest pair
/// of equal vertices with no repeat strictly inside), keeping the
/// cycle's closing vertex in the remainder. The edge multisets of the
/// cycles and the remainder exactly partition the walk's edges.
pub fn decompose_path(path: &[u32]) -> (Vec<Vec<u32>>, Vec<u32>) {
    let mut cycles = Vec::new();
    let mut rest: Vec<u32> = path.to_vec();
    loop {
        let mut first_occ: BTreeMap<u32, usize> = BTreeMap::new();
        let mut found = None;
        for (t, &v) in rest.iter().enumerate() {
            if let Some(&a) = first_occ.get(&v) {
                found = Some((a, t));
                break;
            }
            first_occ.insert(v, t);
        }
        match found {
            Some((a, t)) => {
                cycles.push(rest[a..=t].to_vec());
                rest.drain(a..t);
            }
            None => return (cycles, rest),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ostg::{build_ostg, Edge};
    use crate::testutil;
    use alloc::vec;

    fn example1_ostg() -> Ostg {
        build_ostg(&testutil::example1_instance()).unwrap()
    }

    #[test]
    fn karp_base_case_and_example_entry() {
        let g = example1_ostg();
        let table = karp_dp(&g);
        let src = g.position_of(1).unwrap();
        for p in 0..g.vertex_count() {
            if p == src {
                assert_eq!(table.f[0][p], Some(0.0));
            } else {
                assert_eq!(table.f[0][p], None);
            }
        }
        let p2 = g.position_of(2).unwrap();
        assert_eq!(table.f[7][p2], Some(29.0));
    }

    #[test]
    fn karp_self_loop() {
        let g = Ostg::from_parts(
            5,
            vec![5],
            vec![Edge { from: 5, to: 5, input: 1, subsystem: 1, weight: 5.0 }],
        );
        let table = karp_dp(&g);
        assert_eq!(table.f[0][0], Some(0.0));
        assert_eq!(table.f[1][0], Some(5.0));
        let (mu, v, k) = min_mean(&table, g.vertices()).unwrap();
        assert_eq!((mu, v, k), (5.0, 0, 0));
        let path = reconstruct_path(&table, v);
        assert_eq!(path, vec![0, 0]);
    }

    #[test]
    fn example1_full_solve() {
        let g = example1_ostg();
        let r = solve(&g).unwrap();
        assert!((r.mu_star - 3.5).abs() < 1e-9);
        assert_eq!(r.v_star, 2);
        assert_eq!(r.k_star, 3);
        assert_eq!(r.path, vec![1, 7, 8, 2, 5, 7, 8, 2]);
        assert_eq!((r.alpha, r.beta), (1, 4));
        assert_eq!(r.cycle, vec![7, 8, 2, 5, 7]);
        assert_eq!(r.transient, vec![1, 7]);
    }

    #[test]
    fn reconstructed_path_weight_matches_table() {
        let g = example1_ostg();
        let table = karp_dp(&g);
        let (_, v_pos, _) = min_mean(&table, g.vertices()).unwrap();
        let pos_path = reconstruct_path(&table, v_pos);
        assert_eq!(pos_path.len(), g.vertex_count() + 1);
        let mut total = 0.0;
        for w in pos_path.windows(2) {
            total += g.edge(g.state_of(w[0]), g.state_of(w[1])).unwrap().weight;
        }
        assert!((total - table.f[g.vertex_count()][v_pos].unwrap()).abs() < 1e-9);
    }

    #[test]
    fn cycle_mean_matches_mu() {
        let g = example1_ostg();
        let r = solve(&g).unwrap();
        let mut w = 0.0;
        for pair in r.cycle.windows(2) {
            w += g.edge(pair[0], pair[1]).unwrap().weight;
        }
        assert!((w / (r.cycle.len() - 1) as f64 - r.mu_star).abs() < 1e-9);
    }

    #[test]
    fn first_cycle_trivial_cases() {
        assert_eq!(first_simple_cycle(&[4u32, 4]), (0, 0));
        assert_eq!(first_simple_cycle(&[1u32, 2, 3, 2]), (1, 2));
    }

    #[test]
    fn decompose_reference_path() {
        let p: Vec<u32> = vec![1, 3, 8, 6, 5, 7, 8, 2, 5, 7, 7, 3, 8, 2];
        let (cycles, rest) = decompose_path(&p);
        assert_eq!(
            cycles,
            vec![vec![8, 6, 5, 7, 8], vec![7, 7], vec![3, 8, 2, 5, 7, 3]]
        );
        assert_eq!(rest, vec![1, 3, 8, 2]);
    }

    #[test]
    fn decompose_simple_path_is_identity() {
        let p: Vec<u32> = vec![1, 2, 3, 4];
        let (cycles, rest) = decompose_path(&p);
        assert!(cycles.is_empty());
        assert_eq!(rest, p);
    }

    /// Edge-multiset and weight identities on random walks.
    #[test]
    fn decompose_preserves_edge_multiset() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let n = rng.gen_range(2..=8u32);
            // random total map so every walk is well defined
            let succ: Vec<Vec<u32>> = (1..=n)
                .map(|_| (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=n)).collect())
                .collect();
            let mut x = rng.gen_range(1..=n);
            let mut walk = vec![x];
            for _ in 0..50 {
                let opts = &succ[(x - 1) as usize];
                x = opts[rng.gen_range(0..opts.len())];
                walk.push(x);
            }
            let (cycles, rest) = decompose_path(&walk);
            // remainder endpoints and simplicity
            assert_eq!(rest.first(), walk.first());
            assert_eq!(rest.last(), walk.last());
            let mut seen = rest.clone();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), rest.len(), "remainder not simple");
            // multiset of edges is preserved exactly
            let mut lhs: Vec<(u32, u32)> =
                walk.windows(2).map(|w| (w[0], w[1])).collect();
            let mut rhs: Vec<(u32, u32)> =
                rest.windows(2).map(|w| (w[0], w[1])).collect();
            for c in &cycles {
                // cycles are simple
                let mut cs = c[..c.len() - 1].to_vec();
                cs.sort_unstable();
                cs.dedup();
                assert_eq!(cs.len(), c.len() - 1, "extracted cycle not simple");
                assert_eq!(c.first(), c.last());
                rhs.extend(c.windows(2).map(|w| (w[0], w[1])));
            }
            lhs.sort_unstable();
            rhs.sort_unstable();
            assert_eq!(lhs, rhs);
        }
    }

    /// min_mean skips vertices the DP cannot complete |V| edges to.
    #[test]
    fn min_mean_skips_unreachable() {
        // 1 -> 2, 2 <-> 3: vertex 1 has no incoming edge, so
        // F[3][pos(1)] is unreachable and ignored.
        let g = Ostg::from_parts(
            1,
            vec![1, 2, 3],
            vec![
                Edge { from: 1, to: 2, input: 1, subsystem: 1, weight: 1.0 },
                Edge { from: 2, to: 3, input: 1, subsystem: 1, weight: 2.0 },
                Edge { from: 3, to: 2, input: 1, subsystem: 1, weight: 4.0 },
            ],
        );
        let r = solve(&g).unwrap();
        assert!((r.mu_star - 3.0).abs() < 1e-9);
        assert_eq!(r.cycle.len(), 3);
    }
}
