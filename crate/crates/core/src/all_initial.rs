//! Solves the average-cost problem for every admissible initial state
//! at once, by repeatedly extracting the graph's minimum-mean cycles
//! and eliminating everything that can reach them.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::mmc::{first_simple_cycle, karp_dp_edges, min_mean, reconstruct_path};
use crate::model::{ConstraintSet, ProblemInstance, SbcnModel, StageCost};
use crate::ostg::{build_from_seeds, Ostg, OstgError};
use crate::policy::{assign_path_gains, FeedbackLaw};
use crate::scc::tarjan_scc;

/// Solution entry for one initial state. The law is shared per
/// iteration and referenced by id; the transient is specific to the
/// state (its reverse-BFS tree path into the cycle).
#[derive(Clone, Debug, PartialEq)]
pub struct StateSolution {
    pub mu_star: f64,
    pub law_id: usize,
    pub transient: Vec<u32>,
    pub cycle: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AllStatesSolution {
    /// One merged feedback law per elimination iteration.
    pub laws: Vec<FeedbackLaw>,
    pub per_state: BTreeMap<u32, StateSolution>,
    /// Minimum-mean cycles extracted at each iteration.
    pub iteration_cycles: Vec<Vec<Vec<u32>>>,
    pub iterations: usize,
}

/// BFS seeded with every admissible state in increasing index order,
/// then dead-end pruned; covers all of Cx minus pruned states.
pub fn build_full_graph(
    model: &SbcnModel,
    constraints: &ConstraintSet,
    cost: &StageCost,
) -> Result<Ostg, OstgError> {
    let n = model.state_count();
    let seeds: Vec<u32> = match constraints.cx() {
        Some(cx) => cx.iter().collect(),
        None => (1..=n).collect(),
    };
    let first = *seeds.first().ok_or(OstgError::AllStatesPruned)?;
    let instance =
        ProblemInstance::new(model.clone(), constraints.clone(), cost.clone(), first);
    build_from_seeds(&instance, seeds)
}

/// The elimination loop: per iteration, find the minimum-mean cycle of
/// every strongly connected component, keep all cycles attaining the
/// global minimum, collect the set S of vertices that reach them by a
/// reverse BFS (whose tree paths become the transients), assign the law
/// and the mean to each state of S, then delete S and repeat.
pub fn solve_all(
    model: &SbcnModel,
    constraints: &ConstraintSet,
    cost: &StageCost,
) -> Result<AllStatesSolution, OstgError> {
    let g = build_full_graph(model, constraints, cost)?;
    let n = g.vertex_count();

    // reverse adjacency with predecessors in ascending state order
    let mut rev: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&p| g.state_of(p));
        for &p in &order {
            for e in g.out_edges(p) {
                rev[g.position_of(e.to).unwrap()].push(p);
            }
        }
    }

    let mut alive = alloc::vec![true; n];
    let mut remaining = n;
    let mut laws = Vec::new();
    let mut per_state = BTreeMap::new();
    let mut iteration_cycles = Vec::new();

    while remaining > 0 {
        // SCCs of the surviving subgraph
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|p| {
                if !alive[p] {
                    return Vec::new();
                }
                g.out_edges(p)
                    .iter()
                    .map(|e| g.position_of(e.to).unwrap())
                    .filter(|&q| alive[q])
                    .collect()
            })
            .collect();
        let comps = tarjan_scc(&adj);

        // per-SCC minimum-mean cycle
        let mut candidates: Vec<(f64, Vec<u32>)> = Vec::new();
        for comp in &comps {
            if !alive[comp[0]] {
                continue;
            }
            let has_cycle = comp.len() > 1
                || g.out_edges(comp[0]).iter().any(|e| g.position_of(e.to) == Some(comp[0]));
            if !has_cycle {
                continue;
            }
            let mut members: Vec<usize> = comp.clone();
            members.sort_by_key(|&p| g.state_of(p));
            let local: BTreeMap<usize, usize> =
                members.iter().enumerate().map(|(i, &p)| (p, i)).collect();
            let state_ids: Vec<u32> = members.iter().map(|&p| g.state_of(p)).collect();
            let mut edges: Vec<(usize, usize, f64)> = Vec::new();
            for (i, &p) in members.iter().enumerate() {
                for e in g.out_edges(p) {
                    if let Some(&j) = local.get(&g.position_of(e.to).unwrap()) {
                        edges.push((i, j, e.weight));
                    }
                }
            }
            let table = karp_dp_edges(members.len(), &edges, 0);
            let (mu, v_loc, _) =
                min_mean(&table, &state_ids).expect("SCC with a cycle must yield an MMC");
            let local_path = reconstruct_path(&table, v_loc);
            let path: Vec<u32> = local_path.iter().map(|&i| state_ids[i]).collect();
            let (alpha, beta) = first_simple_cycle(&path);
            let mut cycle = path[alpha..=beta].to_vec();
            cycle.push(path[alpha]);
            candidates.push((mu, cycle));
        }
        debug_assert!(!candidates.is_empty(), "pruned graph lost all its cycles");

        let global_min = candidates
            .iter()
            .map(|&(mu, _)| mu)
            .fold(f64::INFINITY, f64::min);
        let mut chosen: Vec<Vec<u32>> = candidates
            .into_iter()
            .filter(|&(mu, _)| mu == global_min)
            .map(|(_, c)| c)
            .collect();
        chosen.sort();

        // reverse multi-source BFS: S = everything reaching a chosen
        // cycle; next_hop records the tree edge toward the cycle
        let mut in_s = alloc::vec![false; n];
        let mut next_hop: Vec<Option<usize>> = alloc::vec![None; n];
        let mut queue: Vec<usize> = Vec::new();
        let mut sources: Vec<usize> = chosen
            .iter()
            .flat_map(|c| c[..c.len() - 1].iter())
            .map(|&s| g.position_of(s).unwrap())
            .collect();
        sources.sort_by_key(|&p| g.state_of(p));
        for p in sources {
            if !in_s[p] {
                in_s[p] = true;
                queue.push(p);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let q = queue[head];
            head += 1;
            for &p in &rev[q] {
                if alive[p] && !in_s[p] {
                    in_s[p] = true;
                    next_hop[p] = Some(q);
                    queue.push(p);
                }
            }
        }

        // one merged law for the whole iteration
        let mut law = FeedbackLaw {
            ku: BTreeMap::new(),
            ksigma: BTreeMap::new(),
            free_states: Vec::new(),
            mu_star: global_min,
            cycle: chosen[0].clone(),
            transient: Vec::new(),
        };
        for cycle in &chosen {
            assign_path_gains(&g, cycle, &mut law);
        }
        for p in 0..n {
            if let Some(q) = next_hop[p] {
                let e = g.edge(g.state_of(p), g.state_of(q)).unwrap();
                law.ku.insert(e.from, e.input);
                law.ksigma.insert(e.from, e.subsystem);
            }
        }
        let law_id = laws.len();

        // per-state transients and cycle attribution
        let mut cycle_of: BTreeMap<u32, usize> = BTreeMap::new();
        for (ci, cycle) in chosen.iter().enumerate() {
            for &s in &cycle[..cycle.len() - 1] {
                cycle_of.insert(s, ci);
            }
        }
        for p in 0..n {
            if !in_s[p] {
                continue;
            }
            let mut transient = alloc::vec![g.state_of(p)];
            let mut cur = p;
            while let Some(q) = next_hop[cur] {
                transient.push(g.state_of(q));
                cur = q;
            }
            let cycle = chosen[cycle_of[&g.state_of(cur)]].clone();
            per_state.insert(
                g.state_of(p),
                StateSolution { mu_star: global_min, law_id, transient, cycle },
            );
        }

        laws.push(law);
        iteration_cycles.push(chosen);
        for p in 0..n {
            if in_s[p] {
                alive[p] = false;
                remaining -= 1;
            }
        }
    }

    let iterations = laws.len();
    Ok(AllStatesSolution { laws, per_state, iteration_cycles, iterations })
}
