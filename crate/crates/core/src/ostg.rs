//! The optimal state transition graph (OSTG): vertices are the states
//! reachable from x0 under the constraints, and each edge carries the
//! cheapest admissible (input, subsystem) action realizing it.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::model::ProblemInstance;

#[derive(Clone, Debug, PartialEq)]
pub enum OstgError {
    /// The queried state is outside the admissible set Cx.
    StateNotAdmissible(u32),
    /// Dead-end pruning removed x0: no infinite admissible trajectory
    /// starts there.
    NoInfiniteTrajectory(u32),
    /// Every admissible state was pruned (all-initial-states variant).
    AllStatesPruned,
}

impl fmt::Display for OstgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OstgError::StateNotAdmissible(x) => write!(f, "state {} is not admissible", x),
            OstgError::NoInfiniteTrajectory(x0) => {
                write!(f, "x0 = {} admits no infinite admissible trajectory", x0)
            }
            OstgError::AllStatesPruned => write!(f, "every admissible state is a dead end"),
        }
    }
}

/// A weighted edge between state indices, carrying the optimal action.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub input: u32,
    pub subsystem: u32,
    pub weight: f64,
}

/// The finished graph. `vertices` keeps BFS discovery order; per-vertex
/// edge lists are sorted by successor state index. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Ostg {
    x0: u32,
    vertices: Vec<u32>,
    position: BTreeMap<u32, usize>,
    out: Vec<Vec<Edge>>,
    pruned: Vec<u32>,
    max_actions_per_vertex: u32,
}

impl Ostg {
    pub fn x0(&self) -> u32 {
        self.x0
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(|e| e.len()).sum()
    }

    /// Position of a state in the vertex list, if present.
    pub fn position_of(&self, state: u32) -> Option<usize> {
        self.position.get(&state).copied()
    }

    pub fn state_of(&self, pos: usize) -> u32 {
        self.vertices[pos]
    }

    pub fn out_edges(&self, pos: usize) -> &[Edge] {
        &self.out[pos]
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.out.iter().flatten()
    }

    /// The edge between two states, if one exists.
    pub fn edge(&self, from: u32, to: u32) -> Option<&Edge> {
        let pos = self.position_of(from)?;
        self.out[pos].iter().find(|e| e.to == to)
    }

    /// States removed by dead-end pruning (diagnostic).
    pub fn pruned(&self) -> &[u32] {
        &self.pruned
    }

    /// Largest number of actions enumerated at any single vertex during
    /// construction; bounded by zM.
    pub fn max_actions_per_vertex(&self) -> u32 {
        self.max_actions_per_vertex
    }

    /// Predecessor positions per vertex position.
    pub fn reverse_adjacency(&self) -> Vec<Vec<usize>> {
        let mut rev = alloc::vec![Vec::new(); self.vertices.len()];
        for (from_pos, edges) in self.out.iter().enumerate() {
            for e in edges {
                rev[self.position[&e.to]].push(from_pos);
            }
        }
        rev
    }

    /// Builds a graph directly from an edge list (test harnesses and
    /// oracles). The caller is responsible for pruning.
    pub fn from_parts(x0: u32, vertices: Vec<u32>, edges: Vec<Edge>) -> Ostg {
        let mut position = BTreeMap::new();
        for (pos, &v) in vertices.iter().enumerate() {
            let prev = position.insert(v, pos);
            assert!(prev.is_none(), "duplicate vertex {}", v);
        }
        assert!(position.contains_key(&x0), "x0 not among vertices");
        let mut out = alloc::vec![Vec::new(); vertices.len()];
        for e in edges {
            let from_pos = position[&e.from];
            assert!(position.contains_key(&e.to), "edge target {} not a vertex", e.to);
            out[from_pos].push(e);
        }
        for list in &mut out {
            list.sort_by_key(|e| e.to);
        }
        Ostg { x0, vertices, position, out, pruned: Vec::new(), max_actions_per_vertex: 0 }
    }
}

/// One-step reachable set of `x` under the constraints, ascending.
pub fn successors(instance: &ProblemInstance, x: u32) -> Result<Vec<u32>, OstgError> {
    if !instance.constraints.allows_state(x) {
        return Err(OstgError::StateNotAdmissible(x));
    }
    let mut set = Vec::new();
    for_each_action(instance, x, |k, l| {
        let y = instance.model.step(x, k, l);
        if instance.constraints.allows_state(y) && !set.contains(&y) {
            set.push(y);
        }
    });
    set.sort_unstable();
    Ok(set)
}

/// All admissible (input, subsystem) pairs steering `i` to `j` in one
/// step, in ascending (subsystem, input) order.
pub fn admissible_actions(instance: &ProblemInstance, i: u32, j: u32) -> Vec<(u32, u32)> {
    let mut actions = Vec::new();
    if !instance.constraints.allows_state(i) || !instance.constraints.allows_state(j) {
        return actions;
    }
    for_each_action(instance, i, |k, l| {
        if instance.model.step(i, k, l) == j {
            actions.push((k, l));
        }
    });
    actions
}

/// The cheapest admissible action from `i` to `j` and its cost; ties go
/// to the lexicographically smallest (subsystem, input) pair.
pub fn optimal_action(instance: &ProblemInstance, i: u32, j: u32) -> Option<((u32, u32), f64)> {
    let mut best: Option<((u32, u32), f64)> = None;
    for (k, l) in admissible_actions(instance, i, j) {
        let w = instance.cost.g(i, k, l);
        // enumeration order is ascending (l, k), so strict improvement
        // implements the tie-break
        if best.as_ref().map_or(true, |&(_, bw)| w < bw) {
            best = Some(((k, l), w));
        }
    }
    best
}

// Visits every admissible action (k, l) at state x in ascending
// (subsystem, input) order.
fn for_each_action(instance: &ProblemInstance, x: u32, mut visit: impl FnMut(u32, u32)) {
    let m = instance.model.input_count();
    let z = instance.model.subsystem_count();
    let cu = instance.constraints.cu(x);
    let csigma = instance.constraints.csigma(x);
    let subs: Vec<u32> = match csigma {
        Some(s) => s.to_vec(),
        None => (1..=z).collect(),
    };
    let inputs: Vec<u32> = match cu {
        Some(s) => s.to_vec(),
        None => (1..=m).collect(),
    };
    for &l in &subs {
        for &k in &inputs {
            visit(k, l);
        }
    }
}

/// FIFO-BFS construction from x0, followed by iterative dead-end
/// pruning so that every surviving vertex lies on an infinite walk.
pub fn build_ostg(instance: &ProblemInstance) -> Result<Ostg, OstgError> {
    match build_from_seeds(instance, core::iter::once(instance.x0)) {
        Err(OstgError::AllStatesPruned) => Err(OstgError::NoInfiniteTrajectory(instance.x0)),
        Err(e) => Err(e),
        Ok(graph) if graph.position_of(instance.x0).is_none() => {
            Err(OstgError::NoInfiniteTrajectory(instance.x0))
        }
        Ok(graph) => Ok(graph),
    }
}

/// BFS seeded with every given state in order (skipping already visited
/// seeds), then pruned. Used directly by the all-initial-states solver.
pub(crate) fn build_from_seeds(
    instance: &ProblemInstance,
    seeds: impl IntoIterator<Item = u32>,
) -> Result<Ostg, OstgError> {
    let mut vertices: Vec<u32> = Vec::new();
    let mut position: BTreeMap<u32, usize> = BTreeMap::new();
    let mut out: Vec<Vec<Edge>> = Vec::new();
    let mut queue: Vec<u32> = Vec::new();
    let mut head = 0usize;
    let mut max_actions = 0u32;

    for seed in seeds {
        if !instance.constraints.allows_state(seed) {
            return Err(OstgError::StateNotAdmissible(seed));
        }
        if position.contains_key(&seed) {
            continue;
        }
        position.insert(seed, vertices.len());
        vertices.push(seed);
        out.push(Vec::new());
        queue.push(seed);

        while head < queue.len() {
            let x = queue[head];
            head += 1;
            // Line-16 style post-pass: collect all admissible actions
            // per successor first, reduce to the argmin after.
            let mut collected: BTreeMap<u32, ((u32, u32), f64)> = BTreeMap::new();
            let mut count = 0u32;
            for_each_action(instance, x, |k, l| {
                count += 1;
                let y = instance.model.step(x, k, l);
                if !instance.constraints.allows_state(y) {
                    return;
                }
                let w = instance.cost.g(x, k, l);
                match collected.get_mut(&y) {
                    Some(best) => {
                        if w < best.1 {
                            *best = ((k, l), w);
                        }
                    }
                    None => {
                        collected.insert(y, ((k, l), w));
                    }
                }
            });
            max_actions = max_actions.max(count);
            let x_pos = position[&x];
            for (y, ((k, l), w)) in collected {
                if !position.contains_key(&y) {
                    position.insert(y, vertices.len());
                    vertices.push(y);
                    out.push(Vec::new());
                    queue.push(y);
                }
                out[x_pos].push(Edge { from: x, to: y, input: k, subsystem: l, weight: w });
            }
        }
    }

    // Iterative dead-end pruning: repeatedly drop out-degree-0 vertices
    // and their incoming edges.
    let n = vertices.len();
    let mut outdeg: Vec<usize> = out.iter().map(|e| e.len()).collect();
    let mut rev: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (from_pos, edges) in out.iter().enumerate() {
        for e in edges {
            rev[position[&e.to]].push(from_pos);
        }
    }
    let mut dead = alloc::vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&p| outdeg[p] == 0).collect();
    while let Some(p) = stack.pop() {
        if dead[p] {
            continue;
        }
        dead[p] = true;
        for &q in &rev[p] {
            if dead[q] {
                continue;
            }
            outdeg[q] -= out[q].iter().filter(|e| position[&e.to] == p).count();
            if outdeg[q] == 0 {
                stack.push(q);
            }
        }
    }

    if dead.iter().all(|&d| d) {
        return Err(OstgError::AllStatesPruned);
    }
    if !dead.iter().any(|&d| d) {
        return Ok(Ostg {
            x0: vertices[0],
            vertices,
            position,
            out,
            pruned: Vec::new(),
            max_actions_per_vertex: max_actions,
        });
    }

    let pruned: Vec<u32> = (0..n).filter(|&p| dead[p]).map(|p| vertices[p]).collect();
    let kept: Vec<u32> = (0..n).filter(|&p| !dead[p]).map(|p| vertices[p]).collect();
    let mut new_position = BTreeMap::new();
    for (pos, &v) in kept.iter().enumerate() {
        new_position.insert(v, pos);
    }
    let mut new_out: Vec<Vec<Edge>> = alloc::vec![Vec::new(); kept.len()];
    for (from_pos, edges) in out.iter().enumerate() {
        if dead[from_pos] {
            continue;
        }
        let np = new_position[&vertices[from_pos]];
        for e in edges {
            if !dead[position[&e.to]] {
                new_out[np].push(e.clone());
            }
        }
    }
    let x0 = kept[0];
    Ok(Ostg {
        x0,
        vertices: kept,
        position: new_position,
        out: new_out,
        pruned,
        max_actions_per_vertex: max_actions,
    })
}
