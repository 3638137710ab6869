//! Shared test fixtures: the two-subsystem reference example and
//! random model generators.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::expr::BooleanExpr;
use crate::logic::LogicalMatrix;
use crate::model::{ConstraintSet, ProblemInstance, SbcnModel, StageCost, DEFAULT_BIT_BUDGET};
use crate::parse::{parse_rules, RuleSet};

pub const EXAMPLE1_RULES: &str = "\
states: x1, x2, x3
inputs: u
subsystems: 2

[subsystem 1]
x1 = (u ^ x1) & (x2 <-> x3)
x2 = !x3
x3 = (u ^ x1) | (x2 & x3)

[subsystem 2]
x1 = x1 | (x2 -> x3)
x2 = !x3
x3 = (u ^ x1) & (x2 | x3)
";

pub fn example1_model() -> SbcnModel {
    let rules = parse_rules(EXAMPLE1_RULES).unwrap();
    SbcnModel::from_rules(&rules, DEFAULT_BIT_BUDGET).unwrap()
}

/// Cx excludes delta_8^4; subsystem 2 is unavailable at states 1, 2, 5.
pub fn example1_constraints() -> ConstraintSet {
    ConstraintSet::unconstrained()
        .with_cx(8, [1, 2, 3, 5, 6, 7, 8])
        .with_csigma_default([1, 2])
        .with_csigma_override(1, [1])
        .with_csigma_override(2, [1])
        .with_csigma_override(5, [1])
}

pub fn example1_cost() -> StageCost {
    StageCost::quadratic(
        alloc::vec![5.0, 3.0, 4.0, 0.0, 1.0, 3.0, 0.0, 1.0],
        alloc::vec![3.0, 1.0],
        alloc::vec![1.0, 2.0],
    )
}

pub fn example1_instance() -> ProblemInstance {
    ProblemInstance::new(example1_model(), example1_constraints(), example1_cost(), 1)
}

/// Random expression of bounded depth over the given variable names.
pub fn random_expr(rng: &mut impl Rng, vars: &[String], depth: u32) -> BooleanExpr {
    if depth == 0 || rng.gen_bool(0.3) {
        if vars.is_empty() || rng.gen_bool(0.1) {
            return BooleanExpr::Const(rng.gen_bool(0.5));
        }
        return BooleanExpr::Var(vars[rng.gen_range(0..vars.len())].clone());
    }
    match rng.gen_range(0..6) {
        0 => BooleanExpr::Not(random_expr(rng, vars, depth - 1).into()),
        1 => BooleanExpr::And(
            random_expr(rng, vars, depth - 1).into(),
            random_expr(rng, vars, depth - 1).into(),
        ),
        2 => BooleanExpr::Or(
            random_expr(rng, vars, depth - 1).into(),
            random_expr(rng, vars, depth - 1).into(),
        ),
        3 => BooleanExpr::Xor(
            random_expr(rng, vars, depth - 1).into(),
            random_expr(rng, vars, depth - 1).into(),
        ),
        4 => BooleanExpr::Imp(
            random_expr(rng, vars, depth - 1).into(),
            random_expr(rng, vars, depth - 1).into(),
        ),
        _ => BooleanExpr::Iff(
            random_expr(rng, vars, depth - 1).into(),
            random_expr(rng, vars, depth - 1).into(),
        ),
    }
}

/// Random rule-based model with `n` state variables, `m` input
/// variables, and `z` subsystems.
pub fn random_rule_model(rng: &mut impl Rng, n: u32, m: u32, z: u32) -> (SbcnModel, RuleSet) {
    let states: Vec<String> = (1..=n).map(|i| format!("x{}", i)).collect();
    let inputs: Vec<String> = (1..=m).map(|i| format!("u{}", i)).collect();
    let all_vars: Vec<String> = inputs.iter().chain(states.iter()).cloned().collect();
    let mut rules = Vec::with_capacity(z as usize);
    for _ in 0..z {
        rules.push((0..n).map(|_| random_expr(rng, &all_vars, 3)).collect());
    }
    let rule_set = RuleSet { states, inputs, rules };
    let model = SbcnModel::from_rules(&rule_set, DEFAULT_BIT_BUDGET).unwrap();
    (model, rule_set)
}

/// Random model given directly by transition matrices (state and input
/// counts need not be powers of two).
pub fn random_matrix_model(rng: &mut impl Rng, state_count: u32, input_count: u32, z: u32) -> SbcnModel {
    let mut matrices = Vec::with_capacity(z as usize);
    for _ in 0..z {
        let cols: Vec<u32> = (0..input_count * state_count)
            .map(|_| rng.gen_range(1..=state_count))
            .collect();
        matrices.push(LogicalMatrix::new(state_count, cols));
    }
    SbcnModel::new(state_count, input_count, matrices).unwrap()
}

/// Random pruned graph whose vertices are all reachable from its x0:
/// every vertex gets 1..=4 out-edges with weights in [-10, 10], then
/// the graph is restricted to the set reachable from vertex 1 (the
/// restriction keeps all out-edges, so no dead ends appear).
pub fn random_reachable_graph(rng: &mut impl Rng, max_vertices: u32) -> crate::ostg::Ostg {
    use crate::ostg::{Edge, Ostg};
    let n = rng.gen_range(1..=max_vertices);
    let mut out: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let deg = rng.gen_range(1..=4usize);
        let mut targets: Vec<u32> = (0..deg).map(|_| rng.gen_range(1..=n)).collect();
        targets.sort_unstable();
        targets.dedup();
        out.push(targets.into_iter().map(|t| (t, rng.gen_range(-10.0..10.0))).collect());
    }
    // reachable set from vertex 1
    let mut seen = alloc::vec![false; n as usize];
    seen[0] = true;
    let mut stack = alloc::vec![1u32];
    while let Some(v) = stack.pop() {
        for &(t, _) in &out[(v - 1) as usize] {
            if !seen[(t - 1) as usize] {
                seen[(t - 1) as usize] = true;
                stack.push(t);
            }
        }
    }
    let vertices: Vec<u32> = (1..=n).filter(|&v| seen[(v - 1) as usize]).collect();
    let mut edges = Vec::new();
    for &v in &vertices {
        for &(t, w) in &out[(v - 1) as usize] {
            edges.push(Edge { from: v, to: t, input: 1, subsystem: 1, weight: w });
        }
    }
    Ostg::from_parts(1, vertices, edges)
}

/// Random diagonal cost with entries in [0, 9].
pub fn random_cost(rng: &mut impl Rng, state_count: u32, input_count: u32, z: u32) -> StageCost {
    StageCost::quadratic(
        (0..state_count).map(|_| rng.gen_range(0..10) as f64).collect(),
        (0..input_count).map(|_| rng.gen_range(0..10) as f64).collect(),
        (0..z).map(|_| rng.gen_range(0..10) as f64).collect(),
    )
}
