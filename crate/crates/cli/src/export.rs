//! Deterministic exporters: JSON, DOT, and CSV forms of models,
//! graphs, solver results, laws, and trajectories. All indices are
//! 1-based delta indices.

use serde_json::{json, Map, Value};

use sbcn_core::all_initial::AllStatesSolution;
use sbcn_core::mmc::{KarpTable, MmcResult};
use sbcn_core::model::{ProblemInstance, SbcnModel};
use sbcn_core::ostg::Ostg;
use sbcn_core::policy::FeedbackLaw;

use crate::format::state_bits_string;
use crate::CliError;

pub fn to_pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    s.push('\n');
    s
}

pub fn model_json(model: &SbcnModel) -> Value {
    let mut obj = Map::new();
    obj.insert("state_count".into(), json!(model.state_count()));
    obj.insert("input_count".into(), json!(model.input_count()));
    obj.insert("subsystem_count".into(), json!(model.subsystem_count()));
    if let Some(n) = model.state_bits() {
        obj.insert("state_variables".into(), json!(n));
    }
    if let Some(m) = model.input_bits() {
        obj.insert("input_variables".into(), json!(m));
    }
    if !model.state_names().is_empty() {
        obj.insert("state_names".into(), json!(model.state_names()));
    }
    if !model.input_names().is_empty() {
        obj.insert("input_names".into(), json!(model.input_names()));
    }
    let matrices: Vec<Value> = model
        .matrices()
        .iter()
        .map(|m| json!(m.col_indices()))
        .collect();
    obj.insert("matrices".into(), Value::Array(matrices));
    Value::Object(obj)
}

pub fn ostg_json(model: &SbcnModel, ostg: &Ostg) -> Value {
    let vertices: Vec<Value> = ostg
        .vertices()
        .iter()
        .map(|&v| match state_bits_string(model, v) {
            Some(bits) => json!({ "index": v, "bits": bits }),
            None => json!({ "index": v }),
        })
        .collect();
    let edges: Vec<Value> = ostg
        .edges()
        .map(|e| {
            json!({
                "from": e.from,
                "to": e.to,
                "u": e.input,
                "sigma": e.subsystem,
                "weight": e.weight,
            })
        })
        .collect();
    json!({
        "x0": ostg.x0(),
        "vertex_count": ostg.vertex_count(),
        "edge_count": ostg.edge_count(),
        "vertices": vertices,
        "edges": edges,
        "pruned": ostg.pruned(),
    })
}

pub fn ostg_dot(model: &SbcnModel, ostg: &Ostg) -> String {
    let n = model.state_count();
    let z = model.subsystem_count();
    let m = model.input_count();
    let mut out = String::from("digraph ostg {\n");
    out.push_str("  rankdir=LR;\n");
    for &v in ostg.vertices() {
        out.push_str(&format!("  s{} [label=\"d_{}^{}\"];\n", v, n, v));
    }
    for e in ostg.edges() {
        out.push_str(&format!(
            "  s{} -> s{} [label=\"w={}, u=d_{}^{}, sigma=d_{}^{}\"];\n",
            e.from, e.to, e.weight, m, e.input, z, e.subsystem
        ));
    }
    out.push_str("}\n");
    out
}

pub fn mmc_json(result: &MmcResult) -> Value {
    json!({
        "mu_star": result.mu_star,
        "v_star": result.v_star,
        "k_star": result.k_star,
        "path": result.path,
        "alpha": result.alpha,
        "beta": result.beta,
        "cycle": result.cycle,
        "transient": result.transient,
    })
}

pub fn law_json(law: &FeedbackLaw) -> Value {
    let ku: Map<String, Value> =
        law.ku.iter().map(|(&s, &u)| (s.to_string(), json!(u))).collect();
    let ksigma: Map<String, Value> =
        law.ksigma.iter().map(|(&s, &l)| (s.to_string(), json!(l))).collect();
    json!({
        "mu_star": law.mu_star,
        "ku": ku,
        "ksigma": ksigma,
        "free_states": law.free_states,
        "cycle": law.cycle,
        "transient": law.transient,
    })
}

pub fn law_from_json(text: &str) -> Result<FeedbackLaw, CliError> {
    #[derive(serde::Deserialize)]
    struct LawFile {
        mu_star: f64,
        ku: std::collections::BTreeMap<u32, u32>,
        ksigma: std::collections::BTreeMap<u32, u32>,
        #[serde(default)]
        free_states: Vec<u32>,
        #[serde(default)]
        cycle: Vec<u32>,
        #[serde(default)]
        transient: Vec<u32>,
    }
    let file: LawFile =
        serde_json::from_str(text).map_err(|e| crate::validation(format!("bad law file: {}", e)))?;
    Ok(FeedbackLaw {
        ku: file.ku,
        ksigma: file.ksigma,
        free_states: file.free_states,
        mu_star: file.mu_star,
        cycle: file.cycle,
        transient: file.transient,
    })
}

pub fn solve_all_json(solution: &AllStatesSolution) -> Value {
    let per_state: Map<String, Value> = solution
        .per_state
        .iter()
        .map(|(&x, entry)| {
            (
                x.to_string(),
                json!({
                    "mu_star": entry.mu_star,
                    "law_id": entry.law_id,
                    "transient": entry.transient,
                    "cycle": entry.cycle,
                }),
            )
        })
        .collect();
    let laws: Vec<Value> = solution.laws.iter().map(law_json).collect();
    json!({
        "iterations": solution.iterations,
        "iteration_cycles": solution.iteration_cycles,
        "laws": laws,
        "states": per_state,
    })
}

/// Per-step CSV: `t, state, bits, u, sigma, cost, running_average`.
/// One row per applied action, so a zero-step trajectory is header
/// only.
pub fn trajectory_csv(
    instance: &ProblemInstance,
    law: &FeedbackLaw,
    trajectory: &[u32],
) -> Result<String, CliError> {
    let mut out = String::from("t,state,bits,u,sigma,cost,running_average\n");
    let mut total = 0.0;
    for (t, &x) in trajectory.iter().enumerate() {
        if t + 1 == trajectory.len() {
            break;
        }
        let (&u, &sigma) = match (law.ku.get(&x), law.ksigma.get(&x)) {
            (Some(u), Some(s)) => (u, s),
            _ => {
                return Err(crate::internal(format!(
                    "trajectory visits free state {}",
                    x
                )))
            }
        };
        let cost = instance.cost.g(x, u, sigma);
        total += cost;
        let bits = state_bits_string(&instance.model, x).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            t,
            x,
            bits,
            u,
            sigma,
            cost,
            total / (t + 1) as f64
        ));
    }
    Ok(out)
}

/// Debug dump of the Karp table: `k, state, F, B` (F empty when
/// unreachable).
pub fn karp_csv(ostg: &Ostg, table: &KarpTable) -> String {
    let mut out = String::from("k,state,F,B\n");
    for (k, row) in table.f.iter().enumerate() {
        for v in 0..row.len() {
            let f = match row[v] {
                Some(x) => x.to_string(),
                None => String::new(),
            };
            let b = match table.b[k][v] {
                Some(p) => ostg.state_of(p).to_string(),
                None => String::new(),
            };
            out.push_str(&format!("{},{},{},{}\n", k, ostg.state_of(v), f, b));
        }
    }
    out
}
