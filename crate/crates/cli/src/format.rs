//! The model and problem file formats.
//!
//! A problem file is JSON:
//!
//! ```json
//! {
//!   "model": { "rules": "example1.rules" },
//!   "x0": 1,
//!   "constraints": {
//!     "cx": [1, 2, 3],
//!     "cu": { "default": [1], "overrides": { "2": [1, 2] } },
//!     "csigma": { "default": [1, 2] }
//!   },
//!   "cost": { "diagonal": { "qx": [...], "qu": [...], "qsigma": [...] } }
//! }
//! ```
//!
//! States may be written as 1-based delta indices (numbers), as bit
//! strings ("0001101000101110", first variable leftmost), or as both
//! `{"index": ..., "bits": "..."}`. Bit strings are authoritative; if
//! both forms appear they must agree. A model is either a rule file
//! reference (path relative to the problem file) or explicit matrices
//! in delta shorthand, as produced by `sbcn compile`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use sbcn_core::logic::LogicalMatrix;
use sbcn_core::model::{
    bits_from_index, index_from_bits, ConstraintSet, ProblemInstance, SbcnModel, StageCost,
};
use sbcn_core::parse::parse_rules;

use crate::{internal, validation, CliError};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    Index(u32),
    Bits(String),
    Full { index: Option<u32>, bits: Option<String> },
}

impl StateRef {
    /// Resolves to a 1-based delta index over `state_count` states;
    /// `state_bits` is needed for bit-string forms.
    pub fn resolve(&self, state_count: u32, state_bits: Option<u32>) -> Result<u32, CliError> {
        let from_bits = |s: &str| -> Result<u32, CliError> {
            let n = state_bits.ok_or_else(|| {
                validation("bit-string state form requires a power-of-two state count")
            })?;
            if s.len() as u32 != n || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(validation(format!(
                    "bad bit string `{}`: expected {} binary digits",
                    s, n
                )));
            }
            let bits: Vec<bool> = s.chars().map(|c| c == '1').collect();
            Ok(index_from_bits(&bits))
        };
        let check_range = |i: u32| -> Result<u32, CliError> {
            if i >= 1 && i <= state_count {
                Ok(i)
            } else {
                Err(validation(format!("state index {} out of range 1..={}", i, state_count)))
            }
        };
        match self {
            StateRef::Index(i) => check_range(*i),
            StateRef::Bits(s) => from_bits(s),
            StateRef::Full { index, bits } => match (index, bits) {
                (None, None) => Err(validation("state reference needs `index` or `bits`")),
                (Some(i), None) => check_range(*i),
                (None, Some(s)) => from_bits(s),
                (Some(i), Some(s)) => {
                    // bits are authoritative but must agree
                    let from = from_bits(s)?;
                    if from != *i {
                        return Err(validation(format!(
                            "state forms disagree: index {} vs bits `{}` (= {})",
                            i, s, from
                        )));
                    }
                    Ok(from)
                }
            },
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct ExplicitModel {
    pub state_count: u32,
    pub input_count: u32,
    pub matrices: Vec<Vec<u32>>,
    #[serde(default)]
    pub state_names: Vec<String>,
    #[serde(default)]
    pub input_names: Vec<String>,
}

#[derive(Debug, Deserialize)]
pub struct ModelSection {
    pub rules: Option<String>,
    pub explicit: Option<ExplicitModel>,
}

#[derive(Debug, Default, Deserialize)]
pub struct ActionSetSection {
    pub default: Option<Vec<u32>>,
    #[serde(default)]
    pub overrides: BTreeMap<String, Vec<u32>>,
}

#[derive(Debug, Default, Deserialize)]
pub struct ConstraintsSection {
    pub cx: Option<Vec<StateRef>>,
    pub cu: Option<ActionSetSection>,
    pub csigma: Option<ActionSetSection>,
}

#[derive(Debug, Deserialize)]
pub struct DiagonalCost {
    pub qx: Vec<f64>,
    pub qu: Vec<f64>,
    pub qsigma: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct TwoLevelCost {
    pub target: StateRef,
    pub target_cost: f64,
    pub default_cost: f64,
}

#[derive(Debug, Deserialize)]
pub struct TableCost {
    pub values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct CostSection {
    pub diagonal: Option<DiagonalCost>,
    pub two_level: Option<TwoLevelCost>,
    pub table: Option<TableCost>,
}

#[derive(Debug, Deserialize)]
pub struct ProblemFile {
    pub model: ModelSection,
    pub x0: Option<StateRef>,
    pub constraints: Option<ConstraintsSection>,
    pub cost: CostSection,
}

pub fn load_rules_model(path: &Path, bit_budget: u32) -> Result<SbcnModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read {}: {}", path.display(), e)))?;
    let rules = parse_rules(&text)
        .map_err(|e| validation(format!("{}: {}", path.display(), e)))?;
    SbcnModel::from_rules(&rules, bit_budget)
        .map_err(|e| validation(format!("{}: {}", path.display(), e)))
}

fn model_from_section(
    section: &ModelSection,
    base_dir: &Path,
    bit_budget: u32,
) -> Result<SbcnModel, CliError> {
    match (&section.rules, &section.explicit) {
        (Some(path), None) => load_rules_model(&base_dir.join(path), bit_budget),
        (None, Some(explicit)) => {
            let matrices: Vec<LogicalMatrix> = explicit
                .matrices
                .iter()
                .map(|cols| LogicalMatrix::new(explicit.state_count, cols.clone()))
                .collect();
            SbcnModel::new(explicit.state_count, explicit.input_count, matrices)
                .map_err(|e| validation(e.to_string()))
        }
        _ => Err(validation("model must have exactly one of `rules` or `explicit`")),
    }
}

/// A fully resolved problem: the instance plus naming metadata for
/// exports.
pub struct LoadedProblem {
    pub instance: ProblemInstance,
    /// x0 was present in the file (solve-all does not need one).
    pub has_x0: bool,
}

fn parse_override_key(key: &str, state_count: u32, state_bits: Option<u32>) -> Result<u32, CliError> {
    if let Some(n) = state_bits {
        if key.len() as u32 == n && key.chars().all(|c| c == '0' || c == '1') {
            let bits: Vec<bool> = key.chars().map(|c| c == '1').collect();
            return Ok(index_from_bits(&bits));
        }
    }
    let i: u32 = key
        .parse()
        .map_err(|_| validation(format!("bad state key `{}`", key)))?;
    if i < 1 || i > state_count {
        return Err(validation(format!("state key {} out of range 1..={}", i, state_count)));
    }
    Ok(i)
}

pub fn load_problem(path: &Path, bit_budget: u32) -> Result<LoadedProblem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read {}: {}", path.display(), e)))?;
    let file: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| validation(format!("{}: {}", path.display(), e)))?;
    let base_dir: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let model = model_from_section(&file.model, &base_dir, bit_budget)?;
    let n = model.state_count();
    let bits = model.state_bits();

    let mut constraints = ConstraintSet::unconstrained();
    if let Some(section) = &file.constraints {
        if let Some(cx) = &section.cx {
            let states = cx
                .iter()
                .map(|r| r.resolve(n, bits))
                .collect::<Result<Vec<u32>, CliError>>()?;
            constraints = constraints.with_cx(n, states);
        }
        if let Some(cu) = &section.cu {
            if let Some(def) = &cu.default {
                constraints = constraints.with_cu_default(def.iter().copied());
            }
            for (key, set) in &cu.overrides {
                let state = parse_override_key(key, n, bits)?;
                constraints = constraints.with_cu_override(state, set.iter().copied());
            }
        }
        if let Some(cs) = &section.csigma {
            if let Some(def) = &cs.default {
                constraints = constraints.with_csigma_default(def.iter().copied());
            }
            for (key, set) in &cs.overrides {
                let state = parse_override_key(key, n, bits)?;
                constraints = constraints.with_csigma_override(state, set.iter().copied());
            }
        }
    }

    let cost = match (&file.cost.diagonal, &file.cost.two_level, &file.cost.table) {
        (Some(d), None, None) => {
            StageCost::quadratic(d.qx.clone(), d.qu.clone(), d.qsigma.clone())
        }
        (None, Some(t), None) => StageCost::TwoLevel {
            target: t.target.resolve(n, bits)?,
            target_cost: t.target_cost,
            default_cost: t.default_cost,
        },
        (None, None, Some(t)) => StageCost::Table {
            values: t.values.clone(),
            input_count: model.input_count(),
            subsystem_count: model.subsystem_count(),
        },
        _ => {
            return Err(validation(
                "cost must have exactly one of `diagonal`, `two_level`, or `table`",
            ))
        }
    };

    let (x0, has_x0) = match &file.x0 {
        Some(r) => (r.resolve(n, bits)?, true),
        None => (first_admissible(&constraints, n)?, false),
    };

    let instance = ProblemInstance::new(model, constraints, cost, x0);
    Ok(LoadedProblem { instance, has_x0 })
}

fn first_admissible(constraints: &ConstraintSet, n: u32) -> Result<u32, CliError> {
    (1..=n)
        .find(|&x| constraints.allows_state(x))
        .ok_or_else(|| validation("no admissible state"))
}

/// Validates and maps the error list to a single exit-code-2 error.
pub fn validate_instance(instance: &ProblemInstance) -> Result<(), CliError> {
    instance.validate().map_err(|errors| {
        let msgs: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
        validation(msgs.join("; "))
    })
}

/// Bit string of a state, when the state count is a power of two.
pub fn state_bits_string(model: &SbcnModel, state: u32) -> Option<String> {
    let n = model.state_bits()?;
    if n == 0 {
        return None;
    }
    Some(
        bits_from_index(state, n)
            .into_iter()
            .map(|b| if b { '1' } else { '0' })
            .collect(),
    )
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read {}: {}", path.display(), e)))
}

pub fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| internal(format!("cannot create {}: {}", dir.display(), e)))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| internal(format!("cannot write {}: {}", path.display(), e)))
}
