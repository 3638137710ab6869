//! The switched Boolean control network model, its algebraic form, the
//! constraint sets and stage cost of the optimal control problem, and
//! the BCN augmentation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::BooleanExpr;
use crate::logic::LogicalMatrix;
use crate::parse::RuleSet;

/// Default cap on `n + m` when assembling network transition matrices
/// (the matrix has `2^(n+m)` columns).
pub const DEFAULT_BIT_BUDGET: u32 = 26;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    BitBudgetExceeded { bits: u32, budget: u32 },
    UndeclaredVariable(String),
    ShapeMismatch(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::BitBudgetExceeded { bits, budget } => {
                write!(f, "n + m = {} exceeds the bit budget of {}", bits, budget)
            }
            ModelError::UndeclaredVariable(name) => {
                write!(f, "expression references undeclared variable `{}`", name)
            }
            ModelError::ShapeMismatch(msg) => write!(f, "{}", msg),
        }
    }
}

// ---- delta-index <-> bit-vector convention ------------------------------
//
// delta_N^i corresponds to the n-bit string b_1...b_n with b_1 most
// significant and 1 ~ delta_2^1, so i = 2^n - value(b) (all-ones maps
// to index 1, all-zeros to index N). The T-LGL regression
// 0001101000101110 -> delta_65536^58834 pins this choice.

/// Converts a bit vector (b_1 first) to a 1-based delta index.
pub fn index_from_bits(bits: &[bool]) -> u32 {
    let n = bits.len() as u32;
    assert!(n > 0 && n <= 31, "bit vector length {} out of range", n);
    let mut value = 0u32;
    for &b in bits {
        value = (value << 1) | (b as u32);
    }
    (1u32 << n) - value
}

/// Converts a 1-based delta index over `2^n` states to its bit vector.
pub fn bits_from_index(index: u32, n: u32) -> Vec<bool> {
    assert!(n > 0 && n <= 31);
    let total = 1u32 << n;
    assert!(index >= 1 && index <= total, "index {} out of range", index);
    let value = total - index;
    (0..n).map(|t| (value >> (n - 1 - t)) & 1 == 1).collect()
}

// ---- network matrix assembly ---------------------------------------------

// Postfix program evaluated 64 assignments at a time over packed u64
// lanes; variable loads are just complemented bit patterns of the
// assignment counter.
enum Op {
    Var(u32), // bit position p of the assignment id; value = !bit_p
    Const(bool),
    Not,
    And,
    Or,
    Xor,
    Imp,
    Iff,
}

fn compile_program(
    expr: &BooleanExpr,
    position_of: &BTreeMap<&str, u32>,
    total_bits: u32,
    ops: &mut Vec<Op>,
) -> Result<(), ModelError> {
    match expr {
        BooleanExpr::Const(b) => ops.push(Op::Const(*b)),
        BooleanExpr::Var(name) => {
            let g = *position_of
                .get(name.as_str())
                .ok_or_else(|| ModelError::UndeclaredVariable(name.clone()))?;
            ops.push(Op::Var(total_bits - g));
        }
        BooleanExpr::Not(a) => {
            compile_program(a, position_of, total_bits, ops)?;
            ops.push(Op::Not);
        }
        BooleanExpr::And(a, b) => {
            compile_program(a, position_of, total_bits, ops)?;
            compile_program(b, position_of, total_bits, ops)?;
            ops.push(Op::And);
        }
        BooleanExpr::Or(a, b) => {
            compile_program(a, position_of, total_bits, ops)?;
            compile_program(b, position_of, total_bits, ops)?;
            ops.push(Op::Or);
        }
        BooleanExpr::Xor(a, b) => {
            compile_program(a, position_of, total_bits, ops)?;
            compile_program(b, position_of, total_bits, ops)?;
            ops.push(Op::Xor);
        }
        BooleanExpr::Imp(a, b) => {
            compile_program(a, position_of, total_bits, ops)?;
            compile_program(b, position_of, total_bits, ops)?;
            ops.push(Op::Imp);
        }
        BooleanExpr::Iff(a, b) => {
            compile_program(a, position_of, total_bits, ops)?;
            compile_program(b, position_of, total_bits, ops)?;
            ops.push(Op::Iff);
        }
    }
    Ok(())
}

// Bit p of lanes base..base+63: constant within a lane word for p >= 6,
// an alternating pattern below.
const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

fn lane_bits(base: u64, p: u32) -> u64 {
    if p < 6 {
        LANE_PATTERNS[p as usize]
    } else if (base >> p) & 1 == 1 {
        u64::MAX
    } else {
        0
    }
}

fn run_program(ops: &[Op], base: u64, stack: &mut Vec<u64>) -> u64 {
    stack.clear();
    for op in ops {
        match op {
            Op::Var(p) => stack.push(!lane_bits(base, *p)),
            Op::Const(b) => stack.push(if *b { u64::MAX } else { 0 }),
            Op::Not => {
                let a = stack.pop().unwrap();
                stack.push(!a);
            }
            Op::And => {
                let b = stack.pop().unwrap();
                let a = stack.pop().unwrap();
                stack.push(a & b);
            }
            Op::Or => {
                let b = stack.pop().unwrap();
                let a = stack.pop().unwrap();
                stack.push(a | b);
            }
            Op::Xor => {
                let b = stack.pop().unwrap();
                let a = stack.pop().unwrap();
                stack.push(a ^ b);
            }
            Op::Imp => {
                let b = stack.pop().unwrap();
                let a = stack.pop().unwrap();
                stack.push(!a | b);
            }
            Op::Iff => {
                let b = stack.pop().unwrap();
                let a = stack.pop().unwrap();
                stack.push(!(a ^ b));
            }
        }
    }
    debug_assert_eq!(stack.len(), 1);
    stack[0]
}

/// Assembles the network transition matrix `L` of one subsystem:
/// `L` is `N x MN` with `N = 2^n`, `M = 2^m`, and column `(k-1)N + i`
/// holds the successor of state `delta_N^i` under input `delta_M^k`
/// (the joint assignment orders inputs before states).
pub fn assemble_network_matrix(
    node_exprs: &[BooleanExpr],
    state_names: &[String],
    input_names: &[String],
    bit_budget: u32,
) -> Result<LogicalMatrix, ModelError> {
    let n = state_names.len() as u32;
    let m = input_names.len() as u32;
    assert!(n as usize == node_exprs.len(), "one expression per state required");
    if n + m > bit_budget {
        return Err(ModelError::BitBudgetExceeded { bits: n + m, budget: bit_budget });
    }
    let total_bits = n + m;
    let mut position_of: BTreeMap<&str, u32> = BTreeMap::new();
    for (t, name) in input_names.iter().chain(state_names.iter()).enumerate() {
        position_of.insert(name.as_str(), t as u32 + 1);
    }

    let mut programs = Vec::with_capacity(node_exprs.len());
    for expr in node_exprs {
        let mut ops = Vec::new();
        compile_program(expr, &position_of, total_bits, &mut ops)?;
        programs.push(ops);
    }

    let total: u64 = 1u64 << total_bits;
    let big_n = 1u64 << n;
    let mut col_index = alloc::vec![0u32; total as usize];
    let mut stack = Vec::new();
    let mut outs = alloc::vec![0u64; n as usize];
    let mut base = 0u64;
    while base < total {
        for (i, ops) in programs.iter().enumerate() {
            outs[i] = run_program(ops, base, &mut stack);
        }
        let lanes = core::cmp::min(64, total - base) as u32;
        for s in 0..lanes {
            let mut value = 0u64;
            for out in outs.iter() {
                value = (value << 1) | ((out >> s) & 1);
            }
            col_index[(base + s as u64) as usize] = (big_n - value) as u32;
        }
        base += 64;
    }
    Ok(LogicalMatrix::new(big_n as u32, col_index))
}

// ---- the model ------------------------------------------------------------

/// A switched Boolean control network in algebraic form: `z` network
/// transition matrices over `N` states and `M` inputs.
///
/// `M` is not required to be a power of two so that the augmented BCN
/// of an SBCN (with `zM` inputs) is itself a valid model.
#[derive(Clone, Debug, PartialEq)]
pub struct SbcnModel {
    state_count: u32,
    input_count: u32,
    matrices: Vec<LogicalMatrix>,
    state_names: Vec<String>,
    input_names: Vec<String>,
}

impl SbcnModel {
    pub fn new(state_count: u32, input_count: u32, matrices: Vec<LogicalMatrix>) -> Result<Self, ModelError> {
        if matrices.is_empty() {
            return Err(ModelError::ShapeMismatch("at least one subsystem required".into()));
        }
        for (l, mat) in matrices.iter().enumerate() {
            if mat.rows() != state_count || mat.cols() != input_count * state_count {
                return Err(ModelError::ShapeMismatch(format!(
                    "subsystem {}: expected {} x {} matrix, got {} x {}",
                    l + 1,
                    state_count,
                    input_count * state_count,
                    mat.rows(),
                    mat.cols()
                )));
            }
        }
        Ok(SbcnModel {
            state_count,
            input_count,
            matrices,
            state_names: Vec::new(),
            input_names: Vec::new(),
        })
    }

    /// Compiles a parsed rule set to its algebraic form.
    pub fn from_rules(rules: &RuleSet, bit_budget: u32) -> Result<Self, ModelError> {
        let mut matrices = Vec::with_capacity(rules.subsystems());
        for exprs in &rules.rules {
            matrices.push(assemble_network_matrix(
                exprs,
                &rules.states,
                &rules.inputs,
                bit_budget,
            )?);
        }
        let n = rules.states.len() as u32;
        let m = rules.inputs.len() as u32;
        let mut model = SbcnModel::new(1 << n, 1 << m, matrices)?;
        model.state_names = rules.states.clone();
        model.input_names = rules.inputs.clone();
        Ok(model)
    }

    /// Number of states `N`.
    pub fn state_count(&self) -> u32 {
        self.state_count
    }

    /// Number of control inputs `M`.
    pub fn input_count(&self) -> u32 {
        self.input_count
    }

    /// Number of subsystems `z`.
    pub fn subsystem_count(&self) -> u32 {
        self.matrices.len() as u32
    }

    /// Number of state variables, when `N` is a power of two.
    pub fn state_bits(&self) -> Option<u32> {
        exact_log2(self.state_count)
    }

    /// Number of input variables, when `M` is a power of two.
    pub fn input_bits(&self) -> Option<u32> {
        exact_log2(self.input_count)
    }

    pub fn matrix(&self, l: u32) -> &LogicalMatrix {
        assert!(l >= 1 && l <= self.subsystem_count(), "subsystem {} out of range", l);
        &self.matrices[(l - 1) as usize]
    }

    pub fn matrices(&self) -> &[LogicalMatrix] {
        &self.matrices
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    /// One-step dynamics: the successor of state `x` under input `u`
    /// and subsystem `sigma`. Total over all in-range index triples;
    /// constraints are applied at graph construction, not here.
    pub fn step(&self, x: u32, u: u32, sigma: u32) -> u32 {
        self.matrix(sigma).blk(u).col(x)
    }

    /// Control-input augmentation: the equivalent single-subsystem BCN
    /// with `zM` inputs, where the augmented input `(sigma-1)M + u`
    /// plays the role of the pair `(u, sigma)`.
    pub fn to_augmented_bcn(&self) -> SbcnModel {
        let mut cols = Vec::with_capacity(
            (self.subsystem_count() * self.input_count * self.state_count) as usize,
        );
        for mat in &self.matrices {
            cols.extend_from_slice(mat.col_indices());
        }
        let stacked = LogicalMatrix::new(self.state_count, cols);
        SbcnModel {
            state_count: self.state_count,
            input_count: self.subsystem_count() * self.input_count,
            matrices: alloc::vec![stacked],
            state_names: self.state_names.clone(),
            input_names: Vec::new(),
        }
    }
}

fn exact_log2(v: u32) -> Option<u32> {
    if v.is_power_of_two() {
        Some(v.trailing_zeros())
    } else {
        None
    }
}

// ---- constraints -----------------------------------------------------------

/// Fixed-size bit set over 1-based state indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSet {
    words: Vec<u64>,
    len: u32,
}

impl StateSet {
    pub fn empty(len: u32) -> Self {
        StateSet { words: alloc::vec![0; (len as usize + 63) / 64], len }
    }

    pub fn from_indices(len: u32, indices: impl IntoIterator<Item = u32>) -> Self {
        let mut set = StateSet::empty(len);
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn insert(&mut self, index: u32) {
        assert!(index >= 1 && index <= self.len, "index {} out of range", index);
        self.words[(index - 1) as usize / 64] |= 1 << ((index - 1) % 64);
    }

    pub fn contains(&self, index: u32) -> bool {
        if index < 1 || index > self.len {
            return false;
        }
        self.words[(index - 1) as usize / 64] >> ((index - 1) % 64) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (1..=self.len).filter(move |&i| self.contains(i))
    }

    pub fn count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
}

/// The constraint sets of the control problem: admissible states `Cx`,
/// state-dependent input constraints `Cu`, and state-dependent
/// switching constraints `Csigma`. `None` defaults mean "everything
/// admissible", so an unconstrained problem costs no memory.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    cx: Option<StateSet>,
    cu_default: Option<Vec<u32>>,
    cu_overrides: BTreeMap<u32, Vec<u32>>,
    csigma_default: Option<Vec<u32>>,
    csigma_overrides: BTreeMap<u32, Vec<u32>>,
}

impl ConstraintSet {
    pub fn unconstrained() -> Self {
        ConstraintSet {
            cx: None,
            cu_default: None,
            cu_overrides: BTreeMap::new(),
            csigma_default: None,
            csigma_overrides: BTreeMap::new(),
        }
    }

    /// Restricts the admissible state set.
    pub fn with_cx(mut self, state_count: u32, states: impl IntoIterator<Item = u32>) -> Self {
        self.cx = Some(StateSet::from_indices(state_count, states));
        self
    }

    /// Sets the default admissible input set (applies to every state
    /// without an override). Entries are sorted and deduplicated.
    pub fn with_cu_default(mut self, inputs: impl IntoIterator<Item = u32>) -> Self {
        self.cu_default = Some(sorted_dedup(inputs));
        self
    }

    pub fn with_cu_override(mut self, state: u32, inputs: impl IntoIterator<Item = u32>) -> Self {
        self.cu_overrides.insert(state, sorted_dedup(inputs));
        self
    }

    pub fn with_csigma_default(mut self, subsystems: impl IntoIterator<Item = u32>) -> Self {
        self.csigma_default = Some(sorted_dedup(subsystems));
        self
    }

    pub fn with_csigma_override(
        mut self,
        state: u32,
        subsystems: impl IntoIterator<Item = u32>,
    ) -> Self {
        self.csigma_overrides.insert(state, sorted_dedup(subsystems));
        self
    }

    pub fn allows_state(&self, x: u32) -> bool {
        match &self.cx {
            Some(set) => set.contains(x),
            None => true,
        }
    }

    /// Admissible inputs at `x`: `None` means the full input range.
    pub fn cu(&self, x: u32) -> Option<&[u32]> {
        self.cu_overrides
            .get(&x)
            .map(|v| v.as_slice())
            .or(self.cu_default.as_deref())
    }

    /// Admissible subsystems at `x`: `None` means all subsystems.
    pub fn csigma(&self, x: u32) -> Option<&[u32]> {
        self.csigma_overrides
            .get(&x)
            .map(|v| v.as_slice())
            .or(self.csigma_default.as_deref())
    }

    pub fn cx(&self) -> Option<&StateSet> {
        self.cx.as_ref()
    }

    pub fn cu_overrides(&self) -> &BTreeMap<u32, Vec<u32>> {
        &self.cu_overrides
    }

    pub fn csigma_overrides(&self) -> &BTreeMap<u32, Vec<u32>> {
        &self.csigma_overrides
    }

    pub fn cu_default(&self) -> Option<&[u32]> {
        self.cu_default.as_deref()
    }

    pub fn csigma_default(&self) -> Option<&[u32]> {
        self.csigma_default.as_deref()
    }
}

fn sorted_dedup(iter: impl IntoIterator<Item = u32>) -> Vec<u32> {
    let mut v: Vec<u32> = iter.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

// ---- stage cost ------------------------------------------------------------

/// The stage-wise cost `g(x, u, sigma)`, assumed bounded.
#[derive(Clone, Debug, PartialEq)]
pub enum StageCost {
    /// `g = Qx[x] + Qu[u] + Qs[sigma]` (the quadratic form `x' Q x`
    /// reduces to the diagonal entry for unit vectors).
    Diagonal { qx: Vec<f64>, qu: Vec<f64>, qsigma: Vec<f64> },
    /// Explicit lookup table laid out `[(x-1)*M*z + (u-1)*z + (sigma-1)]`.
    Table { values: Vec<f64>, input_count: u32, subsystem_count: u32 },
    /// One cost at a designated target state, another everywhere else.
    TwoLevel { target: u32, target_cost: f64, default_cost: f64 },
}

impl StageCost {
    pub fn quadratic(qx: Vec<f64>, qu: Vec<f64>, qsigma: Vec<f64>) -> Self {
        StageCost::Diagonal { qx, qu, qsigma }
    }

    /// Upper bound on |g| over all arguments (used by convergence
    /// certificates).
    pub fn max_abs(&self) -> f64 {
        fn vmax(v: &[f64]) -> f64 {
            v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
        }
        match self {
            StageCost::Diagonal { qx, qu, qsigma } => vmax(qx) + vmax(qu) + vmax(qsigma),
            StageCost::Table { values, .. } => vmax(values),
            StageCost::TwoLevel { target_cost, default_cost, .. } => {
                target_cost.abs().max(default_cost.abs())
            }
        }
    }

    pub fn zero() -> Self {
        StageCost::TwoLevel { target: 1, target_cost: 0.0, default_cost: 0.0 }
    }

    pub fn g(&self, x: u32, u: u32, sigma: u32) -> f64 {
        match self {
            StageCost::Diagonal { qx, qu, qsigma } => {
                qx[(x - 1) as usize] + qu[(u - 1) as usize] + qsigma[(sigma - 1) as usize]
            }
            StageCost::Table { values, input_count, subsystem_count } => {
                let idx = ((x - 1) * input_count * subsystem_count
                    + (u - 1) * subsystem_count
                    + (sigma - 1)) as usize;
                values[idx]
            }
            StageCost::TwoLevel { target, target_cost, default_cost } => {
                if x == *target {
                    *target_cost
                } else {
                    *default_cost
                }
            }
        }
    }
}

// ---- the problem instance ---------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub model: SbcnModel,
    pub constraints: ConstraintSet,
    pub cost: StageCost,
    pub x0: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValidationError {
    InitialStateExcluded(u32),
    StateIndexOutOfRange { index: u32, context: &'static str },
    InputIndexOutOfRange { state: u32, index: u32 },
    SubsystemIndexOutOfRange { state: u32, index: u32 },
    ConstraintKeyOutsideCx { state: u32, context: &'static str },
    CostShape(String),
    NonFiniteCost(String),
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::InitialStateExcluded(x0) => {
                write!(f, "initial state {} excluded by the state constraint", x0)
            }
            ValidationError::StateIndexOutOfRange { index, context } => {
                write!(f, "state index {} out of range in {}", index, context)
            }
            ValidationError::InputIndexOutOfRange { state, index } => {
                write!(f, "input index {} out of range in Cu({})", index, state)
            }
            ValidationError::SubsystemIndexOutOfRange { state, index } => {
                write!(f, "subsystem index {} out of range in Csigma({})", index, state)
            }
            ValidationError::ConstraintKeyOutsideCx { state, context } => {
                write!(f, "{} override for state {} which is outside Cx", context, state)
            }
            ValidationError::CostShape(msg) => write!(f, "cost shape: {}", msg),
            ValidationError::NonFiniteCost(msg) => write!(f, "non-finite cost: {}", msg),
        }
    }
}

impl ProblemInstance {
    pub fn new(model: SbcnModel, constraints: ConstraintSet, cost: StageCost, x0: u32) -> Self {
        ProblemInstance { model, constraints, cost, x0 }
    }

    /// Checks every structural invariant, reporting all violations.
    pub fn validate(&self) -> Result<(), Vec<ValidationError>> {
        let mut errors = Vec::new();
        let n = self.model.state_count();
        let m = self.model.input_count();
        let z = self.model.subsystem_count();

        if self.x0 < 1 || self.x0 > n {
            errors.push(ValidationError::StateIndexOutOfRange {
                index: self.x0,
                context: "x0",
            });
        } else if !self.constraints.allows_state(self.x0) {
            errors.push(ValidationError::InitialStateExcluded(self.x0));
        }

        if let Some(cx) = self.constraints.cx() {
            if cx.len != n {
                errors.push(ValidationError::StateIndexOutOfRange {
                    index: cx.len,
                    context: "Cx size",
                });
            }
        }

        for (&state, inputs) in self.constraints.cu_overrides() {
            if state < 1 || state > n {
                errors.push(ValidationError::StateIndexOutOfRange { index: state, context: "Cu key" });
                continue;
            }
            if !self.constraints.allows_state(state) {
                errors.push(ValidationError::ConstraintKeyOutsideCx { state, context: "Cu" });
            }
            for &k in inputs {
                if k < 1 || k > m {
                    errors.push(ValidationError::InputIndexOutOfRange { state, index: k });
                }
            }
        }
        if let Some(def) = self.constraints.cu_default() {
            for &k in def {
                if k < 1 || k > m {
                    errors.push(ValidationError::InputIndexOutOfRange { state: 0, index: k });
                }
            }
        }
        for (&state, subs) in self.constraints.csigma_overrides() {
            if state < 1 || state > n {
                errors.push(ValidationError::StateIndexOutOfRange {
                    index: state,
                    context: "Csigma key",
                });
                continue;
            }
            if !self.constraints.allows_state(state) {
                errors.push(ValidationError::ConstraintKeyOutsideCx { state, context: "Csigma" });
            }
            for &l in subs {
                if l < 1 || l > z {
                    errors.push(ValidationError::SubsystemIndexOutOfRange { state, index: l });
                }
            }
        }
        if let Some(def) = self.constraints.csigma_default() {
            for &l in def {
                if l < 1 || l > z {
                    errors.push(ValidationError::SubsystemIndexOutOfRange { state: 0, index: l });
                }
            }
        }

        match &self.cost {
            StageCost::Diagonal { qx, qu, qsigma } => {
                if qx.len() != n as usize {
                    errors.push(ValidationError::CostShape(format!(
                        "Qx diagonal has {} entries, expected {}",
                        qx.len(),
                        n
                    )));
                }
                if qu.len() != m as usize {
                    errors.push(ValidationError::CostShape(format!(
                        "Qu diagonal has {} entries, expected {}",
                        qu.len(),
                        m
                    )));
                }
                if qsigma.len() != z as usize {
                    errors.push(ValidationError::CostShape(format!(
                        "Qsigma diagonal has {} entries, expected {}",
                        qsigma.len(),
                        z
                    )));
                }
                for (name, v) in [("Qx", qx), ("Qu", qu), ("Qsigma", qsigma)] {
                    if v.iter().any(|c| !c.is_finite()) {
                        errors.push(ValidationError::NonFiniteCost(format!("{} diagonal", name)));
                    }
                }
            }
            StageCost::Table { values, input_count, subsystem_count } => {
                let expected = (n * input_count * subsystem_count) as usize;
                if *input_count != m || *subsystem_count != z || values.len() != expected {
                    errors.push(ValidationError::CostShape(format!(
                        "cost table has {} entries for M={}, z={}; expected {} for M={}, z={}",
                        values.len(),
                        input_count,
                        subsystem_count,
                        expected,
                        m,
                        z
                    )));
                }
                if values.iter().any(|c| !c.is_finite()) {
                    errors.push(ValidationError::NonFiniteCost("cost table".into()));
                }
            }
            StageCost::TwoLevel { target, target_cost, default_cost } => {
                if *target < 1 || *target > n {
                    errors.push(ValidationError::StateIndexOutOfRange {
                        index: *target,
                        context: "cost target",
                    });
                }
                if !target_cost.is_finite() || !default_cost.is_finite() {
                    errors.push(ValidationError::NonFiniteCost("two-level cost".into()));
                }
            }
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// The equivalent single-subsystem instance over the augmented BCN:
    /// the input pair `(u, sigma)` becomes the single input
    /// `(sigma-1)M + u`, and constraints and cost are translated
    /// accordingly. The cost is materialized as a table, so this is
    /// meant for small models and cross-checks.
    pub fn to_augmented(&self) -> ProblemInstance {
        let n = self.model.state_count();
        let m = self.model.input_count();
        let z = self.model.subsystem_count();
        let aug_model = self.model.to_augmented_bcn();
        let zm = aug_model.input_count();

        let mut constraints = ConstraintSet::unconstrained();
        if let Some(cx) = self.constraints.cx() {
            constraints = constraints.with_cx(n, cx.iter());
        }
        let combine = |cu: Option<&[u32]>, cs: Option<&[u32]>| -> Option<Vec<u32>> {
            match (cu, cs) {
                (None, None) => None,
                _ => {
                    let us: Vec<u32> = cu.map(|s| s.to_vec()).unwrap_or_else(|| (1..=m).collect());
                    let ls: Vec<u32> = cs.map(|s| s.to_vec()).unwrap_or_else(|| (1..=z).collect());
                    let mut out = Vec::with_capacity(us.len() * ls.len());
                    for &l in &ls {
                        for &k in &us {
                            out.push((l - 1) * m + k);
                        }
                    }
                    out.sort_unstable();
                    Some(out)
                }
            }
        };
        if let Some(def) = combine(self.constraints.cu_default(), self.constraints.csigma_default())
        {
            constraints = constraints.with_cu_default(def);
        }
        let mut override_states: Vec<u32> = self
            .constraints
            .cu_overrides()
            .keys()
            .chain(self.constraints.csigma_overrides().keys())
            .copied()
            .collect();
        override_states.sort_unstable();
        override_states.dedup();
        for x in override_states {
            let set = combine(self.constraints.cu(x), self.constraints.csigma(x))
                .unwrap_or_else(|| (1..=zm).collect());
            constraints = constraints.with_cu_override(x, set);
        }

        let mut values = Vec::with_capacity((n * zm) as usize);
        for x in 1..=n {
            for l in 1..=z {
                for k in 1..=m {
                    values.push(self.cost.g(x, k, l));
                }
            }
        }
        let cost = StageCost::Table { values, input_count: zm, subsystem_count: 1 };

        ProblemInstance::new(aug_model, constraints, cost, self.x0)
    }
}
