//! Boolean expressions, their evaluation, and structure matrices.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::logic::LogicalMatrix;

/// Structure matrices are rejected above this arity: the truth-table
/// enumeration is 2^k columns and per-node fan-in in real networks is
/// small.
pub const MAX_STRUCTURE_VARS: usize = 20;

/// AST of a Boolean rule over named state/input variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BooleanExpr {
    Const(bool),
    Var(String),
    Not(Box<BooleanExpr>),
    And(Box<BooleanExpr>, Box<BooleanExpr>),
    Or(Box<BooleanExpr>, Box<BooleanExpr>),
    Xor(Box<BooleanExpr>, Box<BooleanExpr>),
    Imp(Box<BooleanExpr>, Box<BooleanExpr>),
    Iff(Box<BooleanExpr>, Box<BooleanExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprError {
    /// A variable referenced by the expression is absent from the
    /// assignment.
    MissingVariable(String),
    /// `var_order` does not cover exactly the expression's free
    /// variables.
    VarOrderMismatch,
    /// More variables than [`MAX_STRUCTURE_VARS`].
    TooManyVariables(usize),
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::MissingVariable(name) => {
                write!(f, "variable `{}` missing from assignment", name)
            }
            ExprError::VarOrderMismatch => {
                write!(f, "variable order does not match the expression's free variables")
            }
            ExprError::TooManyVariables(k) => write!(
                f,
                "{} variables exceed the structure-matrix limit of {}",
                k, MAX_STRUCTURE_VARS
            ),
        }
    }
}

impl BooleanExpr {
    /// Evaluates under a total assignment given as a lookup function.
    pub fn eval_with<F>(&self, lookup: &F) -> Result<bool, ExprError>
    where
        F: Fn(&str) -> Option<bool>,
    {
        Ok(match self {
            BooleanExpr::Const(b) => *b,
            BooleanExpr::Var(name) => {
                lookup(name).ok_or_else(|| ExprError::MissingVariable(name.clone()))?
            }
            BooleanExpr::Not(a) => !a.eval_with(lookup)?,
            BooleanExpr::And(a, b) => a.eval_with(lookup)? & b.eval_with(lookup)?,
            BooleanExpr::Or(a, b) => a.eval_with(lookup)? | b.eval_with(lookup)?,
            BooleanExpr::Xor(a, b) => a.eval_with(lookup)? ^ b.eval_with(lookup)?,
            BooleanExpr::Imp(a, b) => !a.eval_with(lookup)? | b.eval_with(lookup)?,
            BooleanExpr::Iff(a, b) => a.eval_with(lookup)? == b.eval_with(lookup)?,
        })
    }

    /// Evaluates under a total assignment of `(name, bit)` pairs.
    pub fn eval(&self, assignment: &[(&str, bool)]) -> Result<bool, ExprError> {
        self.eval_with(&|name| {
            assignment
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, b)| *b)
        })
    }

    /// Free variables, in first-appearance order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        self.collect_vars(&mut seen, &mut order);
        order
    }

    fn collect_vars(&self, seen: &mut BTreeSet<String>, order: &mut Vec<String>) {
        match self {
            BooleanExpr::Const(_) => {}
            BooleanExpr::Var(name) => {
                if seen.insert(name.clone()) {
                    order.push(name.clone());
                }
            }
            BooleanExpr::Not(a) => a.collect_vars(seen, order),
            BooleanExpr::And(a, b)
            | BooleanExpr::Or(a, b)
            | BooleanExpr::Xor(a, b)
            | BooleanExpr::Imp(a, b)
            | BooleanExpr::Iff(a, b) => {
                a.collect_vars(seen, order);
                b.collect_vars(seen, order);
            }
        }
    }
}

/// The 2 x 2^k logical matrix `M_f` with `M_f x_1 ... x_k = f(x_1, ..., x_k)`
/// under the unit-vector identification (1 ~ delta_2^1, 0 ~ delta_2^2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureMatrix {
    matrix: LogicalMatrix,
    var_order: Vec<String>,
}

impl StructureMatrix {
    pub fn matrix(&self) -> &LogicalMatrix {
        &self.matrix
    }

    pub fn var_order(&self) -> &[String] {
        &self.var_order
    }

    /// Arity k (number of variables).
    pub fn arity(&self) -> usize {
        self.var_order.len()
    }
}

/// Computes the structure matrix of `expr` by enumerating all 2^k
/// assignments in canonical delta order: the first variable varies
/// slowest and, within each variable, 1 (true) precedes 0.
///
/// `var_order` must cover exactly the expression's free variables.
pub fn structure_matrix(
    expr: &BooleanExpr,
    var_order: &[String],
) -> Result<StructureMatrix, ExprError> {
    let free_list = expr.free_vars();
    let free: BTreeSet<&str> = free_list.iter().map(|s| s.as_str()).collect();
    let given: BTreeSet<&str> = var_order.iter().map(|s| s.as_str()).collect();
    if free != given || given.len() != var_order.len() {
        return Err(ExprError::VarOrderMismatch);
    }
    let k = var_order.len();
    if k > MAX_STRUCTURE_VARS {
        return Err(ExprError::TooManyVariables(k));
    }
    let cols = 1usize << k;
    let mut col_index = Vec::with_capacity(cols);
    for j in 0..cols {
        // Bit t of j (MSB first) is 0 when variable t+1 is true.
        let value = expr.eval_with(&|name| {
            let t = var_order.iter().position(|v| v == name)?;
            Some((j >> (k - 1 - t)) & 1 == 0)
        })?;
        col_index.push(if value { 1 } else { 2 });
    }
    Ok(StructureMatrix {
        matrix: LogicalMatrix::new(2, col_index),
        var_order: var_order.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn var(name: &str) -> BooleanExpr {
        BooleanExpr::Var(name.to_string())
    }

    #[test]
    fn truth_tables() {
        let imp = BooleanExpr::Imp(Box::new(BooleanExpr::Const(true)), Box::new(BooleanExpr::Const(false)));
        assert_eq!(imp.eval(&[]), Ok(false));
        let xor = BooleanExpr::Xor(Box::new(BooleanExpr::Const(true)), Box::new(BooleanExpr::Const(true)));
        assert_eq!(xor.eval(&[]), Ok(false));
        let iff = BooleanExpr::Iff(Box::new(BooleanExpr::Const(false)), Box::new(BooleanExpr::Const(false)));
        assert_eq!(iff.eval(&[]), Ok(true));
    }

    #[test]
    fn missing_variable() {
        assert_eq!(
            var("A").eval(&[("B", true)]),
            Err(ExprError::MissingVariable("A".to_string()))
        );
    }

    #[test]
    fn structure_matrix_negation() {
        let m = structure_matrix(&BooleanExpr::Not(Box::new(var("x"))), &["x".to_string()]).unwrap();
        assert_eq!(m.matrix().col_indices(), &[2, 1]);
    }

    #[test]
    fn structure_matrix_conjunction() {
        let m = structure_matrix(
            &BooleanExpr::And(Box::new(var("x1")), Box::new(var("x2"))),
            &["x1".to_string(), "x2".to_string()],
        )
        .unwrap();
        assert_eq!(m.matrix().col_indices(), &[1, 2, 2, 2]);
    }

    #[test]
    fn structure_matrix_equivalence() {
        let m = structure_matrix(
            &BooleanExpr::Iff(Box::new(var("x1")), Box::new(var("x2"))),
            &["x1".to_string(), "x2".to_string()],
        )
        .unwrap();
        assert_eq!(m.matrix().col_indices(), &[1, 2, 2, 1]);
    }

    #[test]
    fn var_order_mismatch() {
        let e = BooleanExpr::And(Box::new(var("x1")), Box::new(var("x2")));
        assert_eq!(
            structure_matrix(&e, &["x1".to_string()]),
            Err(ExprError::VarOrderMismatch)
        );
    }

    /// Column soundness: for every expression with <= 4 variables and
    /// every assignment, the structure-matrix column agrees with eval.
    #[test]
    fn structure_matrix_sound_small() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let names = ["a".to_string(), "b".to_string(), "c".to_string(), "d".to_string()];
        for _ in 0..200 {
            let k = rng.gen_range(1..=4usize);
            let expr = random_expr(&mut rng, &names[..k], 4);
            let free = expr.free_vars();
            let m = match structure_matrix(&expr, &free) {
                Ok(m) => m,
                Err(ExprError::VarOrderMismatch) => unreachable!(),
                Err(e) => panic!("{e}"),
            };
            let kk = m.arity();
            for j in 0..(1usize << kk) {
                let assignment: Vec<(&str, bool)> = free
                    .iter()
                    .enumerate()
                    .map(|(t, name)| (name.as_str(), (j >> (kk - 1 - t)) & 1 == 0))
                    .collect();
                let want = expr.eval(&assignment).unwrap();
                let got = m.matrix().col(j as u32 + 1) == 1;
                assert_eq!(got, want, "expr {:?} column {}", expr, j + 1);
            }
        }
    }

    fn random_expr(rng: &mut impl rand::Rng, names: &[String], depth: usize) -> BooleanExpr {
        if depth == 0 || rng.gen_bool(0.3) {
            return var(&names[rng.gen_range(0..names.len())]);
        }
        let a = Box::new(random_expr(rng, names, depth - 1));
        let b = Box::new(random_expr(rng, names, depth - 1));
        match rng.gen_range(0..6) {
            0 => BooleanExpr::Not(a),
            1 => BooleanExpr::And(a, b),
            2 => BooleanExpr::Or(a, b),
            3 => BooleanExpr::Xor(a, b),
            4 => BooleanExpr::Imp(a, b),
            _ => BooleanExpr::Iff(a, b),
        }
    }
}
