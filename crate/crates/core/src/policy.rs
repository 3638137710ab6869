//! State-feedback synthesis from a minimum-mean cycle and its
//! transient, closed-loop simulation, and average-cost certification.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::mmc::MmcResult;
use crate::model::ProblemInstance;
use crate::ostg::Ostg;

#[derive(Clone, Debug, PartialEq)]
pub enum PolicyError {
    /// The closed loop reached a state with no assigned gain column.
    FreeStateVisited(u32),
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::FreeStateVisited(x) => {
                write!(f, "closed loop visited free state {}", x)
            }
        }
    }
}

/// Partial gain columns: states on the transient or cycle get the
/// action of their outgoing optimal edge; every other graph vertex is
/// explicitly free (never silently filled).
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackLaw {
    pub ku: BTreeMap<u32, u32>,
    pub ksigma: BTreeMap<u32, u32>,
    pub free_states: Vec<u32>,
    pub mu_star: f64,
    pub cycle: Vec<u32>,
    pub transient: Vec<u32>,
}

/// Builds the gain columns from the solver output: each trajectory
/// state maps to the action of the OSTG edge toward its successor,
/// with the cycle wrapping back to its first vertex.
pub fn synthesize(ostg: &Ostg, mmc: &MmcResult) -> FeedbackLaw {
    let mut law = FeedbackLaw {
        ku: BTreeMap::new(),
        ksigma: BTreeMap::new(),
        free_states: Vec::new(),
        mu_star: mmc.mu_star,
        cycle: mmc.cycle.clone(),
        transient: mmc.transient.clone(),
    };
    assign_path_gains(ostg, &mmc.transient, &mut law);
    assign_path_gains(ostg, &mmc.cycle, &mut law);
    law.free_states = ostg
        .vertices()
        .iter()
        .copied()
        .filter(|v| !law.ku.contains_key(v))
        .collect();
    law.free_states.sort_unstable();
    law
}

pub(crate) fn assign_path_gains(ostg: &Ostg, path: &[u32], law: &mut FeedbackLaw) {
    for pair in path.windows(2) {
        let e = ostg
            .edge(pair[0], pair[1])
            .expect("trajectory edge missing from the graph");
        law.ku.insert(e.from, e.input);
        law.ksigma.insert(e.from, e.subsystem);
    }
}

/// Runs the closed loop for `horizon` steps; returns the `horizon + 1`
/// visited states and the running average cost (0 for an empty
/// horizon).
pub fn simulate(
    instance: &ProblemInstance,
    law: &FeedbackLaw,
    horizon: u32,
) -> Result<(Vec<u32>, f64), PolicyError> {
    let mut x = instance.x0;
    let mut trajectory = Vec::with_capacity(horizon as usize + 1);
    trajectory.push(x);
    let mut total = 0.0;
    for _ in 0..horizon {
        let (&u, &sigma) = match (law.ku.get(&x), law.ksigma.get(&x)) {
            (Some(u), Some(s)) => (u, s),
            _ => return Err(PolicyError::FreeStateVisited(x)),
        };
        total += instance.cost.g(x, u, sigma);
        x = instance.model.step(x, u, sigma);
        trajectory.push(x);
    }
    let avg = if horizon == 0 { 0.0 } else { total / horizon as f64 };
    Ok((trajectory, avg))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertEntry {
    pub horizon: u32,
    pub average: f64,
    pub deviation: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertReport {
    pub mu_star: f64,
    pub entries: Vec<CertEntry>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }
}

/// Certifies |avg(T) - mu*| <= max|g| * (|transient| + |cycle|) / T at
/// each horizon: the transient contributes a one-off O(1) cost and the
/// partial final cycle another, so the deviation is O(1/T).
pub fn certify_average(
    instance: &ProblemInstance,
    law: &FeedbackLaw,
    horizons: &[u32],
    tolerance: f64,
) -> Result<CertReport, PolicyError> {
    let k = instance.cost.max_abs() * (law.transient.len() + law.cycle.len()) as f64;
    let mut entries = Vec::with_capacity(horizons.len());
    for &t in horizons {
        assert!(t > 0, "certification horizon must be positive");
        let (_, avg) = simulate(instance, law, t)?;
        let deviation = (avg - law.mu_star).abs();
        let bound = k / t as f64;
        entries.push(CertEntry {
            horizon: t,
            average: avg,
            deviation,
            bound,
            ok: deviation <= bound + tolerance,
        });
    }
    Ok(CertReport { mu_star: law.mu_star, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmc;
    use crate::model::{ConstraintSet, ProblemInstance, StageCost};
    use crate::ostg::build_ostg;
    use crate::testutil;
    use alloc::vec;

    fn example1_law() -> (ProblemInstance, FeedbackLaw) {
        let instance = testutil::example1_instance();
        let g = build_ostg(&instance).unwrap();
        let r = mmc::solve(&g).unwrap();
        (instance, synthesize(&g, &r))
    }

    #[test]
    fn example1_gain_columns() {
        let (_, law) = example1_law();
        let ku: Vec<(u32, u32)> = law.ku.iter().map(|(&a, &b)| (a, b)).collect();
        let ks: Vec<(u32, u32)> = law.ksigma.iter().map(|(&a, &b)| (a, b)).collect();
        assert_eq!(ku, vec![(1, 1), (2, 2), (5, 2), (7, 2), (8, 2)]);
        assert_eq!(ks, vec![(1, 1), (2, 1), (5, 1), (7, 1), (8, 2)]);
        assert_eq!(law.free_states, vec![3, 6]);
    }

    #[test]
    fn single_self_loop_law() {
        let model = testutil::example1_model();
        // force the trivial graph by constraining to the fixed point of
        // subsystem 1 under u = delta_2^1 at state 7: 7 -> 7
        let instance = ProblemInstance::new(
            model,
            ConstraintSet::unconstrained()
                .with_cx(8, [7])
                .with_csigma_default([1])
                .with_cu_default([1]),
            testutil::example1_cost(),
            7,
        );
        let g = build_ostg(&instance).unwrap();
        let r = mmc::solve(&g).unwrap();
        let law = synthesize(&g, &r);
        assert_eq!(law.ku.len(), 1);
        assert_eq!(law.ksigma.len(), 1);
        assert!(law.free_states.is_empty());
    }

    #[test]
    fn example1_trajectory() {
        let (instance, law) = example1_law();
        let (traj, _) = simulate(&instance, &law, 7).unwrap();
        assert_eq!(traj, vec![1, 7, 8, 2, 5, 7, 8, 2]);
        // transient then endlessly repeated cycle
        let (long, _) = simulate(&instance, &law, 41).unwrap();
        let mut expected = law.transient.clone();
        let mut i = 1;
        while expected.len() < long.len() {
            expected.push(law.cycle[i]);
            i = if i == law.cycle.len() - 1 { 1 } else { i + 1 };
        }
        assert_eq!(long, expected);
    }

    #[test]
    fn zero_horizon() {
        let (instance, law) = example1_law();
        let (traj, avg) = simulate(&instance, &law, 0).unwrap();
        assert_eq!(traj, vec![1]);
        assert_eq!(avg, 0.0);
    }

    #[test]
    fn free_state_refused() {
        let (instance, law) = example1_law();
        let mut moved = instance.clone();
        moved.x0 = 3; // free state
        assert_eq!(
            simulate(&moved, &law, 5),
            Err(PolicyError::FreeStateVisited(3))
        );
    }

    #[test]
    fn average_converges() {
        let (instance, law) = example1_law();
        let report = certify_average(&instance, &law, &[10, 100, 1000], 1e-12).unwrap();
        assert!(report.passed());
        let last = report.entries.last().unwrap();
        assert!(last.deviation < 0.05);
    }

    #[test]
    fn zero_cost_average_is_exact() {
        let instance = ProblemInstance::new(
            testutil::example1_model(),
            testutil::example1_constraints(),
            StageCost::quadratic(vec![0.0; 8], vec![0.0; 2], vec![0.0; 2]),
            1,
        );
        let g = build_ostg(&instance).unwrap();
        let r = mmc::solve(&g).unwrap();
        let law = synthesize(&g, &r);
        for t in [1, 7, 33] {
            let (_, avg) = simulate(&instance, &law, t).unwrap();
            assert_eq!(avg, 0.0);
            assert_eq!(law.mu_star, 0.0);
        }
    }
}
