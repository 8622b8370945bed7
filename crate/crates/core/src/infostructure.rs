//! Finite information structures: states, a prior, and one joint signal
//! distribution per state.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// How marginals are compared when building identification partitions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartitionMode {
    /// Exact rational equality.
    #[default]
    Exact,
    /// Marginals within total-variation distance `tau` are grouped
    /// (single linkage). Normalization checks also use `tau`.
    Tolerance { tau: f64 },
}

impl PartitionMode {
    pub const DEFAULT_TAU: f64 = 1e-9;
}

/// One failed check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub state: Option<usize>,
    pub agents: Option<(usize, usize)>,
    pub signals: Option<Vec<usize>>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            passed: violations.is_empty(),
            violations,
        }
    }
}

/// The triple (states, prior, per-state joint signal law).
///
/// Joint tensors are stored flattened in row-major order with the first
/// agent's signal as the slowest index. Agents and signals are 0-based here;
/// user-facing output numbers agents from 1.
#[derive(Clone, Debug)]
pub struct InfoStructure {
    states: Vec<String>,
    agent_labels: Vec<String>,
    signal_labels: Vec<Vec<String>>,
    prior: Vec<Rational>,
    alphabets: Vec<usize>,
    joint: Vec<Vec<Rational>>,
    mode: PartitionMode,

    strides: Vec<usize>,
    prior_f64: Vec<f64>,
    joint_f64: Vec<Vec<f64>>,
    marginals: Vec<Vec<Vec<Rational>>>,
    marginals_f64: Vec<Vec<Vec<f64>>>,
    report: ValidationReport,
}

impl PartialEq for InfoStructure {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.agent_labels == other.agent_labels
            && self.signal_labels == other.signal_labels
            && self.prior == other.prior
            && self.alphabets == other.alphabets
            && self.joint == other.joint
            && self.mode == other.mode
    }
}

impl InfoStructure {
    /// Builds a structure after checking shapes. Probability values are not
    /// checked here; call [`InfoStructure::validate`] for that.
    pub fn new(
        states: Vec<String>,
        prior: Vec<Rational>,
        alphabets: Vec<usize>,
        joint: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        Self::build(states, prior, alphabets, joint, PartitionMode::Exact, None, None)
    }

    /// Full constructor with labels and partition mode.
    pub fn build(
        states: Vec<String>,
        prior: Vec<Rational>,
        alphabets: Vec<usize>,
        joint: Vec<Vec<Rational>>,
        mode: PartitionMode,
        agent_labels: Option<Vec<String>>,
        signal_labels: Option<Vec<Vec<String>>>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Malformed("at least one state is required".into()));
        }
        if alphabets.is_empty() {
            return Err(Error::Malformed("at least one agent is required".into()));
        }
        if let Some(i) = alphabets.iter().position(|&k| k == 0) {
            return Err(Error::Malformed(format!("agent {} has an empty alphabet", i + 1)));
        }
        if prior.len() != states.len() {
            return Err(Error::Malformed(format!(
                "prior has {} entries for {} states",
                prior.len(),
                states.len()
            )));
        }
        if joint.len() != states.len() {
            return Err(Error::Malformed(format!(
                "{} joint tensors for {} states",
                joint.len(),
                states.len()
            )));
        }
        let size: usize = alphabets.iter().product();
        for (s, tensor) in joint.iter().enumerate() {
            if tensor.len() != size {
                return Err(Error::Malformed(format!(
                    "tensor for state {} has {} entries, expected {}",
                    states[s],
                    tensor.len(),
                    size
                )));
            }
        }
        {
            let mut seen = std::collections::HashSet::new();
            for s in &states {
                if !seen.insert(s) {
                    return Err(Error::Malformed(format!("duplicate state label {s:?}")));
                }
            }
        }
        if let PartitionMode::Tolerance { tau } = mode {
            if !(tau >= 0.0 && tau.is_finite()) {
                return Err(Error::Malformed(format!("tolerance must be finite and >= 0, got {tau}")));
            }
        }
        let l = alphabets.len();
        let agent_labels = agent_labels.unwrap_or_else(|| (1..=l).map(|i| i.to_string()).collect());
        if agent_labels.len() != l {
            return Err(Error::Malformed("agent label count differs from agent count".into()));
        }
        let signal_labels = signal_labels.unwrap_or_else(|| {
            alphabets
                .iter()
                .map(|&k| (0..k).map(|x| x.to_string()).collect())
                .collect()
        });
        if signal_labels.len() != l || signal_labels.iter().zip(&alphabets).any(|(s, &k)| s.len() != k) {
            return Err(Error::Malformed("signal labels do not match alphabets".into()));
        }

        let mut strides = vec![1usize; l];
        for i in (0..l.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * alphabets[i + 1];
        }
        let prior_f64 = prior.iter().map(rational::to_f64).collect();
        let joint_f64 = joint
            .iter()
            .map(|t| t.iter().map(rational::to_f64).collect())
            .collect();

        let mut info = InfoStructure {
            states,
            agent_labels,
            signal_labels,
            prior,
            alphabets,
            joint,
            mode,
            strides,
            prior_f64,
            joint_f64,
            marginals: Vec::new(),
            marginals_f64: Vec::new(),
            report: ValidationReport::from_violations(Vec::new()),
        };
        info.marginals = (0..info.num_states())
            .map(|s| (0..l).map(|a| info.compute_marginal(s, a)).collect())
            .collect();
        info.marginals_f64 = info
            .marginals
            .iter()
            .map(|per_agent| {
                per_agent
                    .iter()
                    .map(|m| m.iter().map(rational::to_f64).collect())
                    .collect()
            })
            .collect();
        info.report = info.compute_validation();
        Ok(info)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_agents(&self) -> usize {
        self.alphabets.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_label(&self, state: usize) -> &str {
        &self.states[state]
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    pub fn agent_labels(&self) -> &[String] {
        &self.agent_labels
    }

    pub fn signal_labels(&self) -> &[Vec<String>] {
        &self.signal_labels
    }

    pub fn alphabets(&self) -> &[usize] {
        &self.alphabets
    }

    pub fn alphabet(&self, agent: usize) -> usize {
        self.alphabets[agent]
    }

    pub fn prior(&self) -> &[Rational] {
        &self.prior
    }

    pub fn prior_f64(&self) -> &[f64] {
        &self.prior_f64
    }

    pub fn mode(&self) -> PartitionMode {
        self.mode
    }

    /// Flattened joint tensor of a state.
    pub fn joint(&self, state: usize) -> &[Rational] {
        &self.joint[state]
    }

    pub fn joint_f64(&self, state: usize) -> &[f64] {
        &self.joint_f64[state]
    }

    /// Number of joint signal profiles, `|X_1| * ... * |X_L|`.
    pub fn profile_count(&self) -> usize {
        self.alphabets.iter().product()
    }

    /// Signal of `agent` in the flattened joint index `flat`.
    pub fn signal_of(&self, flat: usize, agent: usize) -> usize {
        (flat / self.strides[agent]) % self.alphabets[agent]
    }

    pub fn flat_index(&self, signals: &[usize]) -> usize {
        signals.iter().zip(&self.strides).map(|(x, s)| x * s).sum()
    }

    /// True when every agent has exactly two signals and there are two agents.
    pub fn is_binary_pair(&self) -> bool {
        self.alphabets == [2, 2]
    }

    pub fn check_state(&self, state: usize) -> Result<()> {
        if state < self.num_states() {
            Ok(())
        } else {
            Err(Error::UnknownState(state))
        }
    }

    pub fn check_agent(&self, agent: usize) -> Result<()> {
        if agent < self.num_agents() {
            Ok(())
        } else {
            Err(Error::UnknownAgent(agent))
        }
    }

    pub fn validate(&self) -> &ValidationReport {
        &self.report
    }

    pub fn is_valid(&self) -> bool {
        self.report.passed
    }

    /// Fails with [`Error::Invalid`] naming the first violation.
    pub fn ensure_valid(&self) -> Result<()> {
        match self.report.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::Invalid(v.message.clone())),
        }
    }

    /// Marginal of `agent`'s signal in `state`.
    pub fn marginal(&self, state: usize, agent: usize) -> Result<&[Rational]> {
        self.check_state(state)?;
        self.check_agent(agent)?;
        Ok(&self.marginals[state][agent])
    }

    pub fn marginal_f64(&self, state: usize, agent: usize) -> &[f64] {
        &self.marginals_f64[state][agent]
    }

    /// Joint law of the signals of two distinct agents, rows indexed by
    /// `first`'s signal.
    pub fn pairwise_marginal(&self, state: usize, first: usize, second: usize) -> Result<Vec<Vec<Rational>>> {
        self.check_state(state)?;
        self.check_agent(first)?;
        self.check_agent(second)?;
        if first == second {
            return Err(Error::SameAgent(first));
        }
        let mut out = vec![vec![Rational::zero(); self.alphabets[second]]; self.alphabets[first]];
        for (flat, p) in self.joint[state].iter().enumerate() {
            out[self.signal_of(flat, first)][self.signal_of(flat, second)] += p;
        }
        Ok(out)
    }

    fn compute_marginal(&self, state: usize, agent: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.alphabets[agent]];
        for (flat, p) in self.joint[state].iter().enumerate() {
            out[self.signal_of(flat, agent)] += p;
        }
        out
    }

    fn sums_to_one(&self, total: &Rational) -> bool {
        match self.mode {
            PartitionMode::Exact => total.is_one(),
            PartitionMode::Tolerance { tau } => (rational::to_f64(total) - 1.0).abs() <= tau,
        }
    }

    fn compute_validation(&self) -> ValidationReport {
        let mut v = Vec::new();
        let push = |v: &mut Vec<Violation>, check: &str, state, agents, signals, message: String| {
            v.push(Violation {
                check: check.into(),
                state,
                agents,
                signals,
                message,
            })
        };
        if self.num_agents() < 2 {
            push(
                &mut v,
                "agent_count",
                None,
                None,
                None,
                format!("{} agent(s); at least 2 are required", self.num_agents()),
            );
        }
        for (s, p) in self.prior.iter().enumerate() {
            if p.is_negative() {
                push(&mut v, "prior_nonnegative", Some(s), None, None, format!("prior of state {} is negative", self.states[s]));
            } else if p.is_zero() {
                push(&mut v, "prior_full_support", Some(s), None, None, format!("prior not full support: state {} has zero prior", self.states[s]));
            }
        }
        let total = rational::sum(&self.prior);
        if !self.sums_to_one(&total) {
            push(&mut v, "prior_normalized", None, None, None, format!("prior sums to {}, not 1", rational::format(&total)));
        }
        for s in 0..self.num_states() {
            let tensor = &self.joint[s];
            if let Some(flat) = tensor.iter().position(|p| p.is_negative()) {
                let signals: Vec<usize> = (0..self.num_agents()).map(|a| self.signal_of(flat, a)).collect();
                push(
                    &mut v,
                    "tensor_nonnegative",
                    Some(s),
                    None,
                    Some(signals.clone()),
                    format!("state {}: negative probability at signals {:?}", self.states[s], signals),
                );
            }
            let total = rational::sum(tensor);
            if !self.sums_to_one(&total) {
                push(
                    &mut v,
                    "tensor_normalized",
                    Some(s),
                    None,
                    None,
                    format!("state {}: joint distribution sums to {}, not 1", self.states[s], rational::format(&total)),
                );
            }
            for a in 0..self.num_agents() {
                for b in a + 1..self.num_agents() {
                    let pair = self.pairwise_marginal(s, a, b).expect("indices checked");
                    for (x, row) in pair.iter().enumerate() {
                        for (y, p) in row.iter().enumerate() {
                            if !p.is_positive() {
                                push(
                                    &mut v,
                                    "pairwise_full_support",
                                    Some(s),
                                    Some((a, b)),
                                    Some(vec![x, y]),
                                    format!(
                                        "state {}: agents {}-{} never observe signals ({}, {}) together",
                                        self.states[s],
                                        a + 1,
                                        b + 1,
                                        x,
                                        y
                                    ),
                                );
                            }
                        }
                    }
                }
            }
        }
        ValidationReport::from_violations(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example1;
    use crate::rational::ratio;

    fn two_state(tensor: [(i64, i64); 4]) -> InfoStructure {
        InfoStructure::new(
            vec!["a".into(), "b".into()],
            vec![ratio(1, 2), ratio(1, 2)],
            vec![2, 2],
            vec![
                tensor.iter().map(|&(n, d)| ratio(n, d)).collect(),
                vec![ratio(1, 4); 4],
            ],
        )
        .unwrap()
    }

    #[test]
    fn example1_validates() {
        let info = example1::structure();
        assert!(info.validate().passed, "{:?}", info.validate());
    }

    #[test]
    fn perfect_correlation_is_flagged() {
        let info = two_state([(1, 2), (0, 1), (0, 1), (1, 2)]);
        let r = info.validate();
        assert!(!r.passed);
        let v = r
            .violations
            .iter()
            .find(|v| v.check == "pairwise_full_support" && v.signals == Some(vec![0, 1]))
            .expect("violation at signals (0,1)");
        assert_eq!(v.state, Some(0));
        assert_eq!(v.agents, Some((0, 1)));
    }

    #[test]
    fn zero_prior_is_flagged() {
        let info = InfoStructure::new(
            vec!["a".into(), "b".into()],
            vec![ratio(1, 1), ratio(0, 1)],
            vec![2, 2],
            vec![vec![ratio(1, 4); 4], vec![ratio(1, 4); 4]],
        )
        .unwrap();
        let r = info.validate();
        assert!(!r.passed);
        assert!(r.violations.iter().any(|v| v.message.contains("prior not full support")));
    }

    #[test]
    fn unnormalized_tensor_names_state() {
        let info = two_state([(1, 4), (1, 4), (1, 4), (1, 8)]);
        let r = info.validate();
        let v = r.violations.iter().find(|v| v.check == "tensor_normalized").unwrap();
        assert_eq!(v.state, Some(0));
        assert!(v.message.contains("state a"));
    }

    #[test]
    fn shape_errors() {
        let err = InfoStructure::new(vec!["a".into()], vec![ratio(1, 1)], vec![2, 2], vec![vec![ratio(1, 4); 3]]);
        assert!(matches!(err, Err(Error::Malformed(_))));
        let err = InfoStructure::new(vec![], vec![], vec![2, 2], vec![]);
        assert!(err.is_err());
        let err = InfoStructure::new(vec!["a".into()], vec![ratio(1, 1)], vec![0, 2], vec![vec![]]);
        assert!(err.is_err());
    }

    #[test]
    fn marginals_of_example1() {
        let info = example1::structure();
        assert_eq!(info.marginal(0, 0).unwrap(), &[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(info.marginal(3, 0).unwrap(), &[ratio(3, 5), ratio(2, 5)]);
        assert_eq!(info.marginal(2, 0).unwrap(), &[ratio(2, 3), ratio(1, 3)]);
        assert_eq!(info.marginal(1, 1).unwrap(), &[ratio(2, 3), ratio(1, 3)]);
        assert!(matches!(info.marginal(4, 0), Err(Error::UnknownState(4))));
        assert!(matches!(info.marginal(0, 2), Err(Error::UnknownAgent(2))));
    }

    #[test]
    fn pairwise_marginals() {
        let info = example1::structure();
        assert_eq!(
            info.pairwise_marginal(0, 0, 1).unwrap(),
            vec![vec![ratio(3, 8), ratio(1, 8)], vec![ratio(1, 8), ratio(3, 8)]]
        );
        assert_eq!(
            info.pairwise_marginal(3, 0, 1).unwrap(),
            vec![vec![ratio(2, 5), ratio(1, 5)], vec![ratio(1, 5), ratio(1, 5)]]
        );
        assert!(matches!(info.pairwise_marginal(0, 1, 1), Err(Error::SameAgent(1))));

        // a three-agent uniform product marginalizes to a uniform pair
        let info = InfoStructure::new(
            vec!["s".into()],
            vec![ratio(1, 1)],
            vec![2, 3, 2],
            vec![vec![ratio(1, 12); 12]],
        )
        .unwrap();
        assert!(info.validate().passed);
        let pair = info.pairwise_marginal(0, 0, 2).unwrap();
        assert!(pair.iter().flatten().all(|p| *p == ratio(1, 4)));
    }
}
