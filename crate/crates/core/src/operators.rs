//! Belief operators at a fixed horizon.
//!
//! [`Horizon`] holds everything needed at one `t`: own-count posteriors,
//! own-count laws, and lazily the joint count laws and each agent's
//! conditional weights `P(θ, c_-l | c_l)`.

use std::sync::OnceLock;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::counts::{CountProfile, CountVector, LogFactorials, ProfileSpace};
use crate::engine::{self, EngineConfig, PairKernel, VectorLaw};
use crate::error::{Error, Result};
use crate::events::{EpistemicEvent, Provenance};
use crate::infostructure::InfoStructure;
use crate::parallel;
use crate::rational::{self, Rational};

/// Iteration rule for common belief.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommonBeliefRule {
    /// `X_1 = B(F)`, `X_{n+1} = B(X_n)`; the result is `∩_n X_n`.
    #[default]
    Literal,
    /// `X_1 = B(F)`, `X_{n+1} = B(F ∩ X_n)` until stable.
    Conjunctive,
}

#[derive(Clone, Debug)]
pub struct CommonBelief {
    pub event: EpistemicEvent,
    /// Number of distinct iterates computed.
    pub iterations: usize,
    pub rule: CommonBeliefRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub state: usize,
    pub profile: CountProfile,
    /// Each agent's belief in the event at this point; `None` when the
    /// agent's own counts have probability zero.
    pub beliefs: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub is_evident: bool,
    pub q: f64,
    pub slack: f64,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
}

/// Per-agent conditional weights, normalized within each own-count slice.
struct Conditional {
    /// `w[state * P + profile]`.
    weights: Vec<f64>,
    /// Own-count slices of probability zero under every state.
    null: Vec<bool>,
}

pub struct Horizon<'a> {
    info: &'a InfoStructure,
    t: u32,
    config: EngineConfig,
    slack: f64,
    space: ProfileSpace,
    lf: LogFactorials,
    own: Vec<Vec<u32>>,
    /// `posteriors[agent][own index]`.
    posteriors: Vec<Vec<Option<Vec<f64>>>>,
    /// `own_laws[state][agent]`.
    own_laws: Vec<Vec<VectorLaw>>,
    joint: Vec<OnceLock<Vec<f64>>>,
    conditional: Vec<OnceLock<Conditional>>,
}

impl<'a> Horizon<'a> {
    pub fn new(info: &'a InfoStructure, t: u32, config: EngineConfig) -> Result<Self> {
        config.check_horizon(t)?;
        let profiles = ProfileSpace::size_bound(t, info.alphabets());
        if profiles > config.profile_budget {
            return Err(Error::Capacity {
                what: format!("count profiles Π(t+1)^(|X_l|-1) at t={t}"),
                needed: profiles,
                budget: config.profile_budget,
            });
        }
        let space = ProfileSpace::new(t, info.alphabets());
        let lf = LogFactorials::new(t);
        let l = info.num_agents();
        let own = (0..l).map(|a| space.own_indices(a)).collect();
        let posteriors = (0..l)
            .map(|a| {
                space
                    .agent_space(a)
                    .vectors()
                    .iter()
                    .map(|v| engine::posterior_unchecked(info, a, v.counts()))
                    .collect()
            })
            .collect();
        let own_laws = (0..info.num_states())
            .map(|s| {
                (0..l)
                    .map(|a| engine::own_count_law_unchecked(info.marginal_f64(s, a), t, &lf))
                    .collect()
            })
            .collect();
        Ok(Horizon {
            info,
            t,
            config,
            slack: 0.0,
            space,
            lf,
            own,
            posteriors,
            own_laws,
            joint: (0..info.num_states()).map(|_| OnceLock::new()).collect(),
            conditional: (0..l).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Beliefs count as `≥ q` when they are at least `q - slack`.
    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = slack;
        self
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }

    pub fn horizon(&self) -> u32 {
        self.t
    }

    pub fn info(&self) -> &InfoStructure {
        self.info
    }

    pub fn space(&self) -> &ProfileSpace {
        &self.space
    }

    pub fn own_law(&self, state: usize, agent: usize) -> &VectorLaw {
        &self.own_laws[state][agent]
    }

    /// Posterior of `agent` at own count index `i`; `None` if impossible.
    pub fn own_posterior(&self, agent: usize, i: usize) -> Option<&[f64]> {
        self.posteriors[agent][i].as_deref()
    }

    /// Log-probabilities of every profile under `state`.
    pub fn joint_log_probs(&self, state: usize) -> Result<&[f64]> {
        self.info.check_state(state)?;
        self.config.check_joint(self.info, self.t)?;
        Ok(self.joint[state].get_or_init(|| engine::joint_log_probs(self.info, state, &self.space, &self.lf)))
    }

    fn conditional(&self, agent: usize) -> Result<&Conditional> {
        if let Some(c) = self.conditional[agent].get() {
            return Ok(c);
        }
        let n = self.info.num_states();
        let logs: Vec<&[f64]> = (0..n).map(|s| self.joint_log_probs(s)).collect::<Result<_>>()?;
        Ok(self.conditional[agent].get_or_init(|| {
            let p = self.space.len();
            let slices = self.space.agent_space(agent).len();
            let own = &self.own[agent];
            let mut max = vec![f64::NEG_INFINITY; slices];
            for (s, lp) in logs.iter().enumerate() {
                let prior = self.info.prior_f64()[s].ln();
                for (j, &x) in lp.iter().enumerate() {
                    let v = prior + x;
                    let m = &mut max[own[j] as usize];
                    if v > *m {
                        *m = v;
                    }
                }
            }
            let mut weights = vec![0.0; n * p];
            let mut total = vec![0.0; slices];
            for (s, lp) in logs.iter().enumerate() {
                let prior = self.info.prior_f64()[s].ln();
                for (j, &x) in lp.iter().enumerate() {
                    let i = own[j] as usize;
                    if max[i] > f64::NEG_INFINITY {
                        let w = (prior + x - max[i]).exp();
                        weights[s * p + j] = w;
                        total[i] += w;
                    }
                }
            }
            for s in 0..n {
                for j in 0..p {
                    let z = total[own[j] as usize];
                    if z > 0.0 {
                        weights[s * p + j] /= z;
                    }
                }
            }
            Conditional {
                weights,
                null: total.iter().map(|&z| z <= 0.0).collect(),
            }
        }))
    }

    fn check_event(&self, f: &EpistemicEvent) -> Result<()> {
        if f.horizon() != self.t {
            return Err(Error::HorizonMismatch {
                expected: self.t,
                found: f.horizon(),
            });
        }
        if f.num_states() != self.info.num_states() || f.alphabets() != self.info.alphabets() {
            return Err(Error::InvalidArgument("event does not match the structure".into()));
        }
        Ok(())
    }

    fn check_q(q: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!("q must lie in [0, 1], got {q}")));
        }
        Ok(())
    }

    /// Membership count of `f` in each own-count slice of `agent`, and the
    /// slice size (over all states).
    fn slice_counts(&self, agent: usize, f: &EpistemicEvent) -> (Vec<usize>, usize) {
        let slices = self.space.agent_space(agent).len();
        let own = &self.own[agent];
        let mut inside = vec![0usize; slices];
        for s in 0..self.info.num_states() {
            for (j, &m) in f.slice(s).iter().enumerate() {
                if m {
                    inside[own[j] as usize] += 1;
                }
            }
        }
        (inside, self.info.num_states() * self.space.len() / slices)
    }

    /// `P(F | c_l)` for each own count index of `agent`.
    pub fn beliefs(&self, agent: usize, f: &EpistemicEvent) -> Result<Vec<Option<f64>>> {
        self.info.check_agent(agent)?;
        self.check_event(f)?;
        if let Some(mask) = f.state_projection() {
            return Ok(self.posteriors[agent]
                .iter()
                .map(|post| {
                    post.as_ref()
                        .map(|p| p.iter().zip(&mask).filter(|(_, &m)| m).map(|(x, _)| x).sum())
                })
                .collect());
        }
        let cond = self.conditional(agent)?;
        let own = &self.own[agent];
        let p = self.space.len();
        let mut acc = vec![0.0; self.space.agent_space(agent).len()];
        for s in 0..self.info.num_states() {
            let w = &cond.weights[s * p..(s + 1) * p];
            for (j, &m) in f.slice(s).iter().enumerate() {
                if m {
                    acc[own[j] as usize] += w[j];
                }
            }
        }
        Ok(acc
            .into_iter()
            .zip(&cond.null)
            .map(|(b, &null)| (!null).then_some(b))
            .collect())
    }

    /// Own count indices at which `agent` believes `f` with probability at
    /// least `q`.
    pub fn belief_set(&self, agent: usize, q: f64, f: &EpistemicEvent) -> Result<Vec<bool>> {
        Self::check_q(q)?;
        self.info.check_agent(agent)?;
        self.check_event(f)?;
        let (inside, size) = self.slice_counts(agent, f);
        if q <= 0.0 {
            return Ok(vec![true; inside.len()]);
        }
        // slices entirely inside or outside F are decided without arithmetic
        let needs_values = inside.iter().any(|&n| n > 0 && n < size);
        let beliefs = if needs_values {
            self.beliefs(agent, f)?
        } else {
            vec![None; inside.len()]
        };
        Ok(inside
            .iter()
            .zip(beliefs)
            .map(|(&n, b)| {
                if n == size {
                    true
                } else if n == 0 {
                    false
                } else {
                    b.is_some_and(|b| b >= q - self.slack)
                }
            })
            .collect())
    }

    fn cylinder(&self, agent: usize, set: &[bool]) -> EpistemicEvent {
        let own = &self.own[agent];
        EpistemicEvent::from_fn(&self.space, self.info.num_states(), Provenance::BeliefImage, |_, p| {
            set[own[p] as usize]
        })
    }

    fn product(&self, sets: &[Vec<bool>], provenance: Provenance) -> EpistemicEvent {
        EpistemicEvent::from_fn(&self.space, self.info.num_states(), provenance, |_, p| {
            sets.iter().enumerate().all(|(a, set)| set[self.own[a][p] as usize])
        })
    }

    pub fn individual_belief_operator(&self, q: f64, agent: usize, f: &EpistemicEvent) -> Result<EpistemicEvent> {
        let set = self.belief_set(agent, q, f)?;
        Ok(self.cylinder(agent, &set))
    }

    fn mutual_sets(&self, q: f64, f: &EpistemicEvent) -> Result<Vec<Vec<bool>>> {
        (0..self.info.num_agents()).map(|a| self.belief_set(a, q, f)).collect()
    }

    pub fn mutual_belief_operator(&self, q: f64, f: &EpistemicEvent) -> Result<EpistemicEvent> {
        let sets = self.mutual_sets(q, f)?;
        Ok(self.product(&sets, Provenance::BeliefImage))
    }

    /// Common q-belief. Mutual-belief images are products of own-count sets,
    /// so iterates are tracked per agent. The literal rule stops once an
    /// iterate repeats an earlier one: later iterates then cycle through
    /// sets already intersected.
    pub fn common_belief_event(&self, q: f64, f: &EpistemicEvent, rule: CommonBeliefRule) -> Result<CommonBelief> {
        Self::check_q(q)?;
        self.check_event(f)?;
        let mut x = self.mutual_sets(q, f)?;
        let mut iterations = 1;
        let result = match rule {
            CommonBeliefRule::Literal => {
                let mut running = x.clone();
                let mut seen = vec![x.clone()];
                loop {
                    let next = self.mutual_sets(q, &self.product(&x, Provenance::BeliefImage))?;
                    if seen.contains(&next) {
                        break;
                    }
                    iterations += 1;
                    for (r, n) in running.iter_mut().zip(&next) {
                        r.iter_mut().zip(n).for_each(|(r, &n)| *r &= n);
                    }
                    seen.push(next.clone());
                    x = next;
                }
                running
            }
            CommonBeliefRule::Conjunctive => loop {
                let g = f.intersect(&self.product(&x, Provenance::BeliefImage))?;
                let next = self.mutual_sets(q, &g)?;
                if next == x {
                    break x;
                }
                iterations += 1;
                x = next;
            },
        };
        Ok(CommonBelief {
            event: self.product(&result, Provenance::CommonBelief),
            iterations,
            rule,
        })
    }

    /// Checks `F ⊆ B^q_t(F)`, reporting up to `max_witnesses` points of
    /// `F \ B^q_t(F)`.
    pub fn is_q_evident(&self, q: f64, f: &EpistemicEvent, max_witnesses: usize) -> Result<EvidenceReport> {
        Self::check_q(q)?;
        self.check_event(f)?;
        let sets = self.mutual_sets(q, f)?;
        let mut violations = 0;
        let mut points = Vec::new();
        for s in 0..self.info.num_states() {
            for (j, &m) in f.slice(s).iter().enumerate() {
                if m && !(0..sets.len()).all(|a| sets[a][self.own[a][j] as usize]) {
                    violations += 1;
                    if points.len() < max_witnesses {
                        points.push((s, j));
                    }
                }
            }
        }
        let witnesses = if points.is_empty() {
            Vec::new()
        } else {
            let beliefs: Vec<Vec<Option<f64>>> = (0..sets.len()).map(|a| self.beliefs(a, f)).collect::<Result<_>>()?;
            points
                .into_iter()
                .map(|(s, j)| Witness {
                    state: s,
                    profile: self.space.profile(j),
                    beliefs: (0..sets.len()).map(|a| beliefs[a][self.own[a][j] as usize]).collect(),
                })
                .collect()
        };
        Ok(EvidenceReport {
            is_evident: violations == 0,
            q,
            slack: self.slack,
            violations,
            witnesses,
        })
    }

    /// `P(F)` under the prior, or `P^θ(F)` when `conditioning` is a state.
    pub fn event_probability(&self, f: &EpistemicEvent, conditioning: Option<usize>) -> Result<f64> {
        self.check_event(f)?;
        match conditioning {
            Some(s) => {
                self.info.check_state(s)?;
                self.conditional_probability(f, s)
            }
            None => {
                let mut total = 0.0;
                for s in 0..self.info.num_states() {
                    total += self.info.prior_f64()[s] * self.conditional_probability(f, s)?;
                }
                Ok(total)
            }
        }
    }

    fn conditional_probability(&self, f: &EpistemicEvent, state: usize) -> Result<f64> {
        let row = f.slice(state);
        if row.iter().all(|&m| m) {
            return Ok(1.0);
        }
        if !row.iter().any(|&m| m) {
            return Ok(0.0);
        }
        for a in 0..self.info.num_agents() {
            if let Some(set) = f.own_projection(&self.space, state, a) {
                let law = &self.own_laws[state][a];
                return Ok(set
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| m)
                    .map(|(i, _)| law.prob(i))
                    .sum());
            }
        }
        let lp = self.joint_log_probs(state)?;
        Ok(row
            .iter()
            .zip(lp)
            .filter(|(&m, _)| m)
            .map(|(_, l)| l.exp())
            .sum())
    }

    pub fn state_event(&self, set: &[usize]) -> Result<EpistemicEvent> {
        let mask = state_mask(self.info, set)?;
        Ok(EpistemicEvent::from_fn(
            &self.space,
            self.info.num_states(),
            Provenance::StateCylinder,
            |s, _| mask[s],
        ))
    }

    /// `I_tε(θ)`: every agent's empirical measure within TV distance `ε` of
    /// its marginal under `state`, for all states.
    pub fn empirical_ball_event(&self, epsilon: f64, state: usize) -> Result<EpistemicEvent> {
        self.identified_ball_event(epsilon, &[state])
    }

    /// `I_tε(Q) = ∪_{θ∈Q} I_tε(θ)`.
    pub fn identified_ball_event(&self, epsilon: f64, set: &[usize]) -> Result<EpistemicEvent> {
        let mask = state_mask(self.info, set)?;
        let balls: Vec<Vec<Vec<bool>>> = (0..self.info.num_states())
            .filter(|&s| mask[s])
            .map(|s| ball_sets(self.info, self.t, epsilon, s))
            .collect::<Result<_>>()?;
        Ok(EpistemicEvent::from_fn(
            &self.space,
            self.info.num_states(),
            Provenance::IBall,
            |_, p| {
                balls
                    .iter()
                    .any(|sets| sets.iter().enumerate().all(|(a, set)| set[self.own[a][p] as usize]))
            },
        ))
    }
}

pub(crate) fn state_mask(info: &InfoStructure, set: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; info.num_states()];
    for &s in set {
        info.check_state(s)?;
        mask[s] = true;
    }
    Ok(mask)
}

pub(crate) fn epsilon_exact(epsilon: f64) -> Result<Rational> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    rational::decimal_of_f64(epsilon)
}

/// True when `‖c/t − φ‖_TV ≤ ε`, decided exactly.
pub fn in_ball(c: &CountVector, marginal: &[Rational], epsilon: &Rational) -> bool {
    let t = Rational::from_integer(c.horizon().into());
    let mut total = Rational::from_integer(0.into());
    for (&n, p) in c.counts().iter().zip(marginal) {
        total += (Rational::from_integer(n.into()) - p * &t).abs();
    }
    total <= epsilon * t * Rational::from_integer(2.into())
}

/// For each agent, the own count indices inside the ε-ball around the
/// agent's marginal under `state`.
pub fn ball_sets(info: &InfoStructure, t: u32, epsilon: f64, state: usize) -> Result<Vec<Vec<bool>>> {
    info.check_state(state)?;
    if t == 0 {
        return Err(Error::InvalidArgument("empirical measures need t >= 1".into()));
    }
    let eps = epsilon_exact(epsilon)?;
    Ok((0..info.num_agents())
        .map(|a| {
            let m = info.marginal(state, a).unwrap();
            crate::counts::CountSpace::new(t, info.alphabet(a))
                .vectors()
                .iter()
                .map(|c| in_ball(c, m, &eps))
                .collect()
        })
        .collect())
}

/// `P^θ(I_tε(Q))`. Two binary agents use the closed-form profile law over
/// the ball region only, up to `config.search_cap`; other structures go
/// through the full joint law.
pub fn ball_probability(
    info: &InfoStructure,
    state: usize,
    t: u32,
    epsilon: f64,
    set: &[usize],
    config: &EngineConfig,
) -> Result<f64> {
    info.check_state(state)?;
    let mask = state_mask(info, set)?;
    if !info.is_binary_pair() {
        let h = Horizon::new(info, t, *config)?;
        let f = h.identified_ball_event(epsilon, set)?;
        return h.event_probability(&f, Some(state));
    }
    if t > config.search_cap {
        return Err(Error::Capacity {
            what: "horizon t (ball probability)".into(),
            needed: t as u128,
            budget: config.search_cap as u128,
        });
    }
    let balls: Vec<Vec<Vec<bool>>> = (0..info.num_states())
        .filter(|&s| mask[s])
        .map(|s| ball_sets(info, t, epsilon, s))
        .collect::<Result<_>>()?;
    let n = t as usize + 1;
    let lf = LogFactorials::new(t);
    let kernel = PairKernel::new(info.joint_f64(state), t);
    let rows = parallel::map_range(n, |a| {
        let mut sum = 0.0;
        for b in 0..n {
            if balls.iter().any(|s| s[0][a] && s[1][b]) {
                sum += kernel.log_prob(&lf, a as u32, b as u32).exp();
            }
        }
        sum
    });
    Ok(rows.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example1::{self, THETA1, THETA2, THETA3, THETA4};
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn h(info: &InfoStructure, t: u32) -> Horizon<'_> {
        Horizon::new(info, t, EngineConfig::default()).unwrap()
    }

    #[test]
    fn ball_membership_is_closed() {
        let m = [ratio(3, 5), ratio(2, 5)];
        let eps = ratio(1, 20);
        let inside: Vec<u32> = (0..=20)
            .filter(|&a| in_ball(&CountVector::new(vec![a, 20 - a]), &m, &eps))
            .collect();
        assert_eq!(inside, vec![11, 12, 13]);
        let inside: Vec<u32> = (0..=60)
            .filter(|&a| in_ball(&CountVector::new(vec![a, 60 - a]), &m, &eps))
            .collect();
        assert_eq!(inside, (33..=39).collect::<Vec<_>>());
    }

    #[test]
    fn ball_event_examples() {
        let info = example1::structure();
        let hz = h(&info, 20);
        let e = hz.empirical_ball_event(0.05, THETA4).unwrap();
        let sets = ball_sets(&info, 20, 0.05, THETA4).unwrap();
        let zeros: Vec<usize> = (0..=20).filter(|&a| sets[0][a]).collect();
        assert_eq!(zeros, vec![11, 12, 13]);
        assert_eq!(e.count(), 4 * 9);
        assert!(hz.empirical_ball_event(1.0, THETA1).unwrap().is_full());
        // 20 * 2/3 is not an integer
        assert!(hz.empirical_ball_event(0.0, THETA3).unwrap().is_empty());
        let single = hz.identified_ball_event(0.05, &[THETA2]).unwrap();
        assert_eq!(single, hz.empirical_ball_event(0.05, THETA2).unwrap());
    }

    #[test]
    fn cell_ball_is_three_rectangles() {
        let info = example1::structure();
        let t = 60;
        let hz = h(&info, t);
        let e = hz.identified_ball_event(0.05, &[THETA1, THETA2, THETA3]).unwrap();
        let half = ball_sets(&info, t, 0.05, THETA1).unwrap()[0].clone();
        let two_thirds = ball_sets(&info, t, 0.05, THETA3).unwrap()[0].clone();
        let n = t as usize + 1;
        for a in 0..n {
            for b in 0..n {
                let expected = (half[a] && (half[b] || two_thirds[b])) || (two_thirds[a] && half[b]);
                assert_eq!(e.contains(THETA4, a * n + b), expected);
            }
        }
    }

    #[test]
    fn operator_edge_cases() {
        let info = example1::structure();
        let hz = h(&info, 5);
        let full = EpistemicEvent::full(hz.space(), 4);
        let empty = EpistemicEvent::empty(hz.space(), 4);
        let f = hz.state_event(&[THETA1]).unwrap();
        assert!(hz.individual_belief_operator(0.0, 0, &empty).unwrap().is_full());
        assert!(hz.individual_belief_operator(1.0, 0, &full).unwrap().is_full());
        assert!(hz.mutual_belief_operator(0.0, &f).unwrap().is_full());
        let cb = hz.common_belief_event(0.7, &full, CommonBeliefRule::Literal).unwrap();
        assert!(cb.event.is_full());
        assert_eq!(cb.iterations, 1);
        assert!(hz.common_belief_event(0.0, &f, CommonBeliefRule::Literal).unwrap().event.is_full());
        assert!(hz.is_q_evident(1.0, &full, 5).unwrap().is_evident);
        assert!(hz.is_q_evident(0.9, &empty, 5).unwrap().is_evident);
        let other = EpistemicEvent::full(&ProfileSpace::new(6, &[2, 2]), 4);
        assert!(matches!(
            hz.individual_belief_operator(0.5, 0, &other),
            Err(Error::HorizonMismatch { .. })
        ));
    }

    #[test]
    fn no_agent_ever_singles_out_theta1() {
        let info = example1::structure();
        for t in 0..=10 {
            let hz = h(&info, t);
            let f = hz.state_event(&[THETA1]).unwrap();
            for a in 0..2 {
                assert!(hz.individual_belief_operator(0.6, a, &f).unwrap().is_empty(), "t={t}");
            }
        }
    }

    #[test]
    fn no_data_common_belief() {
        let info = example1::structure();
        let hz = h(&info, 0);
        let f = hz.state_event(&[THETA1, THETA2, THETA3]).unwrap();
        assert!(hz.mutual_belief_operator(0.9, &f).unwrap().is_empty());
        assert!(hz
            .common_belief_event(0.9, &f, CommonBeliefRule::Literal)
            .unwrap()
            .event
            .is_empty());
        assert!(hz.mutual_belief_operator(0.75, &f).unwrap().is_full());
    }

    #[test]
    fn probabilities() {
        let info = example1::structure();
        let hz = h(&info, 12);
        let full = EpistemicEvent::full(hz.space(), 4);
        assert_eq!(hz.event_probability(&full, None).unwrap(), 1.0);
        let f = hz.state_event(&[THETA2]).unwrap();
        assert_eq!(hz.event_probability(&f, Some(THETA2)).unwrap(), 1.0);
        assert!((hz.event_probability(&f, None).unwrap() - 0.25).abs() < 1e-15);
        // a general event agrees with the joint law; a cylinder with the own law
        let ball = hz.empirical_ball_event(0.1, THETA4).unwrap();
        let direct: f64 = {
            let lp = hz.joint_log_probs(THETA4).unwrap();
            (0..hz.space().len()).filter(|&p| ball.contains(THETA4, p)).map(|p| lp[p].exp()).sum()
        };
        let via = hz.event_probability(&ball, Some(THETA4)).unwrap();
        assert!((direct - via).abs() < 1e-14);
        let fast = ball_probability(&info, THETA4, 12, 0.1, &[THETA4], &EngineConfig::default()).unwrap();
        assert!((fast - via).abs() < 1e-14);
        let cyl = hz.individual_belief_operator(0.3, 0, &f).unwrap();
        let by_joint: f64 = {
            let lp = hz.joint_log_probs(THETA1).unwrap();
            (0..hz.space().len()).filter(|&p| cyl.contains(THETA1, p)).map(|p| lp[p].exp()).sum()
        };
        assert!((hz.event_probability(&cyl, Some(THETA1)).unwrap() - by_joint).abs() < 1e-14);
    }

    #[test]
    fn ball_probability_increases() {
        let info = example1::structure();
        let cfg = EngineConfig::default();
        let p: Vec<f64> = [50, 100, 200]
            .iter()
            .map(|&t| ball_probability(&info, THETA4, t, 0.05, &[THETA4], &cfg).unwrap())
            .collect();
        assert!(p[0] < p[1] && p[1] < p[2] && p[2] < 1.0, "{p:?}");
    }

    #[test]
    fn cylinders_ignore_other_coordinates() {
        let info = example1::structure();
        let hz = h(&info, 9);
        let f = hz.identified_ball_event(0.15, &[THETA1, THETA2, THETA3]).unwrap();
        for a in 0..2 {
            let b = hz.individual_belief_operator(0.7, a, &f).unwrap();
            let proj = b.own_projection(hz.space(), 0, a).expect("cylinder");
            for s in 0..4 {
                assert_eq!(b.own_projection(hz.space(), s, a).as_ref(), Some(&proj));
            }
        }
    }

    fn random_event(space: &ProfileSpace, bits: &[bool]) -> EpistemicEvent {
        let p = space.len();
        EpistemicEvent::from_fn(space, 4, Provenance::Custom, |s, j| bits[(s * p + j) % bits.len()])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn belief_is_monotone(
            t in 1u32..=15,
            bits in proptest::collection::vec(any::<bool>(), 64..200),
            extra in proptest::collection::vec(any::<bool>(), 64..200),
            q in 0.05f64..0.95,
            dq in 0.0f64..0.3,
        ) {
            let info = example1::structure();
            let hz = h(&info, t);
            let f = random_event(hz.space(), &bits);
            let g = f.union(&random_event(hz.space(), &extra)).unwrap();
            for a in 0..2 {
                let bf = hz.individual_belief_operator(q, a, &f).unwrap();
                let bg = hz.individual_belief_operator(q, a, &g).unwrap();
                prop_assert!(bf.is_subset(&bg).unwrap());
                let hi = hz.individual_belief_operator((q + dq).min(1.0), a, &f).unwrap();
                prop_assert!(hi.is_subset(&bf).unwrap());
            }
            let mf = hz.mutual_belief_operator(q, &f).unwrap();
            let mg = hz.mutual_belief_operator(q, &g).unwrap();
            prop_assert!(mf.is_subset(&mg).unwrap());
        }

        #[test]
        fn common_belief_rules_are_sound(t in 1u32..=12, q in 0.3f64..0.95, eps in 0.05f64..0.3) {
            let info = example1::structure();
            let hz = h(&info, t);
            let f = hz.identified_ball_event(eps, &[THETA1, THETA2, THETA3]).unwrap();
            let lit = hz.common_belief_event(q, &f, CommonBeliefRule::Literal).unwrap();
            let b = hz.mutual_belief_operator(q, &f).unwrap();
            prop_assert!(lit.event.is_subset(&b).unwrap());
            let conj = hz.common_belief_event(q, &f, CommonBeliefRule::Conjunctive).unwrap();
            prop_assert!(conj.event.is_subset(&b).unwrap());
            // an evident event inside F is inside its common belief
            if hz.is_q_evident(q, &f, 0).unwrap().is_evident {
                prop_assert!(f.is_subset(&conj.event).unwrap());
                prop_assert!(f.is_subset(&lit.event).unwrap());
            }
        }
    }
}
