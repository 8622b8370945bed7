//! Likelihoods, posteriors, and exact laws of count statistics.
//!
//! Signals are i.i.d. across periods given the state, so each agent's count
//! vector is sufficient for its posterior and for its beliefs about the
//! other agents' counts. All mass functions are kept in natural-log scale.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::counts::{CountProfile, CountSpace, CountVector, LogFactorials, ProfileSpace};
use crate::error::{Error, Result};
use crate::infostructure::InfoStructure;
use crate::parallel;
use crate::rational::{self, Rational};

/// Limits of the exact engine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Largest horizon handled exactly.
    pub horizon_cap: u32,
    /// Largest number of count profiles, `Π (t+1)^(|X_l|-1)`.
    pub profile_budget: u128,
    /// Largest estimated number of elementary steps to build one joint law.
    pub work_budget: u128,
    /// Largest horizon scanned by the time-threshold search, which only
    /// needs ball probabilities.
    pub search_cap: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            horizon_cap: 600,
            profile_budget: 2_000_000,
            work_budget: 2_000_000_000,
            search_cap: 5000,
        }
    }
}

impl EngineConfig {
    pub fn with_horizon_cap(mut self, cap: u32) -> Self {
        self.horizon_cap = cap;
        self
    }

    pub fn check_horizon(&self, t: u32) -> Result<()> {
        if t > self.horizon_cap {
            return Err(Error::Capacity {
                what: "horizon t (exact engine)".into(),
                needed: t as u128,
                budget: self.horizon_cap as u128,
            });
        }
        Ok(())
    }

    /// Feasibility guard for joint count laws at horizon `t`.
    pub fn check_joint(&self, info: &InfoStructure, t: u32) -> Result<()> {
        self.check_horizon(t)?;
        let profiles = ProfileSpace::size_bound(t, info.alphabets());
        if profiles > self.profile_budget {
            return Err(Error::Capacity {
                what: format!("count profiles Π(t+1)^(|X_l|-1) at t={t}"),
                needed: profiles,
                budget: self.profile_budget,
            });
        }
        let work = joint_work(info, t);
        if work > self.work_budget {
            return Err(Error::Capacity {
                what: format!("joint count law work at t={t}"),
                needed: work,
                budget: self.work_budget,
            });
        }
        Ok(())
    }
}

/// Work estimate for one joint law: a truncated inner sum per profile for
/// two binary agents, a full period-by-period recursion otherwise.
pub fn joint_work(info: &InfoStructure, t: u32) -> u128 {
    let profiles = ProfileSpace::size_bound(t, info.alphabets());
    if info.is_binary_pair() {
        profiles.saturating_mul(64)
    } else {
        profiles
            .saturating_mul(t as u128)
            .saturating_mul(info.profile_count() as u128)
    }
}

#[inline]
fn ln(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

#[inline]
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn check_counts(info: &InfoStructure, agent: usize, c: &CountVector) -> Result<()> {
    info.check_agent(agent)?;
    if c.len() != info.alphabet(agent) {
        return Err(Error::LengthMismatch(c.len(), info.alphabet(agent)));
    }
    Ok(())
}

/// `Σ_x c(x) log φ^θ_l(x)`, without the multinomial coefficient.
pub fn log_likelihood(info: &InfoStructure, agent: usize, state: usize, c: &CountVector) -> Result<f64> {
    info.check_state(state)?;
    check_counts(info, agent, c)?;
    Ok(log_likelihood_unchecked(info.marginal_f64(state, agent), c.counts()))
}

pub(crate) fn log_likelihood_unchecked(marginal: &[f64], counts: &[u32]) -> f64 {
    let mut acc = 0.0;
    for (&n, &p) in counts.iter().zip(marginal) {
        if n > 0 {
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += n as f64 * p.ln();
        }
    }
    acc
}

/// Posterior over states after observing counts `c`, normalized in log
/// space with a max shift.
pub fn posterior(info: &InfoStructure, agent: usize, c: &CountVector) -> Result<Vec<f64>> {
    check_counts(info, agent, c)?;
    posterior_unchecked(info, agent, c.counts()).ok_or(Error::InfeasibleCounts)
}

pub(crate) fn posterior_unchecked(info: &InfoStructure, agent: usize, counts: &[u32]) -> Option<Vec<f64>> {
    let logw: Vec<f64> = (0..info.num_states())
        .map(|s| ln(info.prior_f64()[s]) + log_likelihood_unchecked(info.marginal_f64(s, agent), counts))
        .collect();
    let m = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return None;
    }
    let w: Vec<f64> = logw.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = w.iter().sum();
    Some(w.into_iter().map(|x| x / z).collect())
}

/// Unnormalized posterior weights `p_θ Π_x φ^θ_l(x)^c(x)` in exact arithmetic.
pub fn posterior_weights_exact(info: &InfoStructure, agent: usize, c: &CountVector) -> Result<Vec<Rational>> {
    check_counts(info, agent, c)?;
    Ok((0..info.num_states())
        .map(|s| {
            let m = info.marginal(s, agent).unwrap();
            c.counts()
                .iter()
                .zip(m)
                .fold(info.prior()[s].clone(), |acc, (&n, p)| acc * rational::pow(p, n))
        })
        .collect())
}

pub fn posterior_exact(info: &InfoStructure, agent: usize, c: &CountVector) -> Result<Vec<Rational>> {
    let w = posterior_weights_exact(info, agent, c)?;
    let z = rational::sum(&w);
    if z.is_zero() {
        return Err(Error::InfeasibleCounts);
    }
    Ok(w.into_iter().map(|x| x / &z).collect())
}

fn check_set(info: &InfoStructure, set: &[usize]) -> Result<()> {
    match set.iter().find(|&&s| s >= info.num_states()) {
        Some(&s) => Err(Error::UnknownState(s)),
        None => Ok(()),
    }
}

/// Posterior probability of a set of states. Repeated members count once.
pub fn posterior_set(info: &InfoStructure, agent: usize, c: &CountVector, set: &[usize]) -> Result<f64> {
    check_set(info, set)?;
    let post = posterior(info, agent, c)?;
    let mut member = vec![false; info.num_states()];
    set.iter().for_each(|&s| member[s] = true);
    Ok(post.iter().zip(&member).filter(|(_, &m)| m).map(|(p, _)| p).sum())
}

pub fn posterior_set_exact(info: &InfoStructure, agent: usize, c: &CountVector, set: &[usize]) -> Result<Rational> {
    check_set(info, set)?;
    let post = posterior_exact(info, agent, c)?;
    let mut member = vec![false; info.num_states()];
    set.iter().for_each(|&s| member[s] = true);
    Ok(post
        .iter()
        .zip(&member)
        .filter(|(_, &m)| m)
        .fold(Rational::zero(), |acc, (p, _)| acc + p))
}

/// A law over the count vectors of one agent at horizon `t`.
#[derive(Clone, Debug)]
pub struct VectorLaw {
    space: CountSpace,
    log_probs: Vec<f64>,
}

impl VectorLaw {
    pub fn horizon(&self) -> u32 {
        self.space.horizon()
    }

    pub fn space(&self) -> &CountSpace {
        &self.space
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.log_probs[i].exp()
    }

    pub fn probability_of(&self, c: &CountVector) -> f64 {
        self.space.index_of(c).map_or(0.0, |i| self.prob(i))
    }

    pub fn total(&self) -> f64 {
        self.log_probs.iter().map(|l| l.exp()).sum()
    }

    /// `(count vector, probability)` for every vector of positive probability.
    pub fn support(&self) -> impl Iterator<Item = (&CountVector, f64)> {
        self.space
            .vectors()
            .iter()
            .zip(&self.log_probs)
            .filter(|(_, l)| l.is_finite())
            .map(|(v, l)| (v, l.exp()))
    }
}

/// Multinomial(t, φ^θ_l) over agent `agent`'s count vectors.
pub fn own_count_law(info: &InfoStructure, state: usize, agent: usize, t: u32, config: &EngineConfig) -> Result<VectorLaw> {
    info.check_state(state)?;
    info.check_agent(agent)?;
    config.check_horizon(t)?;
    let lf = LogFactorials::new(t);
    Ok(own_count_law_unchecked(info.marginal_f64(state, agent), t, &lf))
}

pub(crate) fn own_count_law_unchecked(marginal: &[f64], t: u32, lf: &LogFactorials) -> VectorLaw {
    let space = CountSpace::new(t, marginal.len());
    let log_probs = space
        .vectors()
        .iter()
        .map(|v| lf.multinomial(v.counts()) + log_likelihood_unchecked(marginal, v.counts()))
        .collect();
    VectorLaw { space, log_probs }
}

/// Exact law of the count profile at horizon `t` under one state.
#[derive(Clone, Debug)]
pub struct CountLaw {
    state: usize,
    space: ProfileSpace,
    log_probs: Vec<f64>,
}

impl CountLaw {
    pub fn horizon(&self) -> u32 {
        self.space.horizon()
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn space(&self) -> &ProfileSpace {
        &self.space
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn into_log_probs(self) -> Vec<f64> {
        self.log_probs
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.log_probs[idx].exp()
    }

    pub fn probability_of(&self, profile: &CountProfile) -> f64 {
        self.space.index_of(profile).map_or(0.0, |i| self.prob(i))
    }

    pub fn total(&self) -> f64 {
        self.log_probs.iter().map(|l| l.exp()).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = (CountProfile, f64)> + '_ {
        self.log_probs
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_finite())
            .map(|(i, l)| (self.space.profile(i), l.exp()))
    }
}

pub fn joint_count_law(info: &InfoStructure, state: usize, t: u32, config: &EngineConfig) -> Result<CountLaw> {
    info.check_state(state)?;
    config.check_joint(info, t)?;
    let lf = LogFactorials::new(t);
    let space = ProfileSpace::new(t, info.alphabets());
    let log_probs = joint_log_probs(info, state, &space, &lf);
    Ok(CountLaw { state, space, log_probs })
}

/// Log-probabilities of every profile of `space` under `state`.
pub(crate) fn joint_log_probs(info: &InfoStructure, state: usize, space: &ProfileSpace, lf: &LogFactorials) -> Vec<f64> {
    if info.is_binary_pair() {
        let kernel = PairKernel::new(info.joint_f64(state), space.horizon());
        let n = space.horizon() as usize + 1;
        let rows = parallel::map_range(n, |a| (0..n).map(|b| kernel.log_prob(lf, a as u32, b as u32)).collect::<Vec<_>>());
        rows.concat()
    } else {
        recursive_log_probs(info, state, space.horizon())
    }
}

/// Law of a profile of zero-signal counts `(a, b)` for two binary agents:
/// `P(a, b) = Σ_k t! / (k! (a-k)! (b-k)! (t-a-b+k)!) π00^k π01^(a-k) π10^(b-k) π11^(t-a-b+k)`
/// where `k` counts periods in which both agents saw signal 0.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PairKernel {
    t: u32,
    ln_pi: [f64; 4],
    /// `π00 π11 / (π01 π10)`; `None` when some entry is zero.
    cross: Option<f64>,
}

impl PairKernel {
    pub(crate) fn new(joint: &[f64], t: u32) -> Self {
        let pi = [joint[0], joint[1], joint[2], joint[3]];
        let cross = pi.iter().all(|&p| p > 0.0).then(|| pi[0] * pi[3] / (pi[1] * pi[2]));
        PairKernel {
            t,
            ln_pi: pi.map(ln),
            cross,
        }
    }

    fn log_term(&self, lf: &LogFactorials, a: u32, b: u32, k: u32) -> f64 {
        let t = self.t;
        let n = [k, a - k, b - k, t + k - a - b];
        let mut acc = lf.get(t);
        for (&n, &ln_pi) in n.iter().zip(&self.ln_pi) {
            if n > 0 {
                if ln_pi == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                acc += n as f64 * ln_pi - lf.get(n);
            }
        }
        acc
    }

    /// `term(k+1) / term(k)`.
    #[inline]
    fn ratio(&self, cross: f64, a: u32, b: u32, k: u32) -> f64 {
        let (a, b, k, t) = (a as f64, b as f64, k as f64, self.t as f64);
        (a - k) * (b - k) / ((k + 1.0) * (t - a - b + k + 1.0)) * cross
    }

    pub(crate) fn log_prob(&self, lf: &LogFactorials, a: u32, b: u32) -> f64 {
        let t = self.t;
        if a > t || b > t {
            return f64::NEG_INFINITY;
        }
        let lo = (a + b).saturating_sub(t);
        let hi = a.min(b);
        let Some(cross) = self.cross else {
            let terms: Vec<f64> = (lo..=hi).map(|k| self.log_term(lf, a, b, k)).collect();
            return log_sum_exp(&terms);
        };
        // terms are log-concave in k: locate the mode, then sum outward
        let (mut l, mut r) = (lo, hi);
        while l < r {
            let mid = l + (r - l) / 2;
            if self.ratio(cross, a, b, mid) >= 1.0 {
                l = mid + 1;
            } else {
                r = mid;
            }
        }
        let mode = l;
        const CUTOFF: f64 = 1e-20;
        let mut sum = 1.0;
        let mut rel = 1.0;
        let mut k = mode;
        while k < hi {
            rel *= self.ratio(cross, a, b, k);
            sum += rel;
            k += 1;
            if rel < CUTOFF {
                break;
            }
        }
        rel = 1.0;
        k = mode;
        while k > lo {
            rel /= self.ratio(cross, a, b, k - 1);
            sum += rel;
            k -= 1;
            if rel < CUTOFF {
                break;
            }
        }
        self.log_term(lf, a, b, mode) + sum.ln()
    }
}

/// Period-by-period recursion over count profiles, for any number of agents
/// and alphabet sizes.
fn recursive_log_probs(info: &InfoStructure, state: usize, t: u32) -> Vec<f64> {
    let alphabets = info.alphabets();
    let joint: Vec<(usize, f64, Vec<usize>)> = info
        .joint_f64(state)
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(flat, &p)| (flat, p.ln(), (0..alphabets.len()).map(|a| info.signal_of(flat, a)).collect()))
        .collect();
    let mut space = ProfileSpace::new(0, alphabets);
    let mut cur = vec![0.0f64];
    for s in 0..t {
        let next_space = ProfileSpace::new(s + 1, alphabets);
        let succ: Vec<Vec<usize>> = (0..alphabets.len())
            .map(|a| successor_table(space.agent_space(a), next_space.agent_space(a)))
            .collect();
        let mut next = vec![f64::NEG_INFINITY; next_space.len()];
        for (p, &lp) in cur.iter().enumerate() {
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let coords = space.coords(p);
            for (_, lpi, signals) in &joint {
                let idx: usize = (0..alphabets.len())
                    .map(|a| succ[a][coords[a] * alphabets[a] + signals[a]] * next_space.stride(a))
                    .sum();
                next[idx] = log_add_exp(next[idx], lp + lpi);
            }
        }
        space = next_space;
        cur = next;
    }
    cur
}

/// `table[i*k + x]` is the index of `from[i] + e_x` in `to`.
fn successor_table(from: &CountSpace, to: &CountSpace) -> Vec<usize> {
    let k = from.alphabet();
    let mut out = Vec::with_capacity(from.len() * k);
    for v in from.vectors() {
        for x in 0..k {
            let mut w = v.clone();
            w.0[x] += 1;
            out.push(to.index_of(&w).expect("successor lies in the next space"));
        }
    }
    out
}

/// Law of agent `other`'s counts given agent `agent`'s counts `c` under
/// `state`: each of `agent`'s observed signals `x` pairs with an independent
/// draw from the prediction row `π^θ(x, ·) / φ^θ(x)`.
pub fn conditional_counterparty_law(
    info: &InfoStructure,
    state: usize,
    agent: usize,
    c: &CountVector,
    other: usize,
    config: &EngineConfig,
) -> Result<VectorLaw> {
    info.check_state(state)?;
    check_counts(info, agent, c)?;
    info.check_agent(other)?;
    if agent == other {
        return Err(Error::SameAgent(agent));
    }
    let t = c.horizon();
    config.check_horizon(t)?;
    let pair = info.pairwise_marginal(state, agent, other)?;
    let k = info.alphabet(other);
    let mut rows = Vec::with_capacity(pair.len());
    for (x, row) in pair.iter().enumerate() {
        let phi = rational::sum(row);
        if phi.is_zero() {
            if c.counts()[x] > 0 {
                return Err(Error::InfeasibleCounts);
            }
            rows.push(vec![f64::NEG_INFINITY; k]);
        } else {
            rows.push(row.iter().map(|p| ln(rational::to_f64(&(p / &phi)))).collect());
        }
    }
    let mut space = CountSpace::new(0, k);
    let mut cur = vec![0.0f64];
    let mut s = 0;
    for (x, &n) in c.counts().iter().enumerate() {
        for _ in 0..n {
            let next_space = CountSpace::new(s + 1, k);
            let succ = successor_table(&space, &next_space);
            let mut next = vec![f64::NEG_INFINITY; next_space.len()];
            for (i, &lp) in cur.iter().enumerate() {
                if lp == f64::NEG_INFINITY {
                    continue;
                }
                for y in 0..k {
                    let j = succ[i * k + y];
                    next[j] = log_add_exp(next[j], lp + rows[x][y]);
                }
            }
            space = next_space;
            cur = next;
            s += 1;
        }
    }
    Ok(VectorLaw { space, log_probs: cur })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example1;
    use crate::rational::ratio;
    use num_traits::One;

    fn cv(v: &[u32]) -> CountVector {
        CountVector::new(v.to_vec())
    }

    #[test]
    fn log_likelihood_examples() {
        let info = example1::structure();
        let v = log_likelihood(&info, 0, 3, &cv(&[2, 0])).unwrap();
        assert!((v - 2.0 * 0.6f64.ln()).abs() < 1e-15);
        assert_eq!(log_likelihood(&info, 0, 0, &cv(&[0, 0])).unwrap(), 0.0);
        assert_eq!(
            log_likelihood(&info, 0, 0, &cv(&[5, 5])).unwrap(),
            log_likelihood(&info, 0, 1, &cv(&[5, 5])).unwrap()
        );
        assert!(log_likelihood(&info, 0, 0, &cv(&[1, 1, 1])).is_err());
    }

    #[test]
    fn posterior_examples() {
        let info = example1::structure();
        let prior: Vec<f64> = info.prior_f64().to_vec();
        assert_eq!(posterior(&info, 0, &cv(&[0, 0])).unwrap(), prior);

        let w = posterior_weights_exact(&info, 0, &cv(&[2, 0])).unwrap();
        let quarter = ratio(1, 4);
        assert_eq!(
            w,
            vec![&quarter * ratio(1, 4), &quarter * ratio(1, 4), &quarter * ratio(4, 9), &quarter * ratio(9, 25)]
        );

        let q = posterior_set_exact(&info, 0, &cv(&[2, 0]), &[0, 1]).unwrap();
        assert_eq!(q, ratio(450, 1174));
        let f = posterior_set(&info, 0, &cv(&[2, 0]), &[0, 1]).unwrap();
        assert!((f - 450.0 / 1174.0).abs() < 1e-15);
        assert_eq!(posterior_set(&info, 0, &cv(&[2, 0]), &[0, 1, 2, 3]).unwrap(), 1.0);
        assert_eq!(posterior_set(&info, 0, &cv(&[2, 0]), &[]).unwrap(), 0.0);
        assert!(matches!(posterior_set(&info, 0, &cv(&[2, 0]), &[7]), Err(Error::UnknownState(7))));
    }

    #[test]
    fn own_law_examples() {
        let info = example1::structure();
        let cfg = EngineConfig::default();
        let law = own_count_law(&info, 0, 0, 2, &cfg).unwrap();
        assert!((law.probability_of(&cv(&[2, 0])) - 0.25).abs() < 1e-15);
        assert!((law.probability_of(&cv(&[1, 1])) - 0.5).abs() < 1e-15);
        assert!((law.probability_of(&cv(&[0, 2])) - 0.25).abs() < 1e-15);
        let law = own_count_law(&info, 3, 0, 1, &cfg).unwrap();
        assert!((law.probability_of(&cv(&[1, 0])) - 0.6).abs() < 1e-15);
        let law = own_count_law(&info, 3, 0, 0, &cfg).unwrap();
        assert_eq!(law.space().len(), 1);
        assert_eq!(law.prob(0), 1.0);
        assert!(own_count_law(&info, 0, 0, 601, &cfg).unwrap_err().is_capacity());
    }

    #[test]
    fn joint_law_examples() {
        let info = example1::structure();
        let cfg = EngineConfig::default();
        let law = joint_count_law(&info, 0, 1, &cfg).unwrap();
        let prof = |a: [u32; 2], b: [u32; 2]| CountProfile::new(vec![cv(&a), cv(&b)]).unwrap();
        assert!((law.probability_of(&prof([1, 0], [1, 0])) - 3.0 / 8.0).abs() < 1e-15);
        let law = joint_count_law(&info, 3, 2, &cfg).unwrap();
        assert!((law.probability_of(&prof([2, 0], [2, 0])) - 4.0 / 25.0).abs() < 1e-15);
        for s in 0..4 {
            for t in [0, 1, 7, 150] {
                let law = joint_count_law(&info, s, t, &cfg).unwrap();
                assert!((law.total() - 1.0).abs() < 1e-10, "state {s} t {t}");
            }
        }
    }

    #[test]
    fn closed_form_matches_recursion() {
        let info = example1::structure();
        for s in 0..4 {
            for t in [0u32, 1, 5, 40] {
                let space = ProfileSpace::new(t, info.alphabets());
                let lf = LogFactorials::new(t);
                let fast = joint_log_probs(&info, s, &space, &lf);
                let slow = recursive_log_probs(&info, s, t);
                for (x, y) in fast.iter().zip(&slow) {
                    assert!((x.exp() - y.exp()).abs() < 1e-13, "state {s} t {t}");
                }
            }
        }
    }

    #[test]
    fn joint_law_guard() {
        let info = example1::structure();
        let cfg = EngineConfig::default();
        match joint_count_law(&info, 0, 700, &cfg) {
            Err(Error::Capacity { needed, budget, .. }) => assert_eq!((needed, budget), (700, 600)),
            other => panic!("{other:?}"),
        }
        let tight = EngineConfig {
            profile_budget: 100,
            ..cfg
        };
        let err = joint_count_law(&info, 0, 20, &tight).unwrap_err();
        assert!(err.to_string().contains("count profiles"));
    }

    #[test]
    fn counterparty_examples() {
        let info = example1::structure();
        let cfg = EngineConfig::default();
        let law = conditional_counterparty_law(&info, 0, 0, &cv(&[0, 0]), 1, &cfg).unwrap();
        assert_eq!(law.probability_of(&cv(&[0, 0])), 1.0);
        let law = conditional_counterparty_law(&info, 0, 0, &cv(&[1, 0]), 1, &cfg).unwrap();
        assert!((law.probability_of(&cv(&[1, 0])) - 0.75).abs() < 1e-15);
        let law = conditional_counterparty_law(&info, 1, 0, &cv(&[1, 0]), 1, &cfg).unwrap();
        assert!((law.probability_of(&cv(&[1, 0])) - 5.0 / 6.0).abs() < 1e-15);
        assert!(matches!(
            conditional_counterparty_law(&info, 1, 0, &cv(&[1, 0]), 0, &cfg),
            Err(Error::SameAgent(0))
        ));
    }

    #[test]
    fn counterparty_matches_joint_conditionals() {
        let info = example1::structure();
        let cfg = EngineConfig::default();
        for t in [1u32, 4, 11, 20] {
            for s in 0..4 {
                let joint = joint_count_law(&info, s, t, &cfg).unwrap();
                let own = own_count_law(&info, s, 0, t, &cfg).unwrap();
                let n = t as usize + 1;
                for a in 0..n {
                    let c = own.space().vector(a).clone();
                    let law = conditional_counterparty_law(&info, s, 0, &c, 1, &cfg).unwrap();
                    for b in 0..n {
                        let cond = joint.prob(a * n + b) / own.prob(a);
                        assert!((law.prob(b) - cond).abs() < 1e-10, "t {t} s {s} a {a} b {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn three_agent_recursion_normalizes() {
        let third = ratio(1, 8);
        let info = InfoStructure::new(
            vec!["a".into()],
            vec![Rational::one()],
            vec![2, 2, 2],
            vec![vec![third; 8]],
        )
        .unwrap();
        let law = joint_count_law(&info, 0, 6, &EngineConfig::default()).unwrap();
        assert!((law.total() - 1.0).abs() < 1e-12);
        // independent fair coins: P(all three saw 6 zeros) = 2^-18
        let z = CountVector::new(vec![6, 0]);
        let p = law.probability_of(&CountProfile::new(vec![z.clone(), z.clone(), z]).unwrap());
        assert!((p - 2f64.powi(-18)).abs() < 1e-18);
    }
}
