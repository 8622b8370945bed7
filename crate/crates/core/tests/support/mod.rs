//! Shared helpers: a brute-force oracle over full signal sequences and the
//! learning curves used by the acceptance and diagnostic targets.
//!
//! The oracle enumerates every joint sequence of length `t` with its exact
//! probability, so beliefs come from histories rather than from counts.

#![allow(dead_code)]

use std::collections::BTreeMap;

use common_learning::counts::{CountVector, ProfileSpace};
use common_learning::engine::EngineConfig;
use common_learning::example1::{THETA1, THETA2, THETA3, THETA4};
use common_learning::{CommonBeliefRule, EpistemicEvent, Horizon, InfoStructure, Rational};
use num_traits::{One, Zero};

pub struct SequenceOracle<'a> {
    info: &'a InfoStructure,
    t: u32,
    space: ProfileSpace,
    /// `(state, profile index, own history code per agent, probability)`.
    atoms: Vec<(usize, usize, Vec<u64>, Rational)>,
}

impl<'a> SequenceOracle<'a> {
    pub fn new(info: &'a InfoStructure, t: u32) -> Self {
        let k = info.profile_count();
        let l = info.num_agents();
        let space = ProfileSpace::new(t, info.alphabets());
        let total = (k as u64).pow(t);
        let mut atoms = Vec::new();
        for s in 0..info.num_states() {
            let joint = info.joint(s);
            for code in 0..total {
                let mut rest = code;
                let mut p = info.prior()[s].clone();
                let mut counts: Vec<Vec<u32>> = info.alphabets().iter().map(|&n| vec![0; n]).collect();
                let mut hist = vec![0u64; l];
                for _ in 0..t {
                    let f = (rest % k as u64) as usize;
                    rest /= k as u64;
                    p *= &joint[f];
                    for (a, h) in hist.iter_mut().enumerate() {
                        let x = info.signal_of(f, a);
                        counts[a][x] += 1;
                        *h = *h * info.alphabet(a) as u64 + x as u64;
                    }
                }
                let idx: usize = counts
                    .iter()
                    .enumerate()
                    .map(|(a, c)| space.agent_space(a).index_of_counts(c).unwrap() * space.stride(a))
                    .sum();
                atoms.push((s, idx, hist, p));
            }
        }
        SequenceOracle { info, t, space, atoms }
    }

    pub fn space(&self) -> &ProfileSpace {
        &self.space
    }

    fn own_index(&self, agent: usize, profile: usize) -> usize {
        self.space.own_index(profile, agent)
    }

    /// Posterior over states after each own history, keyed by history.
    pub fn posteriors(&self, agent: usize) -> BTreeMap<u64, (CountVector, Vec<Rational>)> {
        let n = self.info.num_states();
        let mut acc: BTreeMap<u64, (usize, Vec<Rational>)> = BTreeMap::new();
        for (s, idx, hist, p) in &self.atoms {
            let e = acc
                .entry(hist[agent])
                .or_insert_with(|| (self.own_index(agent, *idx), vec![Rational::zero(); n]));
            e.1[*s] += p;
        }
        acc.into_iter()
            .map(|(h, (i, w))| {
                let z: Rational = w.iter().fold(Rational::zero(), |a, b| a + b);
                let c = self.space.agent_space(agent).vector(i).clone();
                (h, (c, w.into_iter().map(|x| x / &z).collect()))
            })
            .collect()
    }

    /// `P(F | history)` for every own history of `agent`, with the own
    /// count index of the history.
    pub fn beliefs(&self, agent: usize, f: &EpistemicEvent) -> BTreeMap<u64, (usize, Rational)> {
        let mut acc: BTreeMap<u64, (usize, Rational, Rational)> = BTreeMap::new();
        for (s, idx, hist, p) in &self.atoms {
            let e = acc
                .entry(hist[agent])
                .or_insert_with(|| (self.own_index(agent, *idx), Rational::zero(), Rational::zero()));
            if f.contains(*s, *idx) {
                e.1 += p;
            }
            e.2 += p;
        }
        acc.into_iter().map(|(h, (i, num, den))| (h, (i, num / den))).collect()
    }

    /// Own count indices at which every history with those counts believes
    /// `F` with probability at least `q`. Panics if two histories with the
    /// same counts disagree.
    pub fn belief_set(&self, agent: usize, q: &Rational, f: &EpistemicEvent) -> Vec<bool> {
        let n = self.space.agent_space(agent).len();
        let mut out: Vec<Option<bool>> = vec![None; n];
        for (_, (i, b)) in self.beliefs(agent, f) {
            let v = &b >= q;
            match out[i] {
                None => out[i] = Some(v),
                Some(w) => assert_eq!(v, w, "histories with equal counts disagree"),
            }
        }
        out.into_iter().map(|v| v.unwrap_or(false)).collect()
    }

    pub fn mutual(&self, q: &Rational, f: &EpistemicEvent) -> EpistemicEvent {
        let sets: Vec<Vec<bool>> = (0..self.info.num_agents()).map(|a| self.belief_set(a, q, f)).collect();
        self.product(&sets)
    }

    fn product(&self, sets: &[Vec<bool>]) -> EpistemicEvent {
        EpistemicEvent::product(
            &self.space,
            self.info.num_states(),
            sets,
            common_learning::Provenance::Custom,
        )
    }

    /// `∩_n (B^q)^n(F)`, iterating until an iterate repeats.
    pub fn common(&self, q: &Rational, f: &EpistemicEvent) -> EpistemicEvent {
        let mut x = self.mutual(q, f);
        let mut running = x.clone();
        let mut seen = vec![x.clone()];
        loop {
            let next = self.mutual(q, &x);
            if seen.contains(&next) {
                return running;
            }
            running = running.intersect(&next).unwrap();
            seen.push(next.clone());
            x = next;
        }
    }

    /// `P^θ(F)`.
    pub fn probability(&self, f: &EpistemicEvent, state: usize) -> Rational {
        let mut total = Rational::zero();
        for (s, idx, _, p) in &self.atoms {
            if *s == state && f.contains(*s, *idx) {
                total += p;
            }
        }
        total / &self.info.prior()[state]
    }

    pub fn total(&self) -> Rational {
        self.atoms.iter().fold(Rational::zero(), |a, x| a + &x.3)
    }

    pub fn is_normalized(&self) -> bool {
        self.total() == Rational::one()
    }

    pub fn horizon(&self) -> u32 {
        self.t
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `P^θ4(B^0.9_1t({θ4}))` on a grid.
pub fn individual_learning_curve(info: &InfoStructure, grid: &[u32], config: EngineConfig) -> Result<Vec<(u32, f64)>, String> {
    grid.iter()
        .map(|&t| {
            let h = Horizon::new(info, t, config).map_err(err)?;
            let f = h.state_event(&[THETA4]).map_err(err)?;
            let b = h.individual_belief_operator(0.9, 0, &f).map_err(err)?;
            Ok((t, h.event_probability(&b, Some(THETA4)).map_err(err)?))
        })
        .collect()
}

pub struct SufficiencyRow {
    pub t: u32,
    pub theta4: f64,
    pub cell: [f64; 3],
    pub evident: [bool; 2],
    pub violations: [usize; 2],
}

impl SufficiencyRow {
    pub fn passes(&self, q: f64) -> bool {
        self.theta4 >= q && self.cell.iter().all(|&p| p >= q) && self.evident.iter().all(|&e| e)
    }
}

pub fn sufficiency_row(info: &InfoStructure, t: u32, q: f64, eps: f64, config: EngineConfig) -> Result<SufficiencyRow, String> {
    let h = Horizon::new(info, t, config).map_err(err)?;
    let big = [THETA1, THETA2, THETA3];
    let c4 = h
        .common_belief_event(q, &h.state_event(&[THETA4]).map_err(err)?, CommonBeliefRule::Literal)
        .map_err(err)?;
    let cc = h
        .common_belief_event(q, &h.state_event(&big).map_err(err)?, CommonBeliefRule::Literal)
        .map_err(err)?;
    let mut cell = [0.0; 3];
    for (i, &s) in big.iter().enumerate() {
        cell[i] = h.event_probability(&cc.event, Some(s)).map_err(err)?;
    }
    let e4 = h.is_q_evident(q, &h.identified_ball_event(eps, &[THETA4]).map_err(err)?, 0).map_err(err)?;
    let ec = h.is_q_evident(q, &h.identified_ball_event(eps, &big).map_err(err)?, 0).map_err(err)?;
    Ok(SufficiencyRow {
        t,
        theta4: h.event_probability(&c4.event, Some(THETA4)).map_err(err)?,
        cell,
        evident: [e4.is_evident, ec.is_evident],
        violations: [e4.violations, ec.violations],
    })
}

