//! Events at a fixed horizon: subsets of states × count profiles.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::counts::ProfileSpace;
use crate::error::{Error, Result};
use crate::infostructure::InfoStructure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    StateCylinder,
    IBall,
    BeliefImage,
    CommonBelief,
    Intersection,
    Union,
    Complement,
    Custom,
}

/// Dense membership over `states × profiles`, indexed `state * P + profile`
/// where profiles follow [`ProfileSpace`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpistemicEvent {
    t: u32,
    num_states: usize,
    alphabets: Vec<usize>,
    profiles: usize,
    member: Vec<bool>,
    provenance: Provenance,
}

impl EpistemicEvent {
    pub fn from_fn(
        space: &ProfileSpace,
        num_states: usize,
        provenance: Provenance,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let profiles = space.len();
        let mut member = Vec::with_capacity(num_states * profiles);
        for s in 0..num_states {
            for p in 0..profiles {
                member.push(f(s, p));
            }
        }
        EpistemicEvent {
            t: space.horizon(),
            num_states,
            alphabets: space.alphabets(),
            profiles,
            member,
            provenance,
        }
    }

    pub fn full(space: &ProfileSpace, num_states: usize) -> Self {
        Self::from_fn(space, num_states, Provenance::Custom, |_, _| true)
    }

    pub fn empty(space: &ProfileSpace, num_states: usize) -> Self {
        Self::from_fn(space, num_states, Provenance::Custom, |_, _| false)
    }

    /// Event whose membership is `per_agent[l][own index of l]` for every
    /// agent, for all states.
    pub fn product(space: &ProfileSpace, num_states: usize, per_agent: &[Vec<bool>], provenance: Provenance) -> Self {
        Self::from_fn(space, num_states, provenance, |_, p| {
            per_agent
                .iter()
                .enumerate()
                .all(|(a, set)| set[space.own_index(p, a)])
        })
    }

    pub fn horizon(&self) -> u32 {
        self.t
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_profiles(&self) -> usize {
        self.profiles
    }

    pub fn alphabets(&self) -> &[usize] {
        &self.alphabets
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    #[inline]
    pub fn contains(&self, state: usize, profile: usize) -> bool {
        self.member[state * self.profiles + profile]
    }

    pub fn set(&mut self, state: usize, profile: usize, value: bool) {
        self.member[state * self.profiles + profile] = value;
    }

    pub fn membership(&self) -> &[bool] {
        &self.member
    }

    /// Membership row of one state.
    pub fn slice(&self, state: usize) -> &[bool] {
        &self.member[state * self.profiles..(state + 1) * self.profiles]
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.member.iter().any(|&m| m)
    }

    pub fn is_full(&self) -> bool {
        self.member.iter().all(|&m| m)
    }

    pub fn same_shape(&self, other: &EpistemicEvent) -> Result<()> {
        if self.t != other.t {
            return Err(Error::HorizonMismatch {
                expected: self.t,
                found: other.t,
            });
        }
        if self.num_states != other.num_states || self.alphabets != other.alphabets {
            return Err(Error::InvalidArgument("events live on different spaces".into()));
        }
        Ok(())
    }

    fn zip(&self, other: &EpistemicEvent, provenance: Provenance, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        self.same_shape(other)?;
        Ok(EpistemicEvent {
            member: self.member.iter().zip(&other.member).map(|(&a, &b)| f(a, b)).collect(),
            provenance,
            ..self.clone()
        })
    }

    pub fn intersect(&self, other: &EpistemicEvent) -> Result<Self> {
        self.zip(other, Provenance::Intersection, |a, b| a && b)
    }

    pub fn union(&self, other: &EpistemicEvent) -> Result<Self> {
        self.zip(other, Provenance::Union, |a, b| a || b)
    }

    pub fn complement(&self) -> Self {
        EpistemicEvent {
            member: self.member.iter().map(|&m| !m).collect(),
            provenance: Provenance::Complement,
            ..self.clone()
        }
    }

    pub fn is_subset(&self, other: &EpistemicEvent) -> Result<bool> {
        self.same_shape(other)?;
        Ok(self.member.iter().zip(&other.member).all(|(&a, &b)| !a || b))
    }

    /// The states whose row is full, if every row is either full or empty.
    pub fn state_projection(&self) -> Option<Vec<bool>> {
        (0..self.num_states)
            .map(|s| {
                let row = self.slice(s);
                let first = *row.first()?;
                row.iter().all(|&m| m == first).then_some(first)
            })
            .collect()
    }

    /// If the row of `state` depends only on `agent`'s own counts, the set of
    /// own count indices it contains.
    pub fn own_projection(&self, space: &ProfileSpace, state: usize, agent: usize) -> Option<Vec<bool>> {
        let n = space.agent_space(agent).len();
        let mut seen: Vec<Option<bool>> = vec![None; n];
        for (p, &m) in self.slice(state).iter().enumerate() {
            let slot = &mut seen[space.own_index(p, agent)];
            match *slot {
                None => *slot = Some(m),
                Some(v) if v != m => return None,
                _ => {}
            }
        }
        Some(seen.into_iter().map(|v| v.unwrap_or(false)).collect())
    }

    /// CSV rows `state, c{l}_{x}..., member` for every (state, profile).
    /// Agents are numbered from 1.
    pub fn write_csv<W: Write>(&self, info: &InfoStructure, writer: W) -> Result<()> {
        if info.num_states() != self.num_states || info.alphabets() != self.alphabets.as_slice() {
            return Err(Error::InvalidArgument("event does not match the structure".into()));
        }
        let space = ProfileSpace::new(self.t, &self.alphabets);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["state".to_string()];
        for (a, &k) in self.alphabets.iter().enumerate() {
            for x in 0..k {
                header.push(format!("c{}_{}", a + 1, x));
            }
        }
        header.push("member".into());
        w.write_record(&header).map_err(io)?;
        for s in 0..self.num_states {
            for p in 0..self.profiles {
                let mut row = vec![info.state_label(s).to_string()];
                for v in space.profile(p).vectors() {
                    row.extend(v.counts().iter().map(u32::to_string));
                }
                row.push(u8::from(self.contains(s, p)).to_string());
                w.write_record(&row).map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
        Ok(())
    }
}
