//! Count vectors (sufficient statistics of one agent's history) and the
//! indexed spaces of count profiles at a fixed horizon.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// How many times each signal occurred in an agent's history.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CountVector(pub Vec<u32>);

impl CountVector {
    pub fn new(counts: Vec<u32>) -> Self {
        CountVector(counts)
    }

    pub fn zeros(k: usize) -> Self {
        CountVector(vec![0; k])
    }

    pub fn horizon(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Empirical measure `counts / t`; undefined at `t = 0`.
    pub fn empirical(&self) -> Option<Vec<f64>> {
        let t = self.horizon();
        (t > 0).then(|| self.0.iter().map(|&c| c as f64 / t as f64).collect())
    }

    pub fn empirical_exact(&self) -> Option<Vec<Rational>> {
        let t = self.horizon();
        (t > 0).then(|| {
            self.0
                .iter()
                .map(|&c| Rational::new((c as i64).into(), (t as i64).into()))
                .collect()
        })
    }
}

/// One count vector per agent, all at the same horizon.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountProfile(Vec<CountVector>);

impl CountProfile {
    pub fn new(vectors: Vec<CountVector>) -> Result<Self> {
        if let Some(first) = vectors.first() {
            let t = first.horizon();
            if let Some(v) = vectors.iter().find(|v| v.horizon() != t) {
                return Err(Error::HorizonMismatch {
                    expected: t,
                    found: v.horizon(),
                });
            }
        }
        Ok(CountProfile(vectors))
    }

    pub fn horizon(&self) -> u32 {
        self.0.first().map_or(0, CountVector::horizon)
    }

    pub fn agent(&self, agent: usize) -> &CountVector {
        &self.0[agent]
    }

    pub fn vectors(&self) -> &[CountVector] {
        &self.0
    }
}

/// All count vectors over `k` signals summing to `t`, in lexicographic
/// order. For two signals the index of `(a, t-a)` is `a`.
#[derive(Clone, Debug)]
pub struct CountSpace {
    t: u32,
    k: usize,
    vectors: Vec<CountVector>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl CountSpace {
    pub fn new(t: u32, k: usize) -> Self {
        assert!(k >= 1, "alphabet must be nonempty");
        let mut vectors = Vec::new();
        let mut buf = vec![0u32; k];
        fill(&mut buf, 0, t, &mut vectors);
        let lookup = if k > 2 {
            vectors.iter().enumerate().map(|(i, v)| (v.0.clone(), i)).collect()
        } else {
            HashMap::new()
        };
        CountSpace { t, k, vectors, lookup }
    }

    pub fn horizon(&self) -> u32 {
        self.t
    }

    pub fn alphabet(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &CountVector {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[CountVector] {
        &self.vectors
    }

    pub fn index_of(&self, v: &CountVector) -> Option<usize> {
        self.index_of_counts(v.counts())
    }

    pub fn index_of_counts(&self, c: &[u32]) -> Option<usize> {
        if c.len() != self.k || c.iter().sum::<u32>() != self.t {
            return None;
        }
        match self.k {
            1 => Some(0),
            2 => Some(c[0] as usize),
            _ => self.lookup.get(c).copied(),
        }
    }

    /// Number of count vectors, `C(t+k-1, k-1)`.
    pub fn size(t: u32, k: usize) -> u128 {
        binomial(t as u128 + k as u128 - 1, k as u128 - 1)
    }
}

fn fill(buf: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<CountVector>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(CountVector(buf.clone()));
        return;
    }
    for c in 0..=remaining {
        buf[pos] = c;
        fill(buf, pos + 1, remaining - c, out);
    }
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// The product of per-agent count spaces at one horizon. Profiles are
/// indexed in mixed radix with the first agent slowest, so for two binary
/// agents the profile `(a, b)` of zero-signal counts sits at `a*(t+1) + b`.
#[derive(Clone, Debug)]
pub struct ProfileSpace {
    t: u32,
    spaces: Vec<CountSpace>,
    strides: Vec<usize>,
    len: usize,
}

impl ProfileSpace {
    pub fn new(t: u32, alphabets: &[usize]) -> Self {
        let spaces: Vec<CountSpace> = alphabets.iter().map(|&k| CountSpace::new(t, k)).collect();
        let mut strides = vec![1usize; spaces.len()];
        for i in (0..spaces.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * spaces[i + 1].len();
        }
        let len = spaces.iter().map(CountSpace::len).product();
        ProfileSpace { t, spaces, strides, len }
    }

    /// Upper bound on the profile count used by the feasibility guard:
    /// `Π (t+1)^(|X_l|-1)`.
    pub fn size_bound(t: u32, alphabets: &[usize]) -> u128 {
        alphabets
            .iter()
            .map(|&k| (t as u128 + 1).saturating_pow(k as u32 - 1))
            .fold(1u128, |a, b| a.saturating_mul(b))
    }

    pub fn horizon(&self) -> u32 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_agents(&self) -> usize {
        self.spaces.len()
    }

    pub fn agent_space(&self, agent: usize) -> &CountSpace {
        &self.spaces[agent]
    }

    pub fn alphabets(&self) -> Vec<usize> {
        self.spaces.iter().map(CountSpace::alphabet).collect()
    }

    pub fn stride(&self, agent: usize) -> usize {
        self.strides[agent]
    }

    /// Index of `agent`'s own count vector within profile `idx`.
    #[inline]
    pub fn own_index(&self, idx: usize, agent: usize) -> usize {
        (idx / self.strides[agent]) % self.spaces[agent].len()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn coords(&self, idx: usize) -> Vec<usize> {
        (0..self.spaces.len()).map(|a| self.own_index(idx, a)).collect()
    }

    pub fn profile(&self, idx: usize) -> CountProfile {
        CountProfile(
            self.coords(idx)
                .iter()
                .enumerate()
                .map(|(a, &c)| self.spaces[a].vector(c).clone())
                .collect(),
        )
    }

    pub fn index_of(&self, profile: &CountProfile) -> Option<usize> {
        if profile.vectors().len() != self.spaces.len() {
            return None;
        }
        let mut idx = 0;
        for (a, v) in profile.vectors().iter().enumerate() {
            idx += self.spaces[a].index_of(v)? * self.strides[a];
        }
        Some(idx)
    }

    /// `own_index(idx, agent)` for every profile.
    pub fn own_indices(&self, agent: usize) -> Vec<u32> {
        (0..self.len).map(|i| self.own_index(i, agent) as u32).collect()
    }

    pub fn same_shape(&self, other: &ProfileSpace) -> bool {
        self.t == other.t && self.alphabets() == other.alphabets()
    }
}

/// `ln n!` for `n` up to a fixed bound.
#[derive(Clone, Debug)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(max: u32) -> Self {
        let mut table = Vec::with_capacity(max as usize + 1);
        table.push(0.0);
        let mut acc = 0.0f64;
        for n in 1..=max {
            acc += (n as f64).ln();
            table.push(acc);
        }
        LogFactorials { table }
    }

    #[inline]
    pub fn get(&self, n: u32) -> f64 {
        self.table[n as usize]
    }

    pub fn max(&self) -> u32 {
        (self.table.len() - 1) as u32
    }

    /// `ln (t! / Π c_i!)`.
    pub fn multinomial(&self, counts: &[u32]) -> f64 {
        let t: u32 = counts.iter().sum();
        self.get(t) - counts.iter().map(|&c| self.get(c)).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_space_is_indexed_by_zero_count() {
        let s = CountSpace::new(5, 2);
        assert_eq!(s.len(), 6);
        for a in 0..=5u32 {
            let v = CountVector::new(vec![a, 5 - a]);
            assert_eq!(s.index_of(&v), Some(a as usize));
            assert_eq!(s.vector(a as usize), &v);
        }
        assert_eq!(s.index_of(&CountVector::new(vec![1, 1])), None);
    }

    #[test]
    fn ternary_space_size_and_lookup() {
        let s = CountSpace::new(4, 3);
        assert_eq!(s.len() as u128, CountSpace::size(4, 3));
        assert_eq!(s.len(), 15);
        for (i, v) in s.vectors().iter().enumerate() {
            assert_eq!(s.index_of(v), Some(i));
            assert_eq!(v.horizon(), 4);
        }
        assert!(s.vectors().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn profile_space_roundtrip() {
        let p = ProfileSpace::new(3, &[2, 3]);
        assert_eq!(p.len(), 4 * 10);
        for i in 0..p.len() {
            let prof = p.profile(i);
            assert_eq!(p.index_of(&prof), Some(i));
            assert_eq!(p.index(&p.coords(i)), i);
        }
        let pair = ProfileSpace::new(7, &[2, 2]);
        assert_eq!(pair.index(&[3, 5]), 3 * 8 + 5);
        assert_eq!(ProfileSpace::size_bound(7, &[2, 2]), 64);
    }

    #[test]
    fn profile_horizons_must_agree() {
        let err = CountProfile::new(vec![CountVector::new(vec![1, 1]), CountVector::new(vec![3, 0])]);
        assert!(matches!(err, Err(Error::HorizonMismatch { expected: 2, found: 3 })));
    }

    #[test]
    fn empirical_measures() {
        assert_eq!(CountVector::zeros(2).empirical(), None);
        assert_eq!(CountVector::new(vec![1, 3]).empirical(), Some(vec![0.25, 0.75]));
    }

    #[test]
    fn log_factorials() {
        let lf = LogFactorials::new(20);
        assert!((lf.get(10) - 3_628_800f64.ln()).abs() < 1e-12);
        assert!((lf.multinomial(&[2, 1, 1]) - 12f64.ln()).abs() < 1e-12);
    }
}
