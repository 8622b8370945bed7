//! Partitions of the state set, the join of partitions, and the
//! identification partitions of an information structure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::divergence;
use crate::error::{Error, Result};
use crate::infostructure::{InfoStructure, PartitionMode};

/// A partition of `{0, .., n-1}` kept in canonical form: members ascending
/// within a cell, cells ordered by their least member.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    n: usize,
    cells: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, cells: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for cell in &cells {
            if cell.is_empty() {
                return Err(Error::InvalidArgument("partition has an empty cell".into()));
            }
            for &s in cell {
                if s >= n {
                    return Err(Error::UnknownState(s));
                }
                if std::mem::replace(&mut seen[s], true) {
                    return Err(Error::InvalidArgument(format!("state {s} appears in two cells")));
                }
            }
        }
        if let Some(s) = seen.iter().position(|&b| !b) {
            return Err(Error::InvalidArgument(format!("state {s} is in no cell")));
        }
        Ok(Self::canonical(n, cells))
    }

    fn canonical(n: usize, mut cells: Vec<Vec<usize>>) -> Self {
        for c in &mut cells {
            c.sort_unstable();
        }
        cells.sort_by_key(|c| c[0]);
        Partition { n, cells }
    }

    /// Every state in its own cell.
    pub fn discrete(n: usize) -> Self {
        Partition {
            n,
            cells: (0..n).map(|s| vec![s]).collect(),
        }
    }

    /// A single cell holding every state.
    pub fn indiscrete(n: usize) -> Self {
        Partition {
            n,
            cells: if n == 0 { vec![] } else { vec![(0..n).collect()] },
        }
    }

    /// Groups states by a label; equal labels share a cell.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let mut cells: Vec<Vec<usize>> = Vec::new();
        let mut reps: Vec<&T> = Vec::new();
        for (s, l) in labels.iter().enumerate() {
            match reps.iter().position(|r| *r == l) {
                Some(i) => cells[i].push(s),
                None => {
                    reps.push(l);
                    cells.push(vec![s]);
                }
            }
        }
        Self::canonical(labels.len(), cells)
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell containing `state`.
    pub fn cell_index(&self, state: usize) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(&state))
    }

    pub fn cell_of(&self, state: usize) -> Option<&[usize]> {
        self.cell_index(state).map(|i| self.cells[i].as_slice())
    }

    /// True when `set` is a union of cells (including the empty union).
    pub fn is_measurable(&self, set: &[usize]) -> bool {
        self.cells
            .iter()
            .all(|c| c.iter().all(|s| set.contains(s)) || c.iter().all(|s| !set.contains(s)))
    }

    pub fn contains_cell(&self, set: &[usize]) -> bool {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        self.cells.contains(&sorted)
    }

    /// The join: the finest partition whose cells are unions of cells of
    /// both inputs (connected components of the cell-overlap graph).
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        if self.n != other.n {
            return Err(Error::PartitionMismatch(self.n, other.n));
        }
        let mut uf = UnionFind::new(self.n);
        for cell in self.cells.iter().chain(&other.cells) {
            for w in cell.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        Ok(Partition::from_labels(&(0..self.n).map(|s| uf.find(s)).collect::<Vec<_>>()))
    }

    /// The meet: nonempty pairwise intersections of cells.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        if self.n != other.n {
            return Err(Error::PartitionMismatch(self.n, other.n));
        }
        let labels: Vec<(usize, usize)> = (0..self.n)
            .map(|s| (self.cell_index(s).unwrap(), other.cell_index(s).unwrap()))
            .collect();
        Ok(Partition::from_labels(&labels))
    }

    /// True when every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n == coarser.n
            && self.cells.iter().all(|c| {
                let target = coarser.cell_index(c[0]);
                c.iter().all(|&s| coarser.cell_index(s) == target)
            })
    }

    /// Renders cells with the given state labels, e.g. `{{θ1,θ2},{θ3}}`.
    pub fn display_with<'a>(&'a self, labels: &'a [String]) -> impl fmt::Display + 'a {
        Labelled { p: self, labels }
    }

    /// Cells as label lists.
    pub fn labelled(&self, labels: &[String]) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| c.iter().map(|&s| labels[s].clone()).collect())
            .collect()
    }
}

struct Labelled<'a> {
    p: &'a Partition,
    labels: &'a [String],
}

impl fmt::Display for Labelled<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.p.cells.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            let names: Vec<&str> = c.iter().map(|&s| self.labels[s].as_str()).collect();
            write!(f, "{{{}}}", names.join(","))?;
        }
        write!(f, "}}")
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// States share a cell iff the agent's signal marginals coincide
/// (exactly, or within the structure's tolerance).
pub fn identification_partition(info: &InfoStructure, agent: usize) -> Result<Partition> {
    info.check_agent(agent)?;
    let n = info.num_states();
    match info.mode() {
        PartitionMode::Exact => {
            let marginals: Vec<_> = (0..n).map(|s| info.marginal(s, agent).unwrap()).collect();
            Ok(Partition::from_labels(&marginals))
        }
        PartitionMode::Tolerance { tau } => {
            let mut uf = UnionFind::new(n);
            for s in 0..n {
                for r in s + 1..n {
                    let d = divergence::tv_distance(info.marginal_f64(s, agent), info.marginal_f64(r, agent))?;
                    if d <= tau {
                        uf.union(s, r);
                    }
                }
            }
            Ok(Partition::from_labels(&(0..n).map(|s| uf.find(s)).collect::<Vec<_>>()))
        }
    }
}

/// Join of every agent's identification partition.
pub fn common_identification(info: &InfoStructure) -> Result<Partition> {
    let mut acc = Partition::discrete(info.num_states());
    for agent in 0..info.num_agents() {
        acc = acc.join(&identification_partition(info, agent)?)?;
    }
    Ok(acc)
}
