//! Interaction graphs: chains, cycles, complete graphs and rectangular grids.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub n: usize,
    /// Edges `(a, b)` with `a < b`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Side lengths for rectangular grids, empty otherwise.
    #[serde(default)]
    pub shape: Vec<usize>,
}

impl Lattice {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::InvalidModel(format!("bad edge ({a}, {b})")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
            shape: Vec::new(),
        })
    }

    pub fn chain(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("valid chain")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((0, n - 1));
        }
        Self::from_edges(n, edges).expect("valid cycle")
    }

    pub fn complete(n: usize) -> Self {
        Self::from_edges(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).expect("valid graph")
    }

    /// Rectangular grid with the last coordinate varying fastest.
    pub fn grid(shape: &[usize], periodic: bool) -> Self {
        let n: usize = shape.iter().product();
        let mut edges = Vec::new();
        for site in 0..n {
            let coords = coordinates(site, shape);
            for axis in 0..shape.len() {
                let len = shape[axis];
                let mut next = coords.clone();
                if coords[axis] + 1 < len {
                    next[axis] += 1;
                } else if periodic && len > 2 {
                    next[axis] = 0;
                } else {
                    continue;
                }
                edges.push((site, index(&next, shape)));
            }
        }
        let mut lattice = Self::from_edges(n, edges).expect("valid grid");
        lattice.shape = shape.to_vec();
        lattice
    }

    /// `d`-dimensional hypercubic grid of side `l` with free boundaries.
    pub fn hypercubic(d: usize, l: usize) -> Self {
        Self::grid(&vec![l; d], false)
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            out[a].push(b);
            out[b].push(a);
        }
        out
    }

    /// Whether `set` induces a connected subgraph.
    pub fn is_connected_subset(&self, set: &BTreeSet<usize>) -> bool {
        let Some(&start) = set.iter().next() else {
            return false;
        };
        let adj = self.neighbors();
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if set.contains(&w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == set.len()
    }

    /// Vertices of `set` adjacent to a vertex outside it.
    pub fn boundary_spins(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| match (set.contains(&a), set.contains(&b)) {
                (true, false) => Some(a),
                (false, true) => Some(b),
                _ => None,
            })
            .collect()
    }

    pub fn boundary_edges(&self, set: &BTreeSet<usize>) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(a, b)| set.contains(&a) != set.contains(&b))
            .collect()
    }

    /// Axis-aligned box `[lo, hi)` of a grid.
    pub fn region_box(&self, lo: &[usize], hi: &[usize]) -> Result<BTreeSet<usize>> {
        if self.shape.is_empty() || lo.len() != self.shape.len() || hi.len() != self.shape.len() {
            return Err(Error::InvalidRegion("box needs a grid of matching dimension".into()));
        }
        if lo.iter().zip(hi).zip(&self.shape).any(|((l, h), s)| l >= h || h > s) {
            return Err(Error::InvalidRegion("empty or out-of-range box".into()));
        }
        Ok((0..self.n)
            .filter(|&v| {
                coordinates(v, &self.shape)
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(c, (l, h))| c >= l && c < h)
            })
            .collect())
    }
}

pub fn coordinates(mut site: usize, shape: &[usize]) -> Vec<usize> {
    let mut out = vec![0; shape.len()];
    for axis in (0..shape.len()).rev() {
        out[axis] = site % shape[axis];
        site /= shape[axis];
    }
    out
}

pub fn index(coords: &[usize], shape: &[usize]) -> usize {
    coords.iter().zip(shape).fold(0, |acc, (c, s)| acc * s + c)
}
