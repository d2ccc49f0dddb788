//! Operators acting on a few labelled spins.
//!
//! The first site of `sites` is the most significant bit of the matrix index.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, HermitianOperator, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct LocalOp {
    sites: Vec<usize>,
    matrix: CMatrix,
}

#[inline]
fn bit(index: usize, pos: usize, len: usize) -> usize {
    (index >> (len - 1 - pos)) & 1
}

#[inline]
fn with_bit(index: usize, pos: usize, len: usize, value: usize) -> usize {
    let shift = len - 1 - pos;
    (index & !(1 << shift)) | (value << shift)
}

/// Inserts the bits of `removed` (ordered by the positions in `at`) into the
/// reduced index `reduced` defined on the remaining positions.
fn expand_index(reduced: usize, keep: &[usize], at: &[usize], removed: usize, len: usize) -> usize {
    let mut full = 0;
    for (p, &pos) in keep.iter().enumerate() {
        full = with_bit(full, pos, len, bit(reduced, p, keep.len()));
    }
    for (p, &pos) in at.iter().enumerate() {
        full = with_bit(full, pos, len, bit(removed, p, at.len()));
    }
    full
}

impl LocalOp {
    pub fn new(sites: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let dim = 1usize << sites.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        let mut sorted = sites.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != sites.len() {
            return Err(Error::InvalidModel("repeated site in local operator".into()));
        }
        Ok(Self { sites, matrix })
    }

    pub fn scalar(value: C64) -> Self {
        Self {
            sites: Vec::new(),
            matrix: CMatrix::from_element(1, 1, value),
        }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_parts(self) -> (Vec<usize>, CMatrix) {
        (self.sites, self.matrix)
    }

    pub fn hermitian(&self) -> HermitianOperator {
        HermitianOperator::symmetrized(self.matrix.clone())
    }

    fn position(&self, site: usize) -> Option<usize> {
        self.sites.iter().position(|&s| s == site)
    }

    pub fn acts_on(&self, site: usize) -> bool {
        self.position(site).is_some()
    }

    /// Embeds into `target`, which must contain every current site.
    pub fn extend(&self, target: &[usize]) -> Self {
        if target == self.sites.as_slice() {
            return self.clone();
        }
        let len = target.len();
        let pos: Vec<usize> = self
            .sites
            .iter()
            .map(|s| target.iter().position(|t| t == s).expect("target covers sites"))
            .collect();
        let k = self.sites.len();
        let dim = 1usize << len;
        let mut out = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            let mut i_sub = 0;
            for &p in &pos {
                i_sub = (i_sub << 1) | bit(i, p, len);
            }
            for j_sub in 0..(1usize << k) {
                let mut j = i;
                for (q, &p) in pos.iter().enumerate() {
                    j = with_bit(j, p, len, bit(j_sub, q, k));
                }
                out[(i, j)] = self.matrix[(i_sub, j_sub)];
            }
        }
        Self {
            sites: target.to_vec(),
            matrix: out,
        }
    }

    /// Same operator with its sites listed in `order`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        self.extend(order)
    }

    /// `(1 ⊗ U)† X (1 ⊗ U)` for an isometry `U` from spin `u` into the pair
    /// `(u, v)`, given as a 4×2 matrix in `u ⊗ v` order. The result no longer
    /// acts on `v`.
    pub fn pull_back_pair(&self, u: usize, v: usize, iso: &CMatrix) -> Self {
        if !self.acts_on(u) && !self.acts_on(v) {
            return self.clone();
        }
        let mut target = self.sites.clone();
        for s in [u, v] {
            if !target.contains(&s) {
                target.push(s);
            }
        }
        let x = self.extend(&target);
        let len = target.len();
        let pu = target.iter().position(|&s| s == u).unwrap();
        let pv = target.iter().position(|&s| s == v).unwrap();
        let keep: Vec<usize> = (0..len).filter(|&p| p != pv).collect();
        let rest: Vec<usize> = (0..len).filter(|&p| p != pu && p != pv).collect();
        let out_sites: Vec<usize> = keep.iter().map(|&p| target[p]).collect();
        let pu_out = keep.iter().position(|&p| p == pu).unwrap();
        let dim = 1usize << (len - 1);
        let mut out = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            let a = bit(i, pu_out, len - 1);
            let i_rest = strip_bit(i, pu_out, len - 1);
            for j in 0..dim {
                let b = bit(j, pu_out, len - 1);
                let j_rest = strip_bit(j, pu_out, len - 1);
                let mut acc = ZERO;
                for s in 0..4 {
                    let us = iso[(s, a)].conj();
                    if us == ZERO {
                        continue;
                    }
                    let row = expand_index(i_rest, &rest, &[pu, pv], s, len);
                    for t in 0..4 {
                        let ut = iso[(t, b)];
                        if ut == ZERO {
                            continue;
                        }
                        let col = expand_index(j_rest, &rest, &[pu, pv], t, len);
                        acc += us * x.matrix[(row, col)] * ut;
                    }
                }
                out[(i, j)] = acc;
            }
        }
        Self {
            sites: out_sites,
            matrix: out,
        }
    }

    /// `(⟨ψ|_v ⊗ 1) X (|ψ⟩_v ⊗ 1)`.
    pub fn project_site(&self, v: usize, psi: &CVector) -> Self {
        let Some(pv) = self.position(v) else {
            return self.clone();
        };
        let len = self.sites.len();
        let keep: Vec<usize> = (0..len).filter(|&p| p != pv).collect();
        let dim = 1usize << (len - 1);
        let mut out = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = ZERO;
                for a in 0..2 {
                    let row = expand_index(i, &keep, &[pv], a, len);
                    for b in 0..2 {
                        let col = expand_index(j, &keep, &[pv], b, len);
                        acc += psi[a].conj() * self.matrix[(row, col)] * psi[b];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        Self {
            sites: keep.iter().map(|&p| self.sites[p]).collect(),
            matrix: out,
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        let mut target = self.sites.clone();
        for &s in &other.sites {
            if !target.contains(&s) {
                target.push(s);
            }
        }
        let mine = self.extend(&target);
        let theirs = other.extend(&target);
        self.sites = target;
        self.matrix = mine.matrix + theirs.matrix;
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            sites: self.sites.clone(),
            matrix: &self.matrix * s,
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }
}

fn strip_bit(index: usize, pos: usize, len: usize) -> usize {
    let shift = len - 1 - pos;
    let high = index >> (shift + 1);
    let low = index & ((1 << shift) - 1);
    (high << shift) | low
}
