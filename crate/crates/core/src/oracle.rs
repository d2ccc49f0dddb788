//! Brute-force ground truth by exact diagonalization.
//!
//! Everything here works on explicit state vectors over the active spins of a
//! Hamiltonian, listed in increasing order with the first spin as the most
//! significant bit.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, Eigen, C64, TAU_RANK, ZERO};
use crate::local::LocalOp;
use crate::model::Hamiltonian;
use crate::network::permute_to_sorted;

pub const DEFAULT_MAX_SPINS: usize = 14;

/// Full matrix of a Hamiltonian on its active spins.
#[derive(Clone, Debug)]
pub struct DenseHamiltonian {
    spins: Vec<usize>,
    matrix: CMatrix,
}

impl DenseHamiltonian {
    pub fn spins(&self) -> &[usize] {
        &self.spins
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn build_full(h: &Hamiltonian) -> Result<DenseHamiltonian> {
    build_full_capped(h, DEFAULT_MAX_SPINS)
}

pub fn build_full_capped(h: &Hamiltonian, cap: usize) -> Result<DenseHamiltonian> {
    let spins: Vec<usize> = h.active().iter().copied().collect();
    let n = spins.len();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let dim = 1usize << n;
    let mut matrix = CMatrix::zeros(dim, dim);
    for term in h.local_terms() {
        add_lifted(&mut matrix, &term, &spins);
    }
    Ok(DenseHamiltonian { spins, matrix })
}

/// Sum of `terms` on `spins`, which must contain every site of every term.
pub fn build_from_terms(spins: Vec<usize>, terms: &[LocalOp], cap: usize) -> Result<DenseHamiltonian> {
    let n = spins.len();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    if let Some(s) = terms.iter().flat_map(|t| t.sites()).find(|s| !spins.contains(s)) {
        return Err(Error::UnknownVertex(s.to_string()));
    }
    let dim = 1usize << n;
    let mut matrix = CMatrix::zeros(dim, dim);
    for term in terms {
        add_lifted(&mut matrix, term, &spins);
    }
    Ok(DenseHamiltonian { spins, matrix })
}

fn positions(op: &LocalOp, spins: &[usize]) -> Vec<usize> {
    op.sites()
        .iter()
        .map(|s| spins.iter().position(|t| t == s).expect("operator site is active"))
        .collect()
}

/// Index of the local configuration of `pos` inside the global basis index `i`.
#[inline]
fn local_index(i: usize, pos: &[usize], n: usize) -> usize {
    pos.iter().fold(0, |acc, &p| (acc << 1) | ((i >> (n - 1 - p)) & 1))
}

#[inline]
fn replace_local(i: usize, pos: &[usize], n: usize, local: usize) -> usize {
    let k = pos.len();
    pos.iter().enumerate().fold(i, |acc, (q, &p)| {
        let shift = n - 1 - p;
        (acc & !(1 << shift)) | (((local >> (k - 1 - q)) & 1) << shift)
    })
}

fn add_lifted(matrix: &mut CMatrix, op: &LocalOp, spins: &[usize]) {
    let n = spins.len();
    let pos = positions(op, spins);
    let k = pos.len();
    let m = op.matrix();
    for i in 0..matrix.nrows() {
        let a = local_index(i, &pos, n);
        for b in 0..(1usize << k) {
            let x = m[(a, b)];
            if x != ZERO {
                matrix[(i, replace_local(i, &pos, n, b))] += x;
            }
        }
    }
}

/// `op` applied to a state on `spins`.
pub fn apply_local(op: &LocalOp, spins: &[usize], psi: &CVector) -> CVector {
    let n = spins.len();
    let pos = positions(op, spins);
    let k = pos.len();
    let m = op.matrix();
    let mut out = CVector::zeros(psi.len());
    for (i, out_i) in out.iter_mut().enumerate() {
        let a = local_index(i, &pos, n);
        let mut acc = ZERO;
        for b in 0..(1usize << k) {
            let x = m[(a, b)];
            if x != ZERO {
                acc += x * psi[replace_local(i, &pos, n, b)];
            }
        }
        *out_i = acc;
    }
    out
}

/// `⟨ψ|op|ψ⟩` for a state on `spins`.
pub fn local_expectation(op: &LocalOp, spins: &[usize], psi: &CVector) -> C64 {
    psi.dotc(&apply_local(op, spins, psi))
}

/// Hermitian eigendecomposition through faer, eigenvalues ascending.
pub fn dense_eigen(m: &CMatrix) -> Result<Eigen> {
    let n = m.nrows();
    let f = Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    let evd = f
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::InvalidConfig("eigensolver did not converge".into()))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| {
        let z = u[(i, j)];
        C64::new(z.re, z.im)
    });
    Ok(Eigen { values, vectors })
}

#[derive(Clone, Debug)]
pub struct GroundData {
    pub energy: f64,
    /// Number of eigenvalues at most `τ·‖D‖`.
    pub kernel_dim: usize,
    pub frustration_free: bool,
    /// Orthonormal eigenvectors of the kernel, or of the lowest level when the
    /// kernel is trivial.
    pub basis: Vec<CVector>,
    pub spins: Vec<usize>,
    pub norm: f64,
}

impl GroundData {
    /// `tr(P₀ Ω) / tr(P₀)` over `basis`.
    pub fn expectation(&self, op: &LocalOp) -> f64 {
        manifold_expectation(&self.basis, &self.spins, op)
    }

    /// `P₀` as a dense matrix.
    pub fn projector(&self) -> CMatrix {
        let dim = 1usize << self.spins.len();
        let mut p = CMatrix::zeros(dim, dim);
        for v in &self.basis {
            p += v * v.adjoint();
        }
        p
    }
}

pub fn manifold_expectation(basis: &[CVector], spins: &[usize], op: &LocalOp) -> f64 {
    let total: f64 = basis.iter().map(|v| local_expectation(op, spins, v).re).sum();
    total / basis.len() as f64
}

pub fn ground_data(d: &DenseHamiltonian, tau: f64) -> Result<GroundData> {
    let eig = dense_eigen(&d.matrix)?;
    let norm = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = tau * norm;
    let energy = eig.values[0];
    let kernel_dim = eig.values.iter().take_while(|&&v| v <= cut).count();
    let frustration_free = energy <= cut;
    let take = if kernel_dim > 0 {
        kernel_dim
    } else {
        let e0 = energy;
        let gap = cut.max(1e-9 * norm.max(1.0));
        eig.values.iter().take_while(|&&v| v - e0 <= gap).count()
    };
    let basis = (0..take).map(|k| eig.vectors.column(k).into_owned()).collect();
    Ok(GroundData {
        energy,
        kernel_dim,
        frustration_free,
        basis,
        spins: d.spins.clone(),
        norm,
    })
}

/// Dense diagonalization with the shared rank tolerance.
pub fn ground_data_of(h: &Hamiltonian) -> Result<GroundData> {
    ground_data(&build_full(h)?, TAU_RANK)
}

/// Number of singular values above `tau` of the coefficient matrix of `psi`
/// across `region | rest`.
pub fn schmidt_rank_across(psi: &CVector, spins: &[usize], region: &[usize], tau: f64) -> usize {
    let n = spins.len();
    let a_pos: Vec<usize> = (0..n).filter(|&p| region.contains(&spins[p])).collect();
    let b_pos: Vec<usize> = (0..n).filter(|&p| !region.contains(&spins[p])).collect();
    if a_pos.is_empty() || b_pos.is_empty() {
        return 1;
    }
    let rows = 1usize << a_pos.len();
    let cols = 1usize << b_pos.len();
    let mut m = CMatrix::zeros(rows, cols);
    for (i, &amp) in psi.iter().enumerate() {
        m[(local_index(i, &a_pos, n), local_index(i, &b_pos, n))] = amp;
    }
    let sv = m.singular_values();
    let top = sv.iter().fold(0.0f64, |x, &y| x.max(y));
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tau * top.max(psi.norm())).count()
}

/// Orthonormal basis of the common kernel of all terms, built by adding spins
/// one at a time and keeping only the kernel of the terms already covered.
///
/// Memory scales with `2ⁿ·dim ker`, so this reaches lattices that full
/// diagonalization cannot. Returns vectors on the active spins in increasing
/// order.
pub fn kernel_by_sweep(h: &Hamiltonian, tau: f64) -> Result<Vec<CVector>> {
    let order = sweep_order(h);
    let scale: f64 = h.local_terms().iter().map(|t| t.hermitian().norm()).sum::<f64>().max(f64::MIN_POSITIVE);
    let terms = h.local_terms();
    let mut placed: Vec<usize> = Vec::new();
    let mut basis = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for &s in &order {
        placed.push(s);
        let k = basis.ncols();
        let rows = basis.nrows() * 2;
        let mut cand = CMatrix::zeros(rows, 2 * k);
        for j in 0..k {
            for i in 0..basis.nrows() {
                let x = basis[(i, j)];
                cand[(2 * i, 2 * j)] = x;
                cand[(2 * i + 1, 2 * j + 1)] = x;
            }
        }
        let new_terms: Vec<&LocalOp> = terms
            .iter()
            .filter(|t| t.acts_on(s) && t.sites().iter().all(|x| placed.contains(x)))
            .collect();
        if new_terms.is_empty() {
            basis = cand;
            continue;
        }
        let mut applied = CMatrix::zeros(rows, 2 * k);
        for t in &new_terms {
            for j in 0..2 * k {
                let col = apply_local(t, &placed, &cand.column(j).into_owned());
                let mut dst = applied.column_mut(j);
                dst += col;
            }
        }
        let restricted = cand.adjoint() * applied;
        let restricted = (&restricted + restricted.adjoint()) * C64::new(0.5, 0.0);
        let eig = dense_eigen(&restricted)?;
        let keep = eig.values.iter().take_while(|&&v| v <= tau * scale).count();
        basis = &cand * eig.vectors.columns(0, keep);
        if keep == 0 {
            return Ok(Vec::new());
        }
    }
    Ok((0..basis.ncols())
        .map(|j| permute_to_sorted(&basis.column(j).into_owned(), &placed))
        .collect())
}

/// Breadth-first order over the interaction graph, which keeps the
/// intermediate kernels small.
fn sweep_order(h: &Hamiltonian) -> Vec<usize> {
    let mut order = Vec::new();
    for comp in h.components() {
        let mut seen = std::collections::BTreeSet::new();
        let mut queue = std::collections::VecDeque::from([comp[0]]);
        seen.insert(comp[0]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for w in h.neighbors(v) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
    }
    order
}
