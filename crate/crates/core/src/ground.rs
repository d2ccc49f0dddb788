//! Ground spaces of complete homogeneous Hamiltonians and averages of
//! observables over the ground manifold of the original Hamiltonian.
//!
//! On each connected component of a natural complete homogeneous Hamiltonian
//! every constraint has the form `⟨β_uv| = λ_uv ⟨Ψ⁻|(L_u ⊗ L_v)` for
//! invertible single-spin gauges `L_v`, so the kernel is the image of the
//! symmetric subspace under `⊗ L_v⁻¹` and is spanned by the product states
//! `⊗ L_v⁻¹|α_j⟩` for pairwise independent seeds `α_j`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, epsilon, entanglement_defect, hermitian_eigen, kron, CMatrix, CVector, StateVector, C64, ONE, TAU_RANK,
    ZERO,
};
use crate::local::LocalOp;
use crate::model::{Hamiltonian, ENTANGLEMENT_TOL};
use crate::network::{NetworkNode, TreeTensorNetwork};
use crate::oracle::kernel_by_sweep;
use crate::reduction::{constraint_vector, ReductionResult};

pub const GAUGE_RESIDUAL_TOL: f64 = 1e-8;
pub const GRAM_TOL: f64 = 1e-12;
/// Smallest Gram eigenvalue for which a default product basis is kept; below
/// it small components switch to an exact dense kernel.
pub const PRODUCT_GRAM_FLOOR: f64 = 1e-6;
pub const MAX_OBSERVABLE_SPINS: usize = 4;
/// Largest non-natural component whose kernel is found by direct elimination.
pub const DENSE_COMPONENT_CAP: usize = 14;

/// Gauge operators `L_v` and couplings `λ_uv` of one connected component.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeSolution {
    pub spins: Vec<usize>,
    pub anchor: usize,
    /// `gauges[p]` belongs to `spins[p]`.
    pub gauges: Vec<CMatrix>,
    pub couplings: BTreeMap<(usize, usize), C64>,
}

impl GaugeSolution {
    pub fn gauge(&self, v: usize) -> Option<&CMatrix> {
        self.spins.iter().position(|&s| s == v).map(|p| &self.gauges[p])
    }

    pub fn coupling(&self, u: usize, v: usize) -> Option<C64> {
        self.couplings.get(&(u.min(v), u.max(v))).copied()
    }
}

fn coefficients(v: &CVector) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| v[2 * i + j])
}

fn singlet_form() -> CMatrix {
    epsilon().scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Solves for the gauge of a Hamiltonian whose active spins form one
/// complete homogeneous component.
pub fn solve_gauge(hc: &Hamiltonian) -> Result<GaugeSolution> {
    let spins: Vec<usize> = hc.active().iter().copied().collect();
    solve_gauge_on(hc, &spins)
}

fn check_homogeneous(hc: &Hamiltonian) -> Result<()> {
    if !hc.single_ops().is_empty() {
        return Err(Error::NotApplicable("complete Hamiltonian carries single-spin terms".into()));
    }
    if let Some(t) = hc.two_spin_terms().find(|t| t.rank() != 1) {
        return Err(Error::NotApplicable(format!(
            "term on ({}, {}) has rank {}",
            t.a,
            t.b,
            t.rank()
        )));
    }
    Ok(())
}

fn solve_gauge_on(hc: &Hamiltonian, spins: &[usize]) -> Result<GaugeSolution> {
    check_homogeneous(hc)?;
    let anchor = spins[0];
    let mut betas: BTreeMap<(usize, usize), CMatrix> = BTreeMap::new();
    for (i, &u) in spins.iter().enumerate() {
        for &v in &spins[i + 1..] {
            let t = hc
                .pair(u, v)
                .ok_or_else(|| Error::NotApplicable(format!("no constraint on ({u}, {v})")))?;
            let beta = constraint_vector(&t);
            if entanglement_defect(&beta)? <= ENTANGLEMENT_TOL {
                return Err(Error::NotNatural(u, v));
            }
            betas.insert((u, v), coefficients(beta.amplitudes()));
        }
    }
    let e_inv = singlet_form().try_inverse().expect("invertible");
    let mut gauges = Vec::with_capacity(spins.len());
    for &v in spins {
        if v == anchor {
            gauges.push(CMatrix::identity(2, 2));
            continue;
        }
        let l = (&e_inv * &betas[&(anchor, v)]).conjugate();
        let det = l.determinant();
        let s = det.sqrt();
        gauges.push(l.map(|z| z / s));
    }
    let e = singlet_form();
    let mut couplings = BTreeMap::new();
    for (&(u, v), b) in &betas {
        let lu = &gauges[spins.iter().position(|&s| s == u).unwrap()];
        let lv = &gauges[spins.iter().position(|&s| s == v).unwrap()];
        let w = lu.adjoint() * &e * lv.conjugate();
        let ww = w.dotc(&w);
        let lambda_bar = w.dotc(b) / ww;
        let residual = (b - &w * lambda_bar).norm() / b.norm();
        if residual > GAUGE_RESIDUAL_TOL {
            return Err(Error::Inconsistent { a: u, b: v, residual });
        }
        let lambda = lambda_bar.conj();
        couplings.insert((u, v), lambda);
    }
    Ok(GaugeSolution {
        spins: spins.to_vec(),
        anchor,
        gauges,
        couplings,
    })
}

/// Uniform superpositions of the basis states of each Hamming weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricBasis {
    pub n: usize,
    pub vectors: Vec<CVector>,
}

pub fn symmetric_basis(n: usize) -> SymmetricBasis {
    let dim = 1usize << n;
    let mut vectors = vec![CVector::zeros(dim); n + 1];
    for i in 0..dim {
        vectors[i.count_ones() as usize][i] = ONE;
    }
    for v in &mut vectors {
        let norm = v.norm();
        *v /= c64(norm, 0.0);
    }
    SymmetricBasis { n, vectors }
}

/// `cos θ_j |0⟩ + sin θ_j |1⟩` with `θ_j = jπ/(n+1)`, `j = 0..=n`.
pub fn default_seeds(n: usize) -> Vec<StateVector> {
    (0..=n)
        .map(|j| {
            let theta = j as f64 * std::f64::consts::PI / (n + 1) as f64;
            StateVector::from_slice(&[c64(theta.cos(), 0.0), c64(theta.sin(), 0.0)]).expect("unit vector")
        })
        .collect()
}

/// Product states `⊗_v L_v⁻¹|α_j⟩` spanning the kernel of one component.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBasis {
    pub spins: Vec<usize>,
    /// `factors[j][p]` is the normalized factor of vector `j` on `spins[p]`.
    pub factors: Vec<Vec<CVector>>,
}

impl ProductBasis {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// The `j`-th vector on `spins` in increasing order.
    pub fn vector(&self, j: usize) -> CVector {
        self.factors[j]
            .iter()
            .fold(CVector::from_element(1, ONE), |acc, f| acc.kronecker(f))
    }

    pub fn gram(&self) -> CMatrix {
        let k = self.len();
        CMatrix::from_fn(k, k, |a, b| {
            self.factors[a]
                .iter()
                .zip(&self.factors[b])
                .map(|(x, y)| x.dotc(y))
                .product()
        })
    }
}

pub fn product_basis(g: &GaugeSolution, seeds: Option<&[StateVector]>) -> Result<ProductBasis> {
    let n = g.spins.len();
    let owned;
    let seeds = match seeds {
        Some(s) => s,
        None => {
            owned = default_seeds(n);
            &owned
        }
    };
    if seeds.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: seeds.len(),
        });
    }
    for (i, a) in seeds.iter().enumerate() {
        for b in &seeds[i + 1..] {
            let det = a.amplitudes()[0] * b.amplitudes()[1] - a.amplitudes()[1] * b.amplitudes()[0];
            if det.norm() <= 1e-12 * a.norm() * b.norm() {
                return Err(Error::DependentSeeds);
            }
        }
    }
    let inverses: Vec<CMatrix> = g
        .gauges
        .iter()
        .map(|l| l.clone().try_inverse().ok_or(Error::GramSingular(0.0)))
        .collect::<Result<_>>()?;
    let factors = seeds
        .iter()
        .map(|alpha| {
            inverses
                .iter()
                .map(|li| (li * alpha.amplitudes()).normalize())
                .collect()
        })
        .collect();
    Ok(ProductBasis {
        spins: g.spins.clone(),
        factors,
    })
}

/// Spanning set of the kernel of one connected component of `H_c`.
#[derive(Clone, Debug, PartialEq)]
pub enum ComponentBasis {
    Product {
        basis: ProductBasis,
        gauge: Option<GaugeSolution>,
    },
    /// Orthonormal kernel vectors on `spins` in increasing order; used for
    /// components that are not natural.
    Dense { spins: Vec<usize>, vectors: Vec<CVector> },
}

impl ComponentBasis {
    pub fn spins(&self) -> &[usize] {
        match self {
            ComponentBasis::Product { basis, .. } => &basis.spins,
            ComponentBasis::Dense { spins, .. } => spins,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ComponentBasis::Product { basis, .. } => basis.len(),
            ComponentBasis::Dense { vectors, .. } => vectors.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, j: usize) -> CVector {
        match self {
            ComponentBasis::Product { basis, .. } => basis.vector(j),
            ComponentBasis::Dense { vectors, .. } => vectors[j].clone(),
        }
    }

    fn gram(&self) -> CMatrix {
        match self {
            ComponentBasis::Product { basis, .. } => basis.gram(),
            ComponentBasis::Dense { vectors, .. } => CMatrix::identity(vectors.len(), vectors.len()),
        }
    }

    /// `M_jk(a, b) = Σ_r conj(Φ_j(a, r)) Φ_k(b, r)` where `a`, `b` index the
    /// configurations of `local` (positions into `spins`) and `r` the rest.
    fn transfer(&self, j: usize, k: usize, local: &[usize]) -> CMatrix {
        let d = 1usize << local.len();
        match self {
            ComponentBasis::Product { basis, .. } => {
                let fj = &basis.factors[j];
                let fk = &basis.factors[k];
                let rest: C64 = (0..fj.len())
                    .filter(|p| !local.contains(p))
                    .map(|p| fj[p].dotc(&fk[p]))
                    .product();
                CMatrix::from_fn(d, d, |a, b| {
                    let mut x = rest;
                    for (q, &p) in local.iter().enumerate() {
                        let shift = local.len() - 1 - q;
                        x *= fj[p][(a >> shift) & 1].conj() * fk[p][(b >> shift) & 1];
                    }
                    x
                })
            }
            ComponentBasis::Dense { spins, vectors } => {
                let n = spins.len();
                let vj = &vectors[j];
                let vk = &vectors[k];
                let rest: Vec<usize> = (0..n).filter(|p| !local.contains(p)).collect();
                let mut m = CMatrix::zeros(d, d);
                for r in 0..(1usize << rest.len()) {
                    let base = place(r, &rest, n);
                    for a in 0..d {
                        let ia = base | place(a, local, n);
                        let x = vj[ia].conj();
                        if x == ZERO {
                            continue;
                        }
                        for b in 0..d {
                            m[(a, b)] += x * vk[base | place(b, local, n)];
                        }
                    }
                }
                m
            }
        }
    }
}

/// Scatters the bits of `value` onto `positions` of an `n`-bit index.
fn place(value: usize, positions: &[usize], n: usize) -> usize {
    let k = positions.len();
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (q, &p)| acc | (((value >> (k - 1 - q)) & 1) << (n - 1 - p)))
}

/// `Δ^{-1/2}`-weighted change of basis `X = U Δ^{-1/2}` with `X† G X = 1`.
fn orthonormalizer(gram: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eigen(gram);
    let min = eig.values.first().copied().unwrap_or(1.0);
    if min < GRAM_TOL {
        return Err(Error::GramSingular(min));
    }
    let k = gram.nrows();
    Ok(CMatrix::from_fn(k, k, |i, j| eig.vectors[(i, j)] / eig.values[j].sqrt()))
}

fn well_conditioned(gram: &CMatrix) -> bool {
    hermitian_eigen(gram).values.first().is_some_and(|&m| m >= PRODUCT_GRAM_FLOOR)
}

fn dense_component(hc: &Hamiltonian, comp: Vec<usize>) -> Result<ComponentBasis> {
    let set = comp.iter().copied().collect();
    let vectors = kernel_by_sweep(&hc.restricted_to(&set), TAU_RANK)?;
    if vectors.is_empty() {
        return Err(Error::FrustratedInput);
    }
    Ok(ComponentBasis::Dense { spins: comp, vectors })
}

/// Ground space of a complete homogeneous Hamiltonian as a tensor product
/// over its connected components.
#[derive(Clone, Debug)]
pub struct GroundSpace {
    components: Vec<ComponentBasis>,
    orthonormalizers: Vec<CMatrix>,
}

/// Restriction `X† W(Ω) X` of an observable to the kernel, on the tensor
/// product of the components it touches.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedObservable {
    /// Indices of the touched components, most significant first.
    pub components: Vec<usize>,
    pub matrix: CMatrix,
}

impl RestrictedObservable {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Average over the maximally mixed state of the manifold.
    pub fn mean(&self) -> f64 {
        self.matrix.trace().re / self.dim() as f64
    }
}

impl GroundSpace {
    pub fn new(hc: &Hamiltonian) -> Result<Self> {
        Self::with_seeds(hc, None)
    }

    /// Uses `seeds(n_c)` for every natural component of size `n_c`.
    pub fn with_seeds(hc: &Hamiltonian, seeds: Option<&dyn Fn(usize) -> Vec<StateVector>>) -> Result<Self> {
        check_homogeneous(hc)?;
        let mut components = Vec::new();
        for comp in hc.components() {
            let own_seeds = seeds.map(|f| f(comp.len()));
            let basis = if comp.len() == 1 {
                let gauge = trivial_gauge(comp[0]);
                ComponentBasis::Product {
                    basis: product_basis(&gauge, own_seeds.as_deref())?,
                    gauge: Some(gauge),
                }
            } else {
                match solve_gauge_on(hc, &comp) {
                    Ok(gauge) => {
                        let basis = product_basis(&gauge, own_seeds.as_deref())?;
                        if own_seeds.is_none() && comp.len() <= DENSE_COMPONENT_CAP && !well_conditioned(&basis.gram()) {
                            dense_component(hc, comp)?
                        } else {
                            ComponentBasis::Product {
                                basis,
                                gauge: Some(gauge),
                            }
                        }
                    }
                    Err(Error::NotNatural(..) | Error::Inconsistent { .. } | Error::NotApplicable(_))
                        if comp.len() <= DENSE_COMPONENT_CAP =>
                    {
                        dense_component(hc, comp)?
                    }
                    Err(e) => return Err(e),
                }
            };
            components.push(basis);
        }
        let orthonormalizers = components
            .iter()
            .map(|c| orthonormalizer(&c.gram()))
            .collect::<Result<_>>()?;
        Ok(Self {
            components,
            orthonormalizers,
        })
    }

    pub fn components(&self) -> &[ComponentBasis] {
        &self.components
    }

    /// Kernel dimension: the product of the component dimensions.
    pub fn dim(&self) -> usize {
        self.components.iter().map(ComponentBasis::len).product()
    }

    fn component_of(&self, v: usize) -> Option<usize> {
        self.components.iter().position(|c| c.spins().contains(&v))
    }

    /// Orthonormal kernel vectors of one component, on its spins in increasing order.
    pub fn orthonormal_vectors(&self, component: usize) -> Vec<CVector> {
        let c = &self.components[component];
        let x = &self.orthonormalizers[component];
        let raw: Vec<CVector> = (0..c.len()).map(|j| c.vector(j)).collect();
        (0..c.len())
            .map(|k| {
                raw.iter()
                    .enumerate()
                    .fold(CVector::zeros(raw[0].len()), |acc, (j, v)| acc + v * x[(j, k)])
            })
            .collect()
    }

    /// Orthonormal basis of the whole kernel on the active spins in increasing
    /// order. Intended for small systems.
    pub fn orthonormal_basis(&self) -> Vec<CVector> {
        let mut spins: Vec<usize> = Vec::new();
        let mut states: Vec<CVector> = vec![CVector::from_element(1, ONE)];
        for c in 0..self.components.len() {
            let vs = self.orthonormal_vectors(c);
            states = states
                .iter()
                .flat_map(|s| vs.iter().map(move |v| s.kronecker(v)))
                .collect();
            spins.extend_from_slice(self.components[c].spins());
        }
        states
            .iter()
            .map(|s| crate::network::permute_to_sorted(s, &spins))
            .collect()
    }

    /// `Ω̄ = X† W(Ω) X` on the components touched by `op`.
    pub fn restrict(&self, op: &LocalOp) -> Result<RestrictedObservable> {
        let mut touched: Vec<usize> = Vec::new();
        for &s in op.sites() {
            let c = self
                .component_of(s)
                .ok_or_else(|| Error::UnknownVertex(s.to_string()))?;
            if !touched.contains(&c) {
                touched.push(c);
            }
        }
        touched.sort_unstable();
        if touched.is_empty() {
            let x = op.matrix()[(0, 0)];
            return Ok(RestrictedObservable {
                components: touched,
                matrix: CMatrix::from_element(1, 1, x),
            });
        }
        // For each touched component: op positions it owns and their positions
        // inside the component.
        let mut op_pos: Vec<Vec<usize>> = Vec::new();
        let mut comp_pos: Vec<Vec<usize>> = Vec::new();
        for &c in &touched {
            let spins = self.components[c].spins();
            let mine: Vec<usize> = (0..op.sites().len())
                .filter(|&q| spins.contains(&op.sites()[q]))
                .collect();
            comp_pos.push(
                mine.iter()
                    .map(|&q| spins.iter().position(|&s| s == op.sites()[q]).unwrap())
                    .collect(),
            );
            op_pos.push(mine);
        }
        let dims: Vec<usize> = touched.iter().map(|&c| self.components[c].len()).collect();
        let total: usize = dims.iter().product();
        let k = op.sites().len();
        let local_dim = 1usize << k;
        let split = |a: usize, part: &[usize]| {
            part.iter()
                .fold(0, |acc, &q| (acc << 1) | ((a >> (k - 1 - q)) & 1))
        };
        // transfers[t][j * d + k]
        let transfers: Vec<Vec<CMatrix>> = touched
            .iter()
            .enumerate()
            .map(|(t, &c)| {
                let d = dims[t];
                (0..d * d)
                    .map(|jk| self.components[c].transfer(jk / d, jk % d, &comp_pos[t]))
                    .collect()
            })
            .collect();
        let multi = |mut idx: usize| {
            let mut out = vec![0; dims.len()];
            for t in (0..dims.len()).rev() {
                out[t] = idx % dims[t];
                idx /= dims[t];
            }
            out
        };
        let parts: Vec<Vec<usize>> = (0..local_dim)
            .map(|a| op_pos.iter().map(|p| split(a, p)).collect())
            .collect();
        let m = op.matrix();
        let mut w = CMatrix::zeros(total, total);
        for jj in 0..total {
            let js = multi(jj);
            for kk in 0..total {
                let ks = multi(kk);
                let blocks: Vec<&CMatrix> = (0..dims.len())
                    .map(|t| &transfers[t][js[t] * dims[t] + ks[t]])
                    .collect();
                let mut acc = ZERO;
                for a in 0..local_dim {
                    for b in 0..local_dim {
                        let x = m[(a, b)];
                        if x == ZERO {
                            continue;
                        }
                        let mut y = x;
                        for (t, block) in blocks.iter().enumerate() {
                            y *= block[(parts[a][t], parts[b][t])];
                        }
                        acc += y;
                    }
                }
                // ⟨Φ_J|Ω|Φ_K⟩ = Σ Ω_ab ⟨Φ_J|a⟩⟨b|Φ_K⟩
                w[(jj, kk)] = acc;
            }
        }
        let x = touched
            .iter()
            .fold(CMatrix::from_element(1, 1, ONE), |acc, &c| kron(&acc, &self.orthonormalizers[c]));
        let matrix = x.adjoint() * w * &x;
        let matrix = (&matrix + matrix.adjoint()) * c64(0.5, 0.0);
        Ok(RestrictedObservable {
            components: touched,
            matrix,
        })
    }

    /// Embeds a restriction into the full kernel, ordered by component index.
    pub fn embed(&self, r: &RestrictedObservable) -> CMatrix {
        let untouched: Vec<usize> = (0..self.components.len())
            .filter(|c| !r.components.contains(c))
            .collect();
        let rest: usize = untouched.iter().map(|&c| self.components[c].len()).product();
        let full = kron(&CMatrix::identity(rest, rest), &r.matrix);
        if r.components.is_empty() {
            return full;
        }
        let mut order = untouched;
        order.extend_from_slice(&r.components);
        let dims: Vec<usize> = order.iter().map(|&c| self.components[c].len()).collect();
        permute_subsystems(&full, &order, &dims)
    }
}

/// Reorders the tensor factors of `m`, given in `order`, into increasing order.
fn permute_subsystems(m: &CMatrix, order: &[usize], dims: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    let n = order.len();
    let mut sorted: Vec<usize> = (0..n).collect();
    sorted.sort_by_key(|&p| order[p]);
    let map = |idx: usize| {
        let mut digits = vec![0; n];
        let mut r = idx;
        for p in (0..n).rev() {
            digits[p] = r % dims[p];
            r /= dims[p];
        }
        sorted.iter().fold(0, |acc, &p| acc * dims[p] + digits[p])
    };
    let targets: Vec<usize> = (0..total).map(map).collect();
    let mut out = CMatrix::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            out[(targets[i], targets[j])] = m[(i, j)];
        }
    }
    out
}

fn trivial_gauge(v: usize) -> GaugeSolution {
    GaugeSolution {
        spins: vec![v],
        anchor: v,
        gauges: vec![CMatrix::identity(2, 2)],
        couplings: BTreeMap::new(),
    }
}

/// Kernel dimension of a complete homogeneous Hamiltonian.
pub fn complete_kernel_dimension(hc: &Hamiltonian) -> Result<usize> {
    Ok(GroundSpace::new(hc)?.dim())
}

/// `T† Ω T` for the map `T` of a reduction network.
pub fn pull_back(network: &TreeTensorNetwork, op: &LocalOp) -> LocalOp {
    let mut out = op.clone();
    for node in network.nodes() {
        out = match node {
            NetworkNode::Contraction(c) => out.pull_back_pair(c.u, c.v, &c.isometry),
            NetworkNode::Deletion(d) => out.project_site(d.v, &d.state),
        };
    }
    out
}

/// Average of `op` over the maximally mixed state of the ground manifold of
/// the Hamiltonian that produced `result`.
pub fn expectation_ground_manifold(result: &ReductionResult, op: &LocalOp) -> Result<f64> {
    let reduced = result.reduced().ok_or(Error::FrustratedInput)?;
    if op.sites().len() > MAX_OBSERVABLE_SPINS {
        return Err(Error::ObservableTooLarge(op.sites().len(), MAX_OBSERVABLE_SPINS));
    }
    for &s in op.sites() {
        if !reduced.network.outputs().contains(&s) {
            return Err(Error::UnknownVertex(s.to_string()));
        }
    }
    let pulled = pull_back(&reduced.network, op);
    let space = GroundSpace::new(&reduced.complete)?;
    Ok(space.restrict(&pulled)?.mean())
}
