//! Instances with known ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::lattice::Lattice;
use crate::linalg::{c64, kron, outer, CMatrix, CVector, StateVector, ZERO};
use crate::model::{classify_naturality, Hamiltonian, TwoSpinTerm};
use crate::reduction::diagonal_projector;

/// Largest condition number accepted for random gauge operators.
pub const MAX_GAUGE_CONDITION: f64 = 10.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-random unit vector.
pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> CVector {
    let v = CVector::from_fn(dim, |_, _| c64(gaussian(rng), gaussian(rng)));
    v.normalize()
}

/// Haar-random orthonormal `dim × r` frame.
pub fn random_frame<R: Rng>(rng: &mut R, dim: usize, r: usize) -> CMatrix {
    let g = CMatrix::from_fn(dim, r, |_, _| c64(gaussian(rng), gaussian(rng)));
    g.qr().q()
}

/// Product state `|a⟩ ⊗ |b⟩` with Haar-random factors.
pub fn random_product_state<R: Rng>(rng: &mut R) -> CVector {
    random_state(rng, 2).kronecker(&random_state(rng, 2))
}

/// Positive operator with image spanned by `frame`, eigenvalues in `[0.5, 2]`.
pub fn psd_on_frame<R: Rng>(rng: &mut R, frame: &CMatrix) -> CMatrix {
    let r = frame.ncols();
    let inner = random_frame(rng, r, r);
    let d = CMatrix::from_diagonal(&CVector::from_fn(r, |_, _| c64(rng.random_range(0.5..2.0), 0.0)));
    let w = frame * inner;
    &w * d * w.adjoint()
}

/// Invertible 2×2 operator with entries uniform in the unit disc and
/// condition number at most [`MAX_GAUGE_CONDITION`].
pub fn random_gauge<R: Rng>(rng: &mut R) -> CMatrix {
    loop {
        let m = CMatrix::from_fn(2, 2, |_, _| loop {
            let (x, y) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if x * x + y * y <= 1.0 {
                break c64(x, y);
            }
        });
        let sv = m.singular_values();
        if sv[1] > 0.0 && sv[0] / sv[1] <= MAX_GAUGE_CONDITION {
            return m;
        }
    }
}

/// `(A† ⊗ B†)|Ψ⁻⟩`, normalized: the vector of the functional `⟨Ψ⁻|(A ⊗ B)`.
pub fn gauged_constraint(a: &CMatrix, b: &CMatrix) -> CVector {
    let singlet = StateVector::singlet().into_amplitudes();
    (kron(&a.adjoint(), &b.adjoint()) * singlet).normalize()
}

/// Complete graph of rank-1 constraints `⟨Ψ⁻|(L_u ⊗ L_v)` with random gauges.
/// Its kernel has dimension `n + 1`.
pub fn planted_complete(n: usize, seed: u64) -> Hamiltonian {
    let mut rng = rng(seed);
    let gauges: Vec<CMatrix> = (0..n).map(|_| random_gauge(&mut rng)).collect();
    let mut h = Hamiltonian::with_spins(n);
    for a in 0..n {
        for b in a + 1..n {
            let beta = gauged_constraint(&gauges[a], &gauges[b]);
            h.add_two_spin(a, b, outer(&beta, &beta)).expect("valid term");
        }
    }
    h
}

/// A generated Hamiltonian together with its kernel dimension.
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub hamiltonian: Hamiltonian,
    pub kernel_dim: usize,
    /// Vertex sets encoding one logical spin each.
    pub clusters: Vec<Vec<usize>>,
}

/// Grows a frustration-free natural instance on `lattice` from a planted
/// core by `growth` random merges of neighbouring spins into clusters.
///
/// Each cluster encodes one spin of the core as
/// `|x⟩ ↦ ⊗_v G_v |x ⊕ f_v⟩`. Edges inside a cluster carry rank-2 terms
/// whose kernel is the code space of the edge; edges between clusters carry
/// the gauged singlet constraint of the core, pulled through the encodings.
/// Without merges the kernel has dimension `n + 1`; a single cluster leaves
/// exactly its two-dimensional code. Mixed cases are counted exactly on the
/// logical model and may be frustrated.
pub fn reverse_network_instance(lattice: &Lattice, growth: usize, seed: u64) -> GeneratedInstance {
    let mut rng = rng(seed);
    let n = lattice.n;
    let mut uf = petgraph::unionfind::UnionFind::<usize>::new(n);
    let mut merged = 0;
    while merged < growth {
        let open: Vec<(usize, usize)> = lattice
            .edges
            .iter()
            .copied()
            .filter(|&(a, b)| !uf.equiv(a, b))
            .collect();
        if open.is_empty() {
            break;
        }
        let (a, b) = open[rng.random_range(0..open.len())];
        uf.union(a, b);
        merged += 1;
    }
    let mut clusters = crate::percolation::groups(uf);
    clusters.sort_by_key(|c| c[0]);
    let mut cluster_of = vec![0; n];
    for (c, members) in clusters.iter().enumerate() {
        for &v in members {
            cluster_of[v] = c;
        }
    }
    let core: Vec<CMatrix> = (0..clusters.len()).map(|_| random_gauge(&mut rng)).collect();
    // Encoding of each vertex: (flip, local gauge). Singletons use the identity
    // encoding so that zero growth reproduces the planted core draw for draw.
    let encodings: Vec<(bool, CMatrix)> = (0..n)
        .map(|v| {
            if clusters[cluster_of[v]].len() == 1 {
                (false, CMatrix::identity(2, 2))
            } else {
                (rng.random_bool(0.5), random_gauge(&mut rng))
            }
        })
        .collect();
    let flip = |f: bool| if f { crate::linalg::pauli_x() } else { CMatrix::identity(2, 2) };
    let mut h = Hamiltonian::with_spins(n);
    for &(a, b) in &lattice.edges {
        let (fa, ga) = &encodings[a];
        let (fb, gb) = &encodings[b];
        if cluster_of[a] == cluster_of[b] {
            let code: Vec<CVector> = (0..2)
                .map(|x| {
                    let xa = CVector::from_fn(2, |i, _| if i == (x ^ *fa as usize) { c64(1.0, 0.0) } else { ZERO });
                    let xb = CVector::from_fn(2, |i, _| if i == (x ^ *fb as usize) { c64(1.0, 0.0) } else { ZERO });
                    (ga * xa).kronecker(&(gb * xb))
                })
                .collect();
            let q = CMatrix::from_columns(&code).qr().q();
            let orthonormal: Vec<StateVector> = (0..2)
                .map(|j| StateVector::new(q.column(j).into_owned()).expect("nonzero"))
                .collect();
            let complement = crate::linalg::orthogonal_complement(&orthonormal, 4);
            let frame = CMatrix::from_columns(&complement.iter().map(|s| s.amplitudes().clone()).collect::<Vec<_>>());
            let m = loop {
                let m = psd_on_frame(&mut rng, &frame);
                let term = TwoSpinTerm::new(a, b, crate::linalg::HermitianOperator::symmetrized(m.clone()))
                    .expect("4×4");
                if classify_naturality(&term).is_ok_and(|v| v.natural) {
                    break m;
                }
            };
            h.add_two_spin(a, b, m).expect("valid term");
        } else {
            let la = &core[cluster_of[a]] * flip(*fa) * ga.clone().try_inverse().expect("invertible");
            let lb = &core[cluster_of[b]] * flip(*fb) * gb.clone().try_inverse().expect("invertible");
            let beta = gauged_constraint(&la, &lb);
            h.add_two_spin(a, b, outer(&beta, &beta)).expect("valid term");
        }
    }
    let kernel_dim = logical_kernel_dim(lattice, &h, &clusters, &cluster_of, &encodings);
    GeneratedInstance {
        hamiltonian: h,
        kernel_dim,
        clusters,
    }
}

/// Largest logical component whose kernel is counted by direct elimination;
/// larger ones go through the reduction engine.
const LOGICAL_SWEEP_CAP: usize = 18;

/// Kernel dimension of the grown instance, computed on the cluster code spaces.
///
/// The intra-cluster terms confine every cluster to its two-dimensional code,
/// so the kernel is the image of the kernel of a logical model with one spin
/// per cluster. A cluster with more than one vertex keeps its logical value in
/// its other vertices, so inter-cluster conditions split by that value.
fn logical_kernel_dim(
    lattice: &Lattice,
    h: &Hamiltonian,
    clusters: &[Vec<usize>],
    cluster_of: &[usize],
    encodings: &[(bool, CMatrix)],
) -> usize {
    let flip = |f: bool| if f { crate::linalg::pauli_x() } else { CMatrix::identity(2, 2) };
    let encode = |v: usize| &encodings[v].1 * flip(encodings[v].0);
    let splits = |c: usize| -> Vec<CMatrix> {
        if clusters[c].len() > 1 {
            (0..2)
                .map(|x| CMatrix::from_fn(2, 2, |i, j| if i == x && j == x { c64(1.0, 0.0) } else { ZERO }))
                .collect()
        } else {
            vec![CMatrix::identity(2, 2)]
        }
    };
    let mut sums: std::collections::BTreeMap<(usize, usize), CMatrix> = Default::default();
    for &(a, b) in &lattice.edges {
        let (ca, cb) = (cluster_of[a], cluster_of[b]);
        if ca == cb {
            continue;
        }
        let Some(term) = h.pair(a, b) else { continue };
        let e = kron(&encode(a), &encode(b));
        let full = e.adjoint() * term.op.matrix() * &e;
        let mut q = CMatrix::zeros(4, 4);
        for pa in splits(ca) {
            for pb in splits(cb) {
                let p = kron(&pa, &pb);
                q += &p * &full * &p;
            }
        }
        let (key, q) = if ca < cb { ((ca, cb), q) } else { ((cb, ca), crate::model::swap_spins(&q)) };
        *sums.entry(key).or_insert_with(|| CMatrix::zeros(4, 4)) += q;
    }
    let mut logical = Hamiltonian::with_spins(clusters.len());
    for ((ca, cb), q) in sums {
        let op = crate::linalg::HermitianOperator::symmetrized(q);
        let eig = op.eigen();
        if eig.values[0] > 1e-9 * eig.values[3].max(1.0) {
            return 0;
        }
        logical.add_two_spin(ca, cb, op.into_matrix()).expect("valid term");
    }
    logical
        .components()
        .into_iter()
        .map(|comp| {
            if comp.iter().all(|&c| clusters[c].len() == 1) {
                // Gauged singlets on a connected graph: the symmetric subspace.
                return comp.len() + 1;
            }
            let part = logical.restricted_to(&comp.iter().copied().collect());
            if comp.len() <= LOGICAL_SWEEP_CAP {
                crate::oracle::kernel_by_sweep(&part, crate::linalg::TAU_RANK)
                    .expect("small logical model")
                    .len()
            } else {
                match crate::reduction::reduce_to_complete(&part).expect("valid logical model") {
                    crate::reduction::ReductionResult::Reduced(r) => {
                        crate::ground::complete_kernel_dimension(&r.complete).expect("complete model")
                    }
                    crate::reduction::ReductionResult::Frustrated(_) => 0,
                }
            }
        })
        .product()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomConfig {
    /// Relative weights of ranks 1, 2 and 3 for two-spin terms.
    pub rank_weights: [f64; 3],
    /// Probability that a rank-1 term is a product functional.
    pub product_fraction: f64,
    /// Probability that a vertex carries a rank-1 single-spin term.
    pub single_fraction: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        Self {
            rank_weights: [0.6, 0.3, 0.1],
            product_fraction: 0.2,
            single_fraction: 0.05,
        }
    }
}

/// Random terms of mixed rank on every edge of `lattice`.
pub fn random_instance(lattice: &Lattice, cfg: &RandomConfig, seed: u64) -> Hamiltonian {
    let mut rng = rng(seed);
    let total: f64 = cfg.rank_weights.iter().sum();
    let mut h = Hamiltonian::with_spins(lattice.n);
    for &(a, b) in &lattice.edges {
        let mut x = rng.random_range(0.0..total);
        let mut rank = 1;
        for (r, w) in cfg.rank_weights.iter().enumerate() {
            if x < *w {
                rank = r + 1;
                break;
            }
            x -= w;
        }
        let m = if rank == 1 && rng.random_bool(cfg.product_fraction) {
            let v = random_product_state(&mut rng);
            outer(&v, &v) * c64(rng.random_range(0.5..2.0), 0.0)
        } else {
            let frame = random_frame(&mut rng, 4, rank);
            psd_on_frame(&mut rng, &frame)
        };
        h.add_two_spin(a, b, m).expect("valid term");
    }
    for v in 0..lattice.n {
        if rng.random_bool(cfg.single_fraction) {
            let s = random_state(&mut rng, 2);
            h.add_single_spin(v, outer(&s, &s)).expect("valid term");
        }
    }
    h
}

/// Natural instance with exactly `rank3` terms of rank 3 on randomly chosen
/// edges; the other edges carry random rank-1 or rank-2 natural terms.
pub fn cascade_instance(lattice: &Lattice, rank3: usize, seed: u64) -> Hamiltonian {
    let mut rng = rng(seed);
    let m = lattice.edges.len();
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < rank3.min(m) {
        let e = rng.random_range(0..m);
        if !chosen.contains(&e) {
            chosen.push(e);
        }
    }
    let mut h = Hamiltonian::with_spins(lattice.n);
    for (e, &(a, b)) in lattice.edges.iter().enumerate() {
        let rank = if chosen.contains(&e) { 3 } else { rng.random_range(1..=2) };
        let matrix = loop {
            let frame = random_frame(&mut rng, 4, rank);
            let m = psd_on_frame(&mut rng, &frame);
            let term = TwoSpinTerm::new(a, b, crate::linalg::HermitianOperator::symmetrized(m.clone()))
                .expect("4×4");
            if classify_naturality(&term).is_ok_and(|v| v.natural) {
                break m;
            }
        };
        h.add_two_spin(a, b, matrix).expect("valid term");
    }
    h
}

/// Named examples: `xx4cycle`, `ising-af-pair`, `ising-ferro-pair`, `double-rank3`.
pub fn golden_examples() -> Vec<(&'static str, Hamiltonian)> {
    ["xx4cycle", "ising-af-pair", "ising-ferro-pair", "double-rank3"]
        .into_iter()
        .map(|name| (name, golden(name).expect("known name")))
        .collect()
}

pub fn golden(name: &str) -> Option<Hamiltonian> {
    let mut h;
    match name {
        "xx4cycle" => {
            h = Hamiltonian::with_spins(4);
            for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
                h.add_two_spin(a, b, diagonal_projector(&[0, 3])).ok()?;
            }
        }
        "ising-af-pair" | "ising-ferro-pair" => {
            let z = crate::linalg::pauli_z();
            let zz = kron(&z, &z);
            let m = if name == "ising-af-pair" { zz } else { -zz };
            h = Hamiltonian::with_spins(2);
            h.add_two_spin(0, 1, m).ok()?;
        }
        "double-rank3" => {
            let not_singlet = CMatrix::identity(4, 4) - StateVector::singlet().projector().into_matrix();
            h = Hamiltonian::with_spins(3);
            h.add_two_spin(0, 1, not_singlet.clone()).ok()?;
            h.add_two_spin(1, 2, not_singlet).ok()?;
        }
        _ => return None,
    }
    Some(h)
}

pub fn golden_names() -> &'static [&'static str] {
    &["xx4cycle", "ising-af-pair", "ising-ferro-pair", "double-rank3"]
}

/// Random rank-1 term per label: entangled `|γ⟩⟨γ|` or product `|αβ⟩⟨αβ|`.
pub fn labelled_instance(lattice: &Lattice, entangled: &[bool], seed: u64) -> Result<Hamiltonian> {
    let mut rng = rng(seed);
    let mut h = Hamiltonian::with_spins(lattice.n);
    for (&(a, b), &e) in lattice.edges.iter().zip(entangled) {
        let v = if e {
            random_state(&mut rng, 4)
        } else {
            random_product_state(&mut rng)
        };
        h.add_two_spin(a, b, outer(&v, &v))?;
    }
    Ok(h)
}
