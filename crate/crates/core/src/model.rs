//! 2-local spin-1/2 Hamiltonians on graphs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::format::{matrix_to_pairs, pairs_to_matrix, EdgeRecord, ModelFile, SingleRecord};
use crate::linalg::{
    is_product_operator, kernel_basis, most_entangled_in, operator_rank, CMatrix, HermitianOperator,
    StateVector, TAU_RANK,
};
use crate::local::LocalOp;

/// Below this second Schmidt coefficient a vector counts as a product state.
pub const ENTANGLEMENT_TOL: f64 = 1e-9;

/// Terms whose norm falls below this fraction of the Hamiltonian scale are dropped.
pub const ZERO_TERM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct TwoSpinTerm {
    pub a: usize,
    pub b: usize,
    /// Acts on `a ⊗ b`.
    pub op: HermitianOperator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleSpinTerm {
    pub v: usize,
    pub op: HermitianOperator,
}

/// `SWAP · m · SWAP` for a two-spin operator.
pub fn swap_spins(m: &CMatrix) -> CMatrix {
    const P: [usize; 4] = [0, 2, 1, 3];
    CMatrix::from_fn(4, 4, |i, j| m[(P[i], P[j])])
}

impl TwoSpinTerm {
    pub fn new(a: usize, b: usize, op: HermitianOperator) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidModel(format!("self-loop on vertex {a}")));
        }
        if op.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: op.dim(),
            });
        }
        Ok(Self { a, b, op })
    }

    pub fn swapped(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
            op: HermitianOperator::symmetrized(swap_spins(self.op.matrix())),
        }
    }

    /// Same term with `first` as the leading tensor factor.
    pub fn oriented(&self, first: usize) -> Self {
        if first == self.a {
            self.clone()
        } else {
            self.swapped()
        }
    }

    pub fn local(&self) -> LocalOp {
        LocalOp::new(vec![self.a, self.b], self.op.matrix().clone()).expect("4×4 term")
    }

    pub fn rank(&self) -> usize {
        operator_rank(&self.op, TAU_RANK)
    }

    pub fn rescaled(&self) -> Self {
        Self {
            a: self.a,
            b: self.b,
            op: rescale_to_zero_ground(&self.op),
        }
    }
}

impl SingleSpinTerm {
    pub fn new(v: usize, op: HermitianOperator) -> Result<Self> {
        if op.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: op.dim(),
            });
        }
        Ok(Self { v, op })
    }

    pub fn rescaled(&self) -> Self {
        Self {
            v: self.v,
            op: rescale_to_zero_ground(&self.op),
        }
    }
}

/// `M − λ_min·1`. Operators whose lowest eigenvalue is already zero to
/// machine precision are returned unchanged, which makes rescaling idempotent.
pub fn rescale_to_zero_ground(op: &HermitianOperator) -> HermitianOperator {
    let eig = op.eigen();
    let min = eig.values.first().copied().unwrap_or(0.0);
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if min.abs() <= 8.0 * f64::EPSILON * scale {
        return op.clone();
    }
    op.shifted(-min)
}

fn require_rescaled(op: &HermitianOperator) -> Result<crate::linalg::Eigen> {
    let eig = op.eigen();
    let min = eig.values.first().copied().unwrap_or(0.0);
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if min.abs() > TAU_RANK * scale {
        return Err(Error::NotRescaled(min));
    }
    Ok(eig)
}

/// Orthogonal projector onto the image of a rescaled operator.
pub fn projectorize_operator(op: &HermitianOperator) -> Result<HermitianOperator> {
    let eig = require_rescaled(op)?;
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dim = op.dim();
    let mut p = CMatrix::zeros(dim, dim);
    for (i, &lam) in eig.values.iter().enumerate() {
        if scale > 0.0 && lam > TAU_RANK * scale {
            let v = eig.vectors.column(i);
            p += v * v.adjoint();
        }
    }
    Ok(HermitianOperator::symmetrized(p))
}

pub fn projectorize(t: &TwoSpinTerm) -> Result<TwoSpinTerm> {
    Ok(TwoSpinTerm {
        a: t.a,
        b: t.b,
        op: projectorize_operator(&t.op)?,
    })
}

/// Orthonormal basis of the image of a rescaled two-spin operator.
pub fn image_basis(op: &HermitianOperator) -> Result<Vec<StateVector>> {
    let projector = projectorize_operator(op)?;
    let complement = projector.scale(-1.0).shifted(1.0);
    kernel_basis(&complement, TAU_RANK)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NaturalityVerdict {
    pub rank: usize,
    pub natural: bool,
    /// Most entangled unit vector in the image of the term.
    pub witness: Option<StateVector>,
}

pub fn classify_naturality(t: &TwoSpinTerm) -> Result<NaturalityVerdict> {
    require_rescaled(&t.op)?;
    let rank = t.rank();
    if rank == 0 {
        return Ok(NaturalityVerdict {
            rank,
            natural: false,
            witness: None,
        });
    }
    let image = image_basis(&t.op)?;
    let (witness, defect) = most_entangled_in(&image)?;
    let natural = match rank {
        1 => defect > ENTANGLEMENT_TOL,
        2 => is_product_operator(&t.op, TAU_RANK)?.is_none(),
        _ => true,
    };
    Ok(NaturalityVerdict {
        rank,
        natural,
        witness: Some(witness),
    })
}

/// Replaces a non-natural rank-2 term `|φ⟩⟨φ| ⊗ η` by `|φ⟩⟨φ|` on the spin
/// carrying the rank-1 factor.
pub fn substitute_nonnatural_rank2(t: &TwoSpinTerm) -> Result<SingleSpinTerm> {
    require_rescaled(&t.op)?;
    let rank = t.rank();
    if rank != 2 {
        return Err(Error::NotApplicable(format!("term has rank {rank}, not 2")));
    }
    let factors = is_product_operator(&t.op, TAU_RANK)?
        .ok_or_else(|| Error::NotApplicable("term is natural".into()))?;
    let left = HermitianOperator::symmetrized(factors.left);
    let right = HermitianOperator::symmetrized(factors.right);
    let (v, factor) = if operator_rank(&left, TAU_RANK) == 1 {
        (t.a, left)
    } else {
        (t.b, right)
    };
    let eig = factor.eigen();
    // The rank-1 factor may carry either sign; its image is the extreme eigenvector.
    let top = if eig.values[1].abs() >= eig.values[0].abs() { 1 } else { 0 };
    let phi = eig.vectors.column(top).into_owned();
    SingleSpinTerm::new(v, HermitianOperator::projector(&phi))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NaturalityReport {
    pub terms: Vec<((usize, usize), NaturalityVerdict)>,
    pub natural: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub connected: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Structural and numerical checks on a model file.
pub fn validate(model: &ModelFile) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, v) in model.vertices.iter().enumerate() {
        if index.insert(v.as_str(), i).is_some() {
            report.errors.push(format!("duplicate vertex {v:?}"));
        }
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); model.vertices.len()];
    let check_matrix = |report: &mut ValidationReport, what: &str, data: &[[f64; 2]], dim: usize| {
        match pairs_to_matrix(data, dim) {
            Err(_) => report.errors.push(format!(
                "{what}: expected {} entries, found {}",
                dim * dim,
                data.len()
            )),
            Ok(m) => {
                if let Err(e) = HermitianOperator::new(m) {
                    report.errors.push(format!("{what}: {e}"));
                }
            }
        }
    };
    for e in &model.edges {
        let what = format!("edge ({}, {})", e.a, e.b);
        match (index.get(e.a.as_str()), index.get(e.b.as_str())) {
            (Some(&a), Some(&b)) => {
                if a == b {
                    report.errors.push(format!("{what}: self-loop"));
                } else {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
            _ => report.errors.push(format!("{what}: references a missing vertex")),
        }
        check_matrix(&mut report, &what, &e.matrix, 4);
    }
    for s in &model.singles {
        let what = format!("single-spin term on {}", s.v);
        if !index.contains_key(s.v.as_str()) {
            report.errors.push(format!("{what}: references a missing vertex"));
        }
        check_matrix(&mut report, &what, &s.matrix, 2);
    }
    report.connected = components(&adjacency).len() <= 1;
    if !report.connected {
        report.warnings.push("isolated subsystems: interaction graph is disconnected".into());
    }
    report
}

fn components(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adjacency.len()];
    let mut out = Vec::new();
    for start in 0..adjacency.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// A Hamiltonian with rescaled terms, at most one per edge and per vertex.
///
/// Vertices are indexed by their position in the label list; two-spin terms
/// are stored on `(min, max)` index pairs in that tensor order.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    labels: Vec<String>,
    active: BTreeSet<usize>,
    pairs: BTreeMap<(usize, usize), HermitianOperator>,
    singles: BTreeMap<usize, HermitianOperator>,
    scale: f64,
}

impl Hamiltonian {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let unique: BTreeSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(Error::InvalidModel("duplicate vertex label".into()));
        }
        Ok(Self {
            active: (0..labels.len()).collect(),
            labels,
            pairs: BTreeMap::new(),
            singles: BTreeMap::new(),
            scale: 0.0,
        })
    }

    /// Spins labelled `"1"` to `"n"`.
    pub fn with_spins(n: usize) -> Self {
        Self::new((1..=n).map(|i| i.to_string()).collect()).expect("distinct labels")
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    /// Number of spins of the original lattice, including removed ones.
    pub fn n_spins(&self) -> usize {
        self.labels.len()
    }

    pub fn active(&self) -> &BTreeSet<usize> {
        &self.active
    }

    pub fn is_active(&self, v: usize) -> bool {
        self.active.contains(&v)
    }

    /// Energy scale used to decide when a transformed term has vanished.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub(crate) fn zero_tol(&self) -> f64 {
        ZERO_TERM_TOL * self.scale.max(f64::MIN_POSITIVE)
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if !self.active.contains(&v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        Ok(())
    }

    /// Adds a two-spin term given in `a ⊗ b` order. Terms on an existing edge
    /// are summed and the sum rescaled.
    pub fn add_two_spin(&mut self, a: usize, b: usize, matrix: CMatrix) -> Result<()> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        let op = HermitianOperator::new(matrix)?;
        let term = TwoSpinTerm::new(a, b, op)?.oriented(a.min(b));
        let key = (term.a, term.b);
        let sum = match self.pairs.remove(&key) {
            Some(existing) => existing.add(&term.op),
            None => term.op,
        };
        let op = rescale_to_zero_ground(&sum);
        self.scale = self.scale.max(op.norm());
        if operator_rank(&op, TAU_RANK) > 0 {
            self.pairs.insert(key, op);
        }
        Ok(())
    }

    pub fn add_single_spin(&mut self, v: usize, matrix: CMatrix) -> Result<()> {
        self.check_vertex(v)?;
        let op = HermitianOperator::new(matrix)?;
        if op.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: op.dim(),
            });
        }
        let sum = match self.singles.remove(&v) {
            Some(existing) => existing.add(&op),
            None => op,
        };
        let op = rescale_to_zero_ground(&sum);
        self.scale = self.scale.max(op.norm());
        if operator_rank(&op, TAU_RANK) > 0 {
            self.singles.insert(v, op);
        }
        Ok(())
    }

    /// Term on `(a, b)` with `a` as the leading factor.
    pub fn pair(&self, a: usize, b: usize) -> Option<TwoSpinTerm> {
        let key = (a.min(b), a.max(b));
        self.pairs.get(&key).map(|op| {
            TwoSpinTerm {
                a: key.0,
                b: key.1,
                op: op.clone(),
            }
            .oriented(a)
        })
    }

    pub fn single(&self, v: usize) -> Option<SingleSpinTerm> {
        self.singles.get(&v).map(|op| SingleSpinTerm { v, op: op.clone() })
    }

    pub fn pair_ops(&self) -> &BTreeMap<(usize, usize), HermitianOperator> {
        &self.pairs
    }

    pub fn single_ops(&self) -> &BTreeMap<usize, HermitianOperator> {
        &self.singles
    }

    pub fn two_spin_terms(&self) -> impl Iterator<Item = TwoSpinTerm> + '_ {
        self.pairs.iter().map(|(&(a, b), op)| TwoSpinTerm {
            a,
            b,
            op: op.clone(),
        })
    }

    pub fn single_spin_terms(&self) -> impl Iterator<Item = SingleSpinTerm> + '_ {
        self.singles.iter().map(|(&v, op)| SingleSpinTerm { v, op: op.clone() })
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.pairs.keys().copied().collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .pairs
            .keys()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn term_count(&self) -> usize {
        self.pairs.len() + self.singles.len()
    }

    /// Every term as a local operator on vertex indices.
    pub fn local_terms(&self) -> Vec<LocalOp> {
        let mut out: Vec<LocalOp> = self.two_spin_terms().map(|t| t.local()).collect();
        for (&v, op) in &self.singles {
            out.push(LocalOp::new(vec![v], op.matrix().clone()).expect("2×2 term"));
        }
        out
    }

    /// Connected components of the active vertices under two-spin terms.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let order: Vec<usize> = self.active.iter().copied().collect();
        let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adjacency = vec![Vec::new(); order.len()];
        for &(a, b) in self.pairs.keys() {
            adjacency[pos[&a]].push(pos[&b]);
            adjacency[pos[&b]].push(pos[&a]);
        }
        components(&adjacency)
            .into_iter()
            .map(|c| c.into_iter().map(|i| order[i]).collect())
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Terms acting only inside `region`, on the same label set.
    pub fn restricted_to(&self, region: &BTreeSet<usize>) -> Self {
        Self {
            labels: self.labels.clone(),
            active: self.active.intersection(region).copied().collect(),
            pairs: self
                .pairs
                .iter()
                .filter(|((a, b), _)| region.contains(a) && region.contains(b))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
            singles: self
                .singles
                .iter()
                .filter(|(v, _)| region.contains(v))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
            scale: self.scale,
        }
    }

    pub fn naturality_report(&self) -> Result<NaturalityReport> {
        let mut terms = Vec::with_capacity(self.pairs.len());
        let mut natural = self.is_connected();
        for t in self.two_spin_terms() {
            let verdict = classify_naturality(&t)?;
            natural &= verdict.natural;
            terms.push(((t.a, t.b), verdict));
        }
        Ok(NaturalityReport { terms, natural })
    }

    pub fn is_natural(&self) -> bool {
        self.naturality_report().is_ok_and(|r| r.natural)
    }

    pub fn from_model(model: &ModelFile) -> Result<Self> {
        let report = validate(model);
        if !report.is_valid() {
            return Err(Error::InvalidModel(report.errors.join("; ")));
        }
        let mut h = Self::new(model.vertices.clone())?;
        for e in &model.edges {
            let a = h.index_of(&e.a)?;
            let b = h.index_of(&e.b)?;
            h.add_two_spin(a, b, pairs_to_matrix(&e.matrix, 4)?)?;
        }
        for s in &model.singles {
            let v = h.index_of(&s.v)?;
            h.add_single_spin(v, pairs_to_matrix(&s.matrix, 2)?)?;
        }
        Ok(h)
    }

    /// Serializes the active part of the Hamiltonian.
    pub fn to_model(&self) -> ModelFile {
        ModelFile {
            vertices: self.active.iter().map(|&v| self.labels[v].clone()).collect(),
            edges: self
                .pairs
                .iter()
                .map(|(&(a, b), op)| EdgeRecord {
                    a: self.labels[a].clone(),
                    b: self.labels[b].clone(),
                    matrix: matrix_to_pairs(op.matrix()),
                })
                .collect(),
            singles: self
                .singles
                .iter()
                .map(|(&v, op)| SingleRecord {
                    v: self.labels[v].clone(),
                    matrix: matrix_to_pairs(op.matrix()),
                })
                .collect(),
        }
    }

    // Reduction-time mutation: no rescaling, sums may become full rank.

    pub(crate) fn accumulate_pair(&mut self, a: usize, b: usize, matrix: &CMatrix) {
        let (key, m) = if a < b {
            ((a, b), matrix.clone())
        } else {
            ((b, a), swap_spins(matrix))
        };
        let sum = match self.pairs.get(&key) {
            Some(existing) => existing.matrix() + m,
            None => m,
        };
        self.store_pair(key, sum);
    }

    pub(crate) fn store_pair(&mut self, key: (usize, usize), matrix: CMatrix) {
        let op = HermitianOperator::symmetrized(matrix);
        if crate::linalg::max_abs(op.matrix()) <= self.zero_tol() {
            self.pairs.remove(&key);
        } else {
            self.pairs.insert(key, op);
        }
    }

    pub(crate) fn accumulate_single(&mut self, v: usize, matrix: &CMatrix) {
        let sum = match self.singles.get(&v) {
            Some(existing) => existing.matrix() + matrix,
            None => matrix.clone(),
        };
        let op = HermitianOperator::symmetrized(sum);
        if crate::linalg::max_abs(op.matrix()) <= self.zero_tol() {
            self.singles.remove(&v);
        } else {
            self.singles.insert(v, op);
        }
    }

    /// Adds a local operator produced by a reduction step.
    pub(crate) fn accumulate_local(&mut self, op: &LocalOp) {
        match op.sites() {
            [] => {}
            [v] => self.accumulate_single(*v, op.matrix()),
            [a, b] => self.accumulate_pair(*a, *b, op.matrix()),
            _ => unreachable!("reduction steps keep terms 2-local"),
        }
    }

    pub(crate) fn take_pair(&mut self, a: usize, b: usize) -> Option<HermitianOperator> {
        self.pairs.remove(&(a.min(b), a.max(b)))
    }


    /// Removes `v` together with every term touching it and returns those terms.
    pub(crate) fn detach_vertex(&mut self, v: usize) -> Vec<LocalOp> {
        let mut out = Vec::new();
        let keys: Vec<(usize, usize)> = self
            .pairs
            .keys()
            .filter(|&&(a, b)| a == v || b == v)
            .copied()
            .collect();
        for key in keys {
            let op = self.pairs.remove(&key).expect("present");
            out.push(LocalOp::new(vec![key.0, key.1], op.into_matrix()).expect("4×4"));
        }
        if let Some(op) = self.singles.remove(&v) {
            out.push(LocalOp::new(vec![v], op.into_matrix()).expect("2×2"));
        }
        self.active.remove(&v);
        out
    }

    /// Removes every term touching `u` or `v` and returns them.
    pub(crate) fn detach_terms(&mut self, sites: &[usize]) -> Vec<LocalOp> {
        let mut out = Vec::new();
        let keys: Vec<(usize, usize)> = self
            .pairs
            .keys()
            .filter(|&&(a, b)| sites.contains(&a) || sites.contains(&b))
            .copied()
            .collect();
        for key in keys {
            let op = self.pairs.remove(&key).expect("present");
            out.push(LocalOp::new(vec![key.0, key.1], op.into_matrix()).expect("4×4"));
        }
        for &s in sites {
            if let Some(op) = self.singles.remove(&s) {
                out.push(LocalOp::new(vec![s], op.into_matrix()).expect("2×2"));
            }
        }
        out
    }

    pub(crate) fn deactivate(&mut self, v: usize) {
        self.active.remove(&v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, kron, outer, pauli_x, pauli_y, pauli_z, CVector, ONE, ZERO};

    fn ket(bits: &[usize]) -> CVector {
        let idx = bits.iter().fold(0, |acc, b| 2 * acc + b);
        StateVector::basis(1 << bits.len(), idx).into_amplitudes()
    }

    fn proj(v: &CVector) -> CMatrix {
        outer(v, v)
    }

    fn herm(m: CMatrix) -> HermitianOperator {
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn rescale_examples() {
        let r = rescale_to_zero_ground(&HermitianOperator::diagonal(&[3.0, 5.0, 5.0, 9.0]));
        assert!(r.max_abs_diff(&HermitianOperator::diagonal(&[0.0, 2.0, 2.0, 6.0])) < 1e-12);
        let z = rescale_to_zero_ground(&HermitianOperator::zeros(4));
        assert_eq!(z, HermitianOperator::zeros(4));
    }

    #[test]
    fn rescaled_xx_term_has_singlet_kernel() {
        let xx = (kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y())).scale(0.5);
        let r = rescale_to_zero_ground(&herm(xx));
        assert_eq!(operator_rank(&r, TAU_RANK), 3);
        let k = kernel_basis(&r, TAU_RANK).unwrap();
        assert_eq!(k.len(), 1);
        assert!((k[0].inner(&StateVector::singlet()).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projectorize_examples() {
        let t = TwoSpinTerm::new(0, 1, HermitianOperator::diagonal(&[0.0, 2.0, 2.0, 6.0])).unwrap();
        let p = projectorize(&t).unwrap();
        assert!(p.op.max_abs_diff(&HermitianOperator::diagonal(&[0.0, 1.0, 1.0, 1.0])) < 1e-12);
        let s = TwoSpinTerm::new(0, 1, StateVector::singlet().projector()).unwrap();
        assert!(projectorize(&s).unwrap().op.max_abs_diff(&s.op) < 1e-12);
        let bad = TwoSpinTerm::new(0, 1, HermitianOperator::diagonal(&[1.0, 2.0, 2.0, 6.0])).unwrap();
        assert!(matches!(projectorize(&bad), Err(Error::NotRescaled(_))));
    }

    #[test]
    fn naturality_examples() {
        let ising_af = herm(proj(&ket(&[0, 0])) + proj(&ket(&[1, 1])));
        let v = classify_naturality(&TwoSpinTerm::new(0, 1, ising_af).unwrap()).unwrap();
        assert!(v.natural);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = CVector::from_vec(vec![c64(s, 0.0), ZERO, ZERO, c64(s, 0.0)]);
        assert!((v.witness.unwrap().amplitudes() - expected).norm() < 1e-12);

        let eta = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, c64(2.0, 0.0)]));
        let t = TwoSpinTerm::new(0, 1, herm(kron(&proj(&ket(&[1])), &eta))).unwrap();
        let v = classify_naturality(&t).unwrap();
        assert_eq!((v.rank, v.natural), (2, false));

        let t = TwoSpinTerm::new(0, 1, herm(proj(&ket(&[0, 1])))).unwrap();
        let v = classify_naturality(&t).unwrap();
        assert_eq!((v.rank, v.natural), (1, false));
    }

    #[test]
    fn substitution_examples() {
        let t = TwoSpinTerm::new(3, 5, herm(kron(&proj(&ket(&[1])), &CMatrix::identity(2, 2)))).unwrap();
        let s = substitute_nonnatural_rank2(&t).unwrap();
        assert_eq!(s.v, 3);
        assert!((s.op.matrix() - proj(&ket(&[1]))).norm() < 1e-12);

        let plus = CVector::from_vec(vec![c64(1.0, 0.0), c64(1.0, 0.0)]).unscale(2f64.sqrt());
        let eta = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, c64(2.0, 0.0)]));
        let t = TwoSpinTerm::new(0, 1, herm(kron(&proj(&plus), &eta))).unwrap();
        let s = substitute_nonnatural_rank2(&t).unwrap();
        assert_eq!(s.v, 0);
        assert!((s.op.matrix() - proj(&plus)).norm() < 1e-12);

        // mirrored factorization lands on the second spin
        let t = TwoSpinTerm::new(0, 1, herm(kron(&eta, &proj(&plus)))).unwrap();
        assert_eq!(substitute_nonnatural_rank2(&t).unwrap().v, 1);

        let t = TwoSpinTerm::new(0, 1, StateVector::singlet().projector()).unwrap();
        assert!(matches!(substitute_nonnatural_rank2(&t), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn duplicate_terms_are_merged_and_rescaled() {
        let mut h = Hamiltonian::with_spins(2);
        h.add_two_spin(0, 1, kron(&pauli_z(), &pauli_z())).unwrap();
        h.add_two_spin(1, 0, kron(&pauli_z(), &pauli_z())).unwrap();
        let t = h.pair(0, 1).unwrap();
        assert!(t.op.max_abs_diff(&HermitianOperator::diagonal(&[4.0, 0.0, 0.0, 4.0])) < 1e-12);
        assert_eq!(h.term_count(), 1);
    }

    #[test]
    fn reversed_edges_are_stored_canonically() {
        let mut h = Hamiltonian::with_spins(2);
        h.add_two_spin(1, 0, proj(&ket(&[0, 1]))).unwrap();
        let stored = h.pair(0, 1).unwrap();
        assert!((stored.op.matrix() - proj(&ket(&[1, 0]))).norm() < 1e-15);
        assert!((h.pair(1, 0).unwrap().op.matrix() - proj(&ket(&[0, 1]))).norm() < 1e-15);
    }

    #[test]
    fn identity_term_is_dropped() {
        let mut h = Hamiltonian::with_spins(2);
        h.add_two_spin(0, 1, CMatrix::identity(4, 4)).unwrap();
        assert_eq!(h.term_count(), 0);
    }

    #[test]
    fn validation_examples() {
        let edge = |a: &str, b: &str| EdgeRecord {
            a: a.into(),
            b: b.into(),
            matrix: matrix_to_pairs(&proj(&ket(&[0, 0]))),
        };
        let cycle = ModelFile {
            vertices: ["1", "2", "3", "4"].map(String::from).to_vec(),
            edges: vec![edge("1", "2"), edge("2", "3"), edge("3", "4"), edge("1", "4")],
            singles: vec![],
        };
        let r = validate(&cycle);
        assert!(r.is_valid() && r.connected && r.warnings.is_empty());

        let split = ModelFile {
            edges: vec![edge("1", "2"), edge("3", "4")],
            ..cycle.clone()
        };
        let r = validate(&split);
        assert!(r.is_valid() && !r.connected);
        assert!(r.warnings[0].contains("isolated subsystems"));

        let missing = ModelFile {
            edges: vec![edge("1", "9")],
            ..cycle
        };
        assert!(!validate(&missing).is_valid());
        assert!(Hamiltonian::from_model(&missing).is_err());
    }

    #[test]
    fn model_round_trip_is_exact() {
        let mut h = Hamiltonian::with_spins(3);
        let xx = (kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y())).scale(0.5);
        h.add_two_spin(0, 1, xx).unwrap();
        h.add_two_spin(2, 1, kron(&pauli_z(), &pauli_x())).unwrap();
        h.add_single_spin(2, pauli_x()).unwrap();
        let again = Hamiltonian::from_model(&ModelFile::from_json(&h.to_model().to_json()).unwrap()).unwrap();
        assert_eq!(h, again);
    }
}
