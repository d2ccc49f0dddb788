//! Reduction of a 2-local Hamiltonian to a complete homogeneous one.
//!
//! Each step is recorded so that replaying the trace on the input reproduces
//! the reduced Hamiltonian exactly and the isometries form a tree network.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{amplitudes, rows};
use crate::linalg::{
    c64, canonical_phase, epsilon, is_product_operator, kernel_basis, most_entangled_in,
    operator_rank, orthogonal_complement, outer, CMatrix, CVector, StateVector, TAU_RANK,
};
use crate::model::{
    classify_naturality, substitute_nonnatural_rank2, Hamiltonian, TwoSpinTerm, ENTANGLEMENT_TOL,
};
use crate::network::TreeTensorNetwork;

/// Induced constraints with fidelity above `1 - COLINEAR_TOL` add nothing.
pub const COLINEAR_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSpinContraction {
    pub u: usize,
    pub v: usize,
    /// 4×2 isometry into `u ⊗ v`; its columns are `ψ₀` and `ψ₁`.
    #[serde(with = "rows")]
    pub isometry: CMatrix,
}

impl TwoSpinContraction {
    pub fn psi(&self, k: usize) -> StateVector {
        StateVector::unnormalized(self.isometry.column(k).into_owned())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinDeletion {
    pub v: usize,
    #[serde(with = "amplitudes")]
    pub state: CVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Substitution {
    pub a: usize,
    pub b: usize,
    pub vertex: usize,
    #[serde(with = "amplitudes")]
    pub state: CVector,
}

/// A rank-1 term `|β⟩⟨β|` on `(a, c)`, `a < c`, obtained through middle spin `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedTerm {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    #[serde(with = "amplitudes")]
    pub beta: CVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceStep {
    Substitution(Substitution),
    Deletion(SpinDeletion),
    Contraction(TwoSpinContraction),
    /// Constraint placed on an edge that carried no term.
    Induction(InducedTerm),
    /// Non-colinear constraint added to an existing term.
    Accumulation(InducedTerm),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub steps: Vec<TraceStep>,
}

impl ReductionTrace {
    /// Applies every step to `h`.
    pub fn replay(&self, h: &Hamiltonian) -> Hamiltonian {
        let mut h = h.clone();
        for step in &self.steps {
            apply_step(&mut h, step);
        }
        h
    }

    /// The Hamiltonian after each step.
    pub fn intermediates(&self, h: &Hamiltonian) -> Vec<Hamiltonian> {
        let mut h = h.clone();
        self.steps
            .iter()
            .map(|s| {
                apply_step(&mut h, s);
                h.clone()
            })
            .collect()
    }

    pub fn contractions(&self) -> impl Iterator<Item = &TwoSpinContraction> {
        self.steps.iter().filter_map(|s| match s {
            TraceStep::Contraction(c) => Some(c),
            _ => None,
        })
    }
}

pub fn apply_step(h: &mut Hamiltonian, step: &TraceStep) {
    match step {
        TraceStep::Substitution(s) => apply_substitution(h, s),
        TraceStep::Deletion(d) => apply_deletion(h, d),
        TraceStep::Contraction(c) => apply_contraction(h, c),
        TraceStep::Induction(t) | TraceStep::Accumulation(t) => apply_induced(h, t),
    }
}

fn apply_substitution(h: &mut Hamiltonian, s: &Substitution) {
    h.take_pair(s.a, s.b);
    h.accumulate_single(s.vertex, &outer(&s.state, &s.state));
}

fn apply_deletion(h: &mut Hamiltonian, d: &SpinDeletion) {
    for term in h.detach_vertex(d.v) {
        h.accumulate_local(&term.project_site(d.v, &d.state));
    }
}

fn apply_contraction(h: &mut Hamiltonian, c: &TwoSpinContraction) {
    let terms = h.detach_terms(&[c.u, c.v]);
    h.deactivate(c.v);
    for term in terms {
        h.accumulate_local(&term.pull_back_pair(c.u, c.v, &c.isometry));
    }
}

fn apply_induced(h: &mut Hamiltonian, t: &InducedTerm) {
    h.accumulate_pair(t.a, t.c, &outer(&t.beta, &t.beta));
}

fn isometry_from(psi0: &StateVector, psi1: &StateVector) -> CMatrix {
    let mut iso = CMatrix::zeros(4, 2);
    iso.set_column(0, psi0.amplitudes());
    iso.set_column(1, psi1.amplitudes());
    iso
}

/// Isometry for contracting a rank-2 or rank-3 term given in `u ⊗ v` order.
///
/// `ψ₁` is the most entangled vector available: inside the kernel for rank 2,
/// inside the orthogonal complement of the kernel vector for rank 3.
pub fn contraction_isometry(term: &TwoSpinTerm, require_entangled: bool) -> Result<CMatrix> {
    let rank = term.rank();
    let kernel = kernel_basis(&term.op, TAU_RANK)?;
    let (psi0, psi1, defect) = match rank {
        2 => {
            let (psi1, defect) = most_entangled_in(&kernel)?;
            let residual = |k: &StateVector| {
                let overlap = psi1.inner(k);
                k.amplitudes() - psi1.amplitudes() * overlap
            };
            let r0 = residual(&kernel[0]);
            let r1 = residual(&kernel[1]);
            let r = if r0.norm() >= r1.norm() { r0 } else { r1 };
            let psi0 = StateVector::new(r)?.with_canonical_phase();
            (psi0, psi1, defect)
        }
        3 => {
            let psi0 = kernel[0].clone();
            let complement = orthogonal_complement(std::slice::from_ref(&psi0), 4);
            let (psi1, defect) = most_entangled_in(&complement)?;
            (psi0, psi1, defect)
        }
        r => return Err(Error::RankMismatch(r)),
    };
    if require_entangled && defect <= ENTANGLEMENT_TOL {
        return Err(Error::NoEntangledBasisVector);
    }
    Ok(isometry_from(&psi0, &psi1))
}

/// Contracts the edge `(u, v)` into `u` with the canonical isometry.
pub fn contract_two_spin(
    h: &Hamiltonian,
    u: usize,
    v: usize,
) -> Result<(Hamiltonian, TwoSpinContraction)> {
    let term = h
        .pair(u, v)
        .ok_or_else(|| Error::NoSuchTerm(format!("({u}, {v})")))?;
    let iso = match contraction_isometry(&term, true) {
        Err(Error::NoEntangledBasisVector) if !h.is_natural() => contraction_isometry(&term, false)?,
        other => other?,
    };
    contract_two_spin_with(h, u, v, iso)
}

/// Contracts `(u, v)` into `u` with a caller-supplied isometry whose image
/// must contain the kernel of the term on the edge.
pub fn contract_two_spin_with(
    h: &Hamiltonian,
    u: usize,
    v: usize,
    isometry: CMatrix,
) -> Result<(Hamiltonian, TwoSpinContraction)> {
    let term = h
        .pair(u, v)
        .ok_or_else(|| Error::NoSuchTerm(format!("({u}, {v})")))?;
    let rank = term.rank();
    if !(2..=3).contains(&rank) {
        return Err(Error::RankMismatch(rank));
    }
    if isometry.nrows() != 4 || isometry.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            found: isometry.len(),
        });
    }
    let gram = isometry.adjoint() * &isometry;
    if (gram - CMatrix::identity(2, 2)).norm() > 1e-9 {
        return Err(Error::InvalidConfig("contraction map is not an isometry".into()));
    }
    let record = TwoSpinContraction { u, v, isometry };
    let mut out = h.clone();
    apply_contraction(&mut out, &record);
    Ok((out, record))
}

#[derive(Clone, Debug)]
pub enum DeletionOutcome {
    Deleted(Hamiltonian, SpinDeletion),
    Frustrated,
}

pub fn delete_spin(h: &Hamiltonian, v: usize) -> Result<DeletionOutcome> {
    let single = h.single(v).ok_or_else(|| Error::NoSuchTerm(format!("spin {v}")))?;
    match operator_rank(&single.op, TAU_RANK) {
        0 => Err(Error::NoSuchTerm(format!("spin {v}"))),
        2 => Ok(DeletionOutcome::Frustrated),
        _ => {
            let psi = kernel_basis(&single.op, TAU_RANK)?.remove(0);
            let record = SpinDeletion {
                v,
                state: psi.into_amplitudes(),
            };
            let mut out = h.clone();
            apply_deletion(&mut out, &record);
            Ok(DeletionOutcome::Deleted(out, record))
        }
    }
}

/// Constraint on `(a, c)` implied by constraints on `(a, b)` and `(b, c)`,
/// or `None` when the contraction through the singlet vanishes.
pub fn induce_constraint(beta_ab: &StateVector, beta_bc: &StateVector) -> Result<Option<StateVector>> {
    for b in [beta_ab, beta_bc] {
        if b.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: b.dim(),
            });
        }
    }
    let coeff = |v: &CVector| CMatrix::from_fn(2, 2, |i, j| v[2 * i + j]);
    let e = epsilon().scale(std::f64::consts::FRAC_1_SQRT_2);
    let m = coeff(beta_ab.amplitudes()) * e * coeff(beta_bc.amplitudes());
    let v = CVector::from_fn(4, |k, _| m[(k / 2, k % 2)]);
    let scale = beta_ab.norm() * beta_bc.norm();
    if v.norm() <= TAU_RANK * scale {
        return Ok(None);
    }
    Ok(Some(StateVector::new(v)?.with_canonical_phase()))
}

/// Constraint vector of a rank-1 term, read from its largest column.
pub fn constraint_vector(term: &TwoSpinTerm) -> StateVector {
    let m = term.op.matrix();
    let col = (0..4)
        .max_by(|&i, &j| m.column(i).norm().total_cmp(&m.column(j).norm()))
        .unwrap_or(0);
    let mut v = m.column(col).into_owned();
    canonical_phase(&mut v);
    StateVector::new(v).expect("nonzero term")
}

pub fn is_colinear(beta: &StateVector, other: &StateVector) -> bool {
    beta.inner(other).norm_sqr() > 1.0 - COLINEAR_TOL
}

/// Adds an induced rank-1 constraint to an edge. Colinear constraints on a
/// rank-1 term leave it unchanged.
pub fn accumulate_term(existing: Option<&TwoSpinTerm>, a: usize, c: usize, induced: &StateVector) -> TwoSpinTerm {
    let add = crate::linalg::HermitianOperator::projector(induced.amplitudes());
    match existing {
        None => TwoSpinTerm { a, b: c, op: add },
        Some(t) => {
            let t = t.oriented(a);
            if t.rank() == 1 && is_colinear(&constraint_vector(&t), induced) {
                t
            } else {
                TwoSpinTerm {
                    a,
                    b: c,
                    op: t.op.add(&add),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReductionOrder {
    /// Smallest vertex or edge first.
    #[default]
    Canonical,
    /// Random choices driven by the given seed.
    Shuffled(u64),
}

#[derive(Clone, Debug)]
pub struct ReductionOptions {
    pub order: ReductionOrder,
    /// Replace product rank-2 terms by single-spin terms instead of contracting them.
    pub substitute_nonnatural: bool,
    /// Count intermediate two-spin terms that fail the naturality test.
    pub check_invariants: bool,
    /// Only reduce inside this vertex set.
    pub scope: Option<BTreeSet<usize>>,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            order: ReductionOrder::Canonical,
            substitute_nonnatural: true,
            check_invariants: false,
            scope: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermLocation {
    Single { v: usize },
    Pair { a: usize, b: usize },
}

#[derive(Clone, Debug)]
pub struct FrustrationWitness {
    /// A full-rank term of the partially reduced Hamiltonian.
    pub location: TermLocation,
    pub trace: ReductionTrace,
    pub hamiltonian: Hamiltonian,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub naturality_violations: usize,
}

#[derive(Clone, Debug)]
pub struct Reduced {
    pub complete: Hamiltonian,
    pub network: TreeTensorNetwork,
    pub trace: ReductionTrace,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug)]
pub enum ReductionResult {
    Frustrated(FrustrationWitness),
    Reduced(Reduced),
}

impl ReductionResult {
    pub fn is_frustrated(&self) -> bool {
        matches!(self, ReductionResult::Frustrated(_))
    }

    pub fn reduced(&self) -> Option<&Reduced> {
        match self {
            ReductionResult::Reduced(r) => Some(r),
            ReductionResult::Frustrated(_) => None,
        }
    }

    pub fn trace(&self) -> &ReductionTrace {
        match self {
            ReductionResult::Reduced(r) => &r.trace,
            ReductionResult::Frustrated(f) => &f.trace,
        }
    }
}

pub fn reduce_to_complete(h: &Hamiltonian) -> Result<ReductionResult> {
    reduce_with(h, &ReductionOptions::default())
}

struct Driver<'a> {
    h: Hamiltonian,
    trace: ReductionTrace,
    opts: &'a ReductionOptions,
    rng: Option<ChaCha8Rng>,
    diagnostics: Diagnostics,
}

enum Sweep {
    Closed,
    Grew,
    RankIncreased,
}

impl Driver<'_> {
    fn in_scope(&self, v: usize) -> bool {
        self.opts.scope.as_ref().is_none_or(|s| s.contains(&v))
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> Option<T> {
        match &mut self.rng {
            None => items.first().copied(),
            Some(rng) if !items.is_empty() => Some(items[rng.random_range(0..items.len())]),
            Some(_) => None,
        }
    }

    fn record(&mut self, step: TraceStep) {
        apply_step(&mut self.h, &step);
        self.trace.steps.push(step);
    }

    fn frustrated(&self, location: TermLocation) -> ReductionResult {
        ReductionResult::Frustrated(FrustrationWitness {
            location,
            trace: self.trace.clone(),
            hamiltonian: self.h.clone(),
        })
    }

    fn count_violations(&mut self) {
        let mut bad = 0;
        for t in self.h.two_spin_terms() {
            if t.rank() < 4 && classify_naturality(&t).is_ok_and(|v| !v.natural) {
                bad += 1;
            }
        }
        self.diagnostics.naturality_violations += bad;
    }

    /// Step (a). Returns a frustration location if a full-rank single-spin term appears.
    fn delete_singles(&mut self) -> Result<Option<TermLocation>> {
        loop {
            let candidates: Vec<usize> = self
                .h
                .single_ops()
                .keys()
                .copied()
                .filter(|&v| self.in_scope(v))
                .collect();
            let Some(v) = self.pick(&candidates) else {
                return Ok(None);
            };
            match delete_spin(&self.h, v)? {
                DeletionOutcome::Frustrated => return Ok(Some(TermLocation::Single { v })),
                DeletionOutcome::Deleted(_, record) => self.record(TraceStep::Deletion(record)),
            }
        }
    }

    /// Step (b). Returns `Ok(true)` if a step was taken.
    fn contract_one(&mut self) -> Result<std::result::Result<bool, TermLocation>> {
        let mut heavy = Vec::new();
        for t in self.h.two_spin_terms() {
            if !self.in_scope(t.a) || !self.in_scope(t.b) {
                continue;
            }
            match t.rank() {
                4 => return Ok(Err(TermLocation::Pair { a: t.a, b: t.b })),
                2 | 3 => heavy.push((t.a, t.b)),
                _ => {}
            }
        }
        let Some((a, b)) = self.pick(&heavy) else {
            return Ok(Ok(false));
        };
        let term = self.h.pair(a, b).expect("present");
        if self.opts.substitute_nonnatural
            && term.rank() == 2
            && is_product_operator(&term.op, TAU_RANK)?.is_some()
        {
            let single = substitute_nonnatural_rank2(&term)?;
            let state = single.op.eigen().vectors.column(1).into_owned();
            self.record(TraceStep::Substitution(Substitution {
                a,
                b,
                vertex: single.v,
                state,
            }));
            return Ok(Ok(true));
        }
        let flip = self.rng.as_mut().is_some_and(|rng| rng.random_bool(0.5));
        let (u, v) = if flip { (b, a) } else { (a, b) };
        let term = term.oriented(u);
        // Frustrated inputs may lose naturality on the way, so the entangled
        // choice is best effort here.
        let iso = contraction_isometry(&term, false)?;
        self.record(TraceStep::Contraction(TwoSpinContraction { u, v, isometry: iso }));
        if self.opts.check_invariants {
            self.count_violations();
        }
        Ok(Ok(true))
    }

    /// Step (c): one pass of constraint induction over every middle spin.
    fn induction_sweep(&mut self) -> Result<Sweep> {
        let mut betas: HashMap<(usize, usize), StateVector> = HashMap::new();
        for t in self.h.two_spin_terms() {
            if self.in_scope(t.a) && self.in_scope(t.b) {
                betas.insert((t.a, t.b), constraint_vector(&t));
            }
        }
        let mut middles: Vec<usize> = self.h.active().iter().copied().filter(|&v| self.in_scope(v)).collect();
        if let Some(rng) = &mut self.rng {
            middles.shuffle(rng);
        }
        let mut grew = false;
        for b in middles {
            let neighbors: Vec<usize> = self
                .h
                .neighbors(b)
                .into_iter()
                .filter(|&x| betas.contains_key(&(x.min(b), x.max(b))))
                .collect();
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for (i, &a) in neighbors.iter().enumerate() {
                for &c in &neighbors[i + 1..] {
                    pairs.push((a, c));
                }
            }
            if let Some(rng) = &mut self.rng {
                pairs.shuffle(rng);
            }
            for (a, c) in pairs {
                let beta_ab = oriented_beta(&betas, a, b);
                let beta_bc = oriented_beta(&betas, b, c);
                let Some(induced) = induce_constraint(&beta_ab, &beta_bc)? else {
                    continue;
                };
                match betas.get(&(a, c)) {
                    Some(existing) if is_colinear(existing, &induced) => {}
                    Some(_) => {
                        self.record(TraceStep::Accumulation(InducedTerm {
                            a,
                            b,
                            c,
                            beta: induced.into_amplitudes(),
                        }));
                        return Ok(Sweep::RankIncreased);
                    }
                    None if self.h.pair(a, c).is_some() => {
                        // (a, c) carries a term outside the induction bookkeeping.
                        self.record(TraceStep::Accumulation(InducedTerm {
                            a,
                            b,
                            c,
                            beta: induced.into_amplitudes(),
                        }));
                        return Ok(Sweep::RankIncreased);
                    }
                    None => {
                        betas.insert((a, c), induced.clone());
                        self.record(TraceStep::Induction(InducedTerm {
                            a,
                            b,
                            c,
                            beta: induced.into_amplitudes(),
                        }));
                        grew = true;
                    }
                }
            }
        }
        Ok(if grew { Sweep::Grew } else { Sweep::Closed })
    }
}

fn swap_vector(v: &CVector) -> CVector {
    CVector::from_vec(vec![v[0], v[2], v[1], v[3]])
}

/// Constraint vector stored for the canonical edge, returned in `x ⊗ y` order.
fn oriented_beta(betas: &HashMap<(usize, usize), StateVector>, x: usize, y: usize) -> StateVector {
    let stored = &betas[&(x.min(y), x.max(y))];
    if x < y {
        stored.clone()
    } else {
        StateVector::unnormalized(swap_vector(stored.amplitudes()))
    }
}

pub fn reduce_with(h: &Hamiltonian, opts: &ReductionOptions) -> Result<ReductionResult> {
    let n = h.active().len().max(2);
    let cap = 10 * n * n * n;
    let mut driver = Driver {
        h: h.clone(),
        trace: ReductionTrace::default(),
        opts,
        rng: match opts.order {
            ReductionOrder::Canonical => None,
            ReductionOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        },
        diagnostics: Diagnostics::default(),
    };
    loop {
        driver.diagnostics.iterations += 1;
        if driver.diagnostics.iterations > cap {
            return Err(Error::IterationCap(cap));
        }
        if let Some(loc) = driver.delete_singles()? {
            return Ok(driver.frustrated(loc));
        }
        match driver.contract_one()? {
            Err(loc) => return Ok(driver.frustrated(loc)),
            Ok(true) => continue,
            Ok(false) => {}
        }
        match driver.induction_sweep()? {
            Sweep::Closed => break,
            Sweep::Grew | Sweep::RankIncreased => continue,
        }
    }
    let network = TreeTensorNetwork::from_trace(h.active(), driver.h.active(), &driver.trace)?;
    Ok(ReductionResult::Reduced(Reduced {
        complete: driver.h,
        network,
        trace: driver.trace,
        diagnostics: driver.diagnostics,
    }))
}

/// `|00⟩⟨00| + |11⟩⟨11|`-style helper used by examples and tests.
pub fn diagonal_projector(bits: &[usize]) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for &b in bits {
        m[(b, b)] = c64(1.0, 0.0);
    }
    m
}
