//! Variational energies of `H₀ + λH₁` over the ground manifold of `H₀`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{pairs_to_matrix, ModelFile};
use crate::ground::{pull_back, GroundSpace};
use crate::linalg::{hermitian_eigen, CMatrix, HermitianOperator, C64};
use crate::local::LocalOp;
use crate::model::Hamiltonian;
use crate::reduction::{reduce_to_complete, Reduced};

/// A sum of Hermitian operators on at most two spins, with no rescaling.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    terms: Vec<LocalOp>,
}

impl Perturbation {
    pub fn new(terms: Vec<LocalOp>) -> Result<Self> {
        for t in &terms {
            if t.sites().len() > 2 {
                return Err(Error::UnsupportedPerturbation(t.sites().len()));
            }
            HermitianOperator::new(t.matrix().clone())?;
        }
        Ok(Self { terms })
    }

    /// Reads edges and singles of `model` with vertex labels resolved against `h0`.
    pub fn from_model(model: &ModelFile, h0: &Hamiltonian) -> Result<Self> {
        let mut terms = Vec::with_capacity(model.edges.len() + model.singles.len());
        for e in &model.edges {
            let sites = vec![h0.index_of(&e.a)?, h0.index_of(&e.b)?];
            terms.push(LocalOp::new(sites, pairs_to_matrix(&e.matrix, 4)?)?);
        }
        for s in &model.singles {
            terms.push(LocalOp::new(vec![h0.index_of(&s.v)?], pairs_to_matrix(&s.matrix, 2)?)?);
        }
        Self::new(terms)
    }

    pub fn terms(&self) -> &[LocalOp] {
        &self.terms
    }
}

/// `H₁` restricted to the ground manifold of `H₀` in its orthonormal basis.
#[derive(Clone, Debug)]
pub struct RestrictedPerturbation {
    pub matrix: CMatrix,
    pub basis_dim: usize,
}

impl RestrictedPerturbation {
    /// Lowest eigenpair of `λ·H̄₁`.
    pub fn minimize(&self, lambda: f64) -> VariationalResult {
        let scaled = HermitianOperator::symmetrized(self.matrix.scale(lambda)).into_matrix();
        let eig = hermitian_eigen(&scaled);
        VariationalResult {
            lambda,
            energy: eig.values[0],
            coefficients: eig.vectors.column(0).iter().copied().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalResult {
    pub lambda: f64,
    pub energy: f64,
    /// Minimizer in the orthonormal manifold basis.
    #[serde(with = "complex_list")]
    pub coefficients: Vec<C64>,
}

mod complex_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::{c64, C64};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?
            .into_iter()
            .map(|[re, im]| c64(re, im))
            .collect())
    }
}

fn reduce_h0(h0: &Hamiltonian) -> Result<Reduced> {
    match reduce_to_complete(h0)? {
        crate::reduction::ReductionResult::Reduced(r) => Ok(r),
        crate::reduction::ReductionResult::Frustrated(_) => Err(Error::FrustratedH0),
    }
}

/// Sums the restriction of every term of `h1` to the ground manifold of `h0`.
pub fn restrict_perturbation(h0: &Hamiltonian, h1: &Perturbation) -> Result<RestrictedPerturbation> {
    let reduced = reduce_h0(h0)?;
    let space = GroundSpace::new(&reduced.complete)?;
    let dim = space.dim();
    if dim == 0 {
        return Err(Error::FrustratedH0);
    }
    let mut matrix = CMatrix::zeros(dim, dim);
    for term in h1.terms() {
        if let Some(s) = term.sites().iter().find(|s| !reduced.network.outputs().contains(s)) {
            return Err(Error::UnknownVertex(s.to_string()));
        }
        let pulled = pull_back(&reduced.network, term);
        matrix += space.embed(&space.restrict(&pulled)?);
    }
    Ok(RestrictedPerturbation { matrix, basis_dim: dim })
}

/// `min ⟨Φ|H₀ + λH₁|Φ⟩` over normalized `Φ` in the kernel of `h0`.
pub fn variational_energy(h0: &Hamiltonian, h1: &Perturbation, lambda: f64) -> Result<VariationalResult> {
    Ok(restrict_perturbation(h0, h1)?.minimize(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::planted_complete;
    use crate::linalg::{c64, pauli_z};
    use crate::oracle::{build_from_terms, dense_eigen, ground_data_of, DEFAULT_MAX_SPINS};

    fn magnetization(n: usize) -> Perturbation {
        Perturbation::new((0..n).map(|v| LocalOp::new(vec![v], pauli_z()).unwrap()).collect()).unwrap()
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let h0 = planted_complete(4, 3);
        let r = variational_energy(&h0, &magnetization(4), 0.0).unwrap();
        assert!(r.energy.abs() < 1e-12);
    }

    #[test]
    fn singlet_model_restricted_magnetization() {
        let n = 4;
        let mut h = Hamiltonian::with_spins(n);
        let singlet = crate::linalg::StateVector::singlet().into_amplitudes();
        for a in 0..n {
            for b in a + 1..n {
                h.add_two_spin(a, b, crate::linalg::outer(&singlet, &singlet)).unwrap();
            }
        }
        // The kernel is the symmetric subspace, where Σσz ranges over -n..n.
        let r = variational_energy(&h, &magnetization(n), 1.0).unwrap();
        assert!((r.energy + n as f64).abs() < 1e-9);
        let oracle = ground_data_of(&h).unwrap();
        let spins = oracle.spins.clone();
        let mut restricted = CMatrix::zeros(oracle.kernel_dim, oracle.kernel_dim);
        for (i, u) in oracle.basis.iter().enumerate() {
            for (j, v) in oracle.basis.iter().enumerate() {
                let mut acc = c64(0.0, 0.0);
                for t in magnetization(n).terms() {
                    acc += u.dotc(&crate::oracle::apply_local(t, &spins, v));
                }
                restricted[(i, j)] = acc;
            }
        }
        let e = dense_eigen(&restricted).unwrap();
        assert!((e.values[0] - r.energy).abs() < 1e-9);
    }

    #[test]
    fn upper_bounds_the_true_energy() {
        let h0 = planted_complete(5, 9);
        let h1 = Perturbation::new(vec![
            LocalOp::new(vec![0, 1], crate::linalg::kron(&pauli_z(), &pauli_z())).unwrap(),
            LocalOp::new(vec![3], crate::linalg::pauli_x()).unwrap(),
        ])
        .unwrap();
        let restricted = restrict_perturbation(&h0, &h1).unwrap();
        for lambda in [-0.5, -0.1, 0.1, 0.5] {
            let v = restricted.minimize(lambda);
            let mut terms = h0.local_terms();
            terms.extend(h1.terms().iter().map(|t| t.scaled(c64(lambda, 0.0))));
            let spins: Vec<usize> = h0.active().iter().copied().collect();
            let dense = build_from_terms(spins, &terms, DEFAULT_MAX_SPINS).unwrap();
            let e0 = dense_eigen(dense.matrix()).unwrap().values[0];
            assert!(v.energy >= e0 - 1e-9, "λ = {lambda}");
        }
    }

    #[test]
    fn rejects_wide_terms_and_frustrated_h0() {
        let wide = LocalOp::new(vec![0, 1, 2], CMatrix::identity(8, 8)).unwrap();
        assert!(matches!(Perturbation::new(vec![wide]), Err(Error::UnsupportedPerturbation(3))));
        let frustrated = crate::generate::golden("double-rank3").unwrap();
        assert!(matches!(
            variational_energy(&frustrated, &magnetization(3), 0.1),
            Err(Error::FrustratedH0)
        ));
    }
}
