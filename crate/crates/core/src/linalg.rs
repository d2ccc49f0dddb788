//! Dense complex linear algebra on spin-1/2 spaces.
//!
//! Ranks, kernels and product tests are decided with relative thresholds so
//! that results do not depend on the overall energy scale of an operator.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative eigen/singular value threshold for rank decisions.
pub const TAU_RANK: f64 = 1e-9;
/// Absolute entrywise threshold for Hermiticity checks.
pub const TAU_HERM: f64 = 1e-10;
/// Normalization and orthonormality tolerance.
pub const TAU_NORM: f64 = 1e-10;

pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const ONE: C64 = Complex::new(1.0, 0.0);

pub const fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Ascending eigenvalues with the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> Eigen {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Eigen { values, vectors }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates and symmetrizes `matrix`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let defect = hermiticity_defect(&matrix);
        if defect > TAU_HERM {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::symmetrized(matrix))
    }

    pub fn symmetrized(matrix: CMatrix) -> Self {
        let adj = matrix.adjoint();
        Self {
            matrix: (matrix + adj).scale(0.5),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = CVector::from_iterator(values.len(), values.iter().map(|&x| c64(x, 0.0)));
        Self {
            matrix: CMatrix::from_diagonal(&d),
        }
    }

    /// `|v⟩⟨v|` for the given amplitudes, without normalizing.
    pub fn projector(v: &CVector) -> Self {
        Self::symmetrized(outer(v, v))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigen(&self) -> Eigen {
        hermitian_eigen(&self.matrix)
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        let e = self.eigen();
        e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().values.first().copied().unwrap_or(0.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::symmetrized(&self.matrix + &other.matrix)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale(s),
        }
    }

    pub fn shifted(&self, shift: f64) -> Self {
        let id = CMatrix::identity(self.dim(), self.dim());
        Self::symmetrized(&self.matrix + id.scale(shift))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    normalized: bool,
}

impl StateVector {
    /// Normalizes `amplitudes`.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let n = amplitudes.norm();
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(n),
            normalized: true,
        })
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amps))
    }

    /// A functional or scaled vector kept as is.
    pub fn unnormalized(amplitudes: CVector) -> Self {
        Self {
            amplitudes,
            normalized: false,
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Self {
            amplitudes: v,
            normalized: true,
        }
    }

    /// `(|01⟩ − |10⟩)/√2`.
    pub fn singlet() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amplitudes: CVector::from_vec(vec![ZERO, c64(s, 0.0), c64(-s, 0.0), ZERO]),
            normalized: true,
        }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            normalized: self.normalized && other.normalized,
        }
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::projector(&self.amplitudes)
    }

    /// Rotates the global phase so the first non-negligible amplitude is real positive.
    pub fn with_canonical_phase(mut self) -> Self {
        canonical_phase(&mut self.amplitudes);
        self
    }
}

pub(crate) fn canonical_phase(v: &mut CVector) {
    let scale = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let phase = z.conj() / z.norm();
        for a in v.iter_mut() {
            *a *= phase;
        }
    }
}

fn check_psd(eig: &Eigen, tau: f64) -> Result<f64> {
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -tau * scale {
        return Err(Error::NotPsd(min));
    }
    Ok(scale)
}

/// Number of eigenvalues with `|λ| > tau·‖M‖`.
pub fn operator_rank(m: &HermitianOperator, tau: f64) -> usize {
    rank_of_values(&m.eigen().values, tau)
}

pub(crate) fn rank_of_values(values: &[f64], tau: f64) -> usize {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    values.iter().filter(|v| v.abs() > tau * scale).count()
}

/// Orthonormal basis of `ker M`.
///
/// The basis is canonical for the subspace: vectors are obtained by projecting
/// standard basis vectors in order and orthogonalizing, so the first vector is
/// the kernel vector with the largest overlap with `e_0`.
pub fn kernel_basis(m: &HermitianOperator, tau: f64) -> Result<Vec<StateVector>> {
    let eig = m.eigen();
    let scale = check_psd(&eig, tau)?;
    let dim = m.dim();
    let cut = tau * scale;
    let kernel: Vec<CVector> = (0..dim)
        .filter(|&i| scale == 0.0 || eig.values[i].abs() <= cut)
        .map(|i| eig.vectors.column(i).into_owned())
        .collect();
    Ok(canonical_span_basis(&kernel, dim))
}

/// Canonical orthonormal basis of the span of the orthonormal family `span`.
pub fn canonical_span_basis(span: &[CVector], dim: usize) -> Vec<StateVector> {
    let target = span.len();
    if target == 0 {
        return Vec::new();
    }
    let mut proj = CMatrix::zeros(dim, dim);
    for v in span {
        proj += outer(v, v);
    }
    let mut out: Vec<CVector> = Vec::with_capacity(target);
    for threshold in [1e-3, 1e-8] {
        for i in 0..dim {
            if out.len() == target {
                break;
            }
            let mut w: CVector = proj.column(i).into_owned();
            for _ in 0..2 {
                for u in &out {
                    let c = u.dotc(&w);
                    w -= u * c;
                }
            }
            let n = w.norm();
            if n > threshold {
                let mut w = w.unscale(n);
                canonical_phase(&mut w);
                out.push(w);
            }
        }
    }
    out.into_iter()
        .map(|amplitudes| StateVector {
            amplitudes,
            normalized: true,
        })
        .collect()
}

/// Canonical orthonormal basis of the orthogonal complement of `vectors`.
pub fn orthogonal_complement(vectors: &[StateVector], dim: usize) -> Vec<StateVector> {
    let mut proj = CMatrix::identity(dim, dim);
    for v in vectors {
        proj -= outer(v.amplitudes(), v.amplitudes());
    }
    let eig = hermitian_eigen(&HermitianOperator::symmetrized(proj).into_matrix());
    let span: Vec<CVector> = (0..dim)
        .filter(|&i| eig.values[i] > 0.5)
        .map(|i| eig.vectors.column(i).into_owned())
        .collect();
    canonical_span_basis(&span, dim)
}

#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// Descending, two entries (the second may vanish).
    pub coefficients: [f64; 2],
    pub left: [CVector; 2],
    pub right: [CVector; 2],
}

impl SchmidtDecomposition {
    pub fn recombine(&self) -> CVector {
        let mut out = CVector::zeros(4);
        for r in 0..2 {
            out += self.left[r].kronecker(&self.right[r]).scale(self.coefficients[r]);
        }
        out
    }
}

fn expect_dim(v: &StateVector, dim: usize) -> Result<()> {
    if v.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        });
    }
    Ok(())
}

fn coefficient_matrix(v: &CVector) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| v[2 * i + j])
}

pub fn schmidt_decompose(psi: &StateVector) -> Result<SchmidtDecomposition> {
    expect_dim(psi, 4)?;
    let svd = SVD::new(coefficient_matrix(psi.amplitudes()), true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let s = &svd.singular_values;
    let order = if s[0] >= s[1] { [0, 1] } else { [1, 0] };
    let left = order.map(|k| u.column(k).into_owned());
    let right = order.map(|k| vt.row(k).transpose());
    Ok(SchmidtDecomposition {
        coefficients: order.map(|k| s[k]),
        left,
        right,
    })
}

/// Second Schmidt coefficient relative to the norm of `psi`.
pub fn entanglement_defect(psi: &StateVector) -> Result<f64> {
    let d = schmidt_decompose(psi)?;
    let n = psi.norm();
    Ok(if n == 0.0 { 0.0 } else { d.coefficients[1] / n })
}

pub fn is_product_state(psi: &StateVector, tau: f64) -> Result<bool> {
    Ok(entanglement_defect(psi)? <= tau)
}

/// Factors `A ⊗ B` of a product operator, both Hermitian.
#[derive(Clone, Debug)]
pub struct ProductFactors {
    pub left: CMatrix,
    pub right: CMatrix,
}

fn realign(eta: &CMatrix) -> CMatrix {
    // R[(i,k),(j,l)] = η[(i,j),(k,l)]
    CMatrix::from_fn(4, 4, |r, c| {
        let (i, k) = (r / 2, r % 2);
        let (j, l) = (c / 2, c % 2);
        eta[(2 * i + j, 2 * k + l)]
    })
}

/// Operator-Schmidt singular values of a two-spin operator, descending.
pub fn operator_schmidt_values(eta: &HermitianOperator) -> Result<Vec<f64>> {
    if eta.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: eta.dim(),
        });
    }
    let mut s: Vec<f64> = SVD::new(realign(eta.matrix()), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Returns the factors when `eta = A ⊗ B` up to relative tolerance `tau`.
pub fn is_product_operator(eta: &HermitianOperator, tau: f64) -> Result<Option<ProductFactors>> {
    if eta.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: eta.dim(),
        });
    }
    let svd = SVD::new(realign(eta.matrix()), true, true);
    let s = &svd.singular_values;
    let top = (0..4).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap_or(0);
    let s1 = s[top];
    let s2 = (0..4).filter(|&k| k != top).map(|k| s[k]).fold(0.0f64, f64::max);
    if s1 == 0.0 {
        return Ok(Some(ProductFactors {
            left: CMatrix::zeros(2, 2),
            right: CMatrix::zeros(2, 2),
        }));
    }
    if s2 > tau * s1 {
        return Ok(None);
    }
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let root = s1.sqrt();
    let mut left = CMatrix::from_fn(2, 2, |i, k| u[(2 * i + k, top)] * root);
    let mut right = CMatrix::from_fn(2, 2, |j, l| vt[(top, 2 * j + l)] * root);
    let tr_sq = (&left * &left).trace();
    if tr_sq.norm() > 0.0 {
        let phase = C64::from_polar(1.0, -tr_sq.arg() / 2.0);
        left *= phase;
        right *= phase.conj();
    }
    if left.trace().re < 0.0 {
        left = -left;
        right = -right;
    }
    let left = HermitianOperator::symmetrized(left).into_matrix();
    let right = HermitianOperator::symmetrized(right).into_matrix();
    Ok(Some(ProductFactors { left, right }))
}

/// The operator `(⟨ψ| ⊗ 1)(1 ⊗ |φ⟩)` mapping the first spin of `ψ` to the
/// last spin of `φ`: entry `[k, i] = Σ_j conj(ψ_ij) φ_jk`.
pub fn partial_contraction(psi: &StateVector, phi: &StateVector) -> Result<CMatrix> {
    expect_dim(psi, 4)?;
    expect_dim(phi, 4)?;
    let p = psi.amplitudes();
    let f = phi.amplitudes();
    Ok(CMatrix::from_fn(2, 2, |k, i| {
        (0..2).map(|j| p[2 * i + j].conj() * f[2 * j + k]).sum()
    }))
}

/// Unit vector in the span of an orthonormal family of two-spin vectors with
/// the largest second Schmidt coefficient, together with that coefficient.
pub fn most_entangled_in(basis: &[StateVector]) -> Result<(StateVector, f64)> {
    for b in basis {
        expect_dim(b, 4)?;
    }
    let k = basis.len();
    if k == 0 {
        return Err(Error::ZeroVector);
    }
    // det of the coefficient matrix is the bilinear form x^T J x / 2.
    let bilinear = |x: &CVector, y: &CVector| x[0] * y[3] + x[3] * y[0] - x[1] * y[2] - x[2] * y[1];
    let q = CMatrix::from_fn(k, k, |a, b| {
        bilinear(basis[a].amplitudes(), basis[b].amplitudes()) * 0.5
    });
    let mut starts: Vec<CVector> = vec![CVector::from_element(k, c64(1.0, 0.0))];
    for i in 0..k {
        starts.push(CVector::from_fn(k, |j, _| if j == i { ONE } else { ZERO }));
        starts.push(CVector::from_fn(k, |j, _| {
            if j == i {
                ONE
            } else {
                c64(0.3 * (j as f64 + 1.0), 0.7)
            }
        }));
    }
    let value = |c: &CVector| (c.transpose() * &q * c)[(0, 0)].norm();
    let mut best: Option<(CVector, f64)> = None;
    for start in starts {
        let mut x = start.normalize();
        for _ in 0..200 {
            let next = &q * x.conjugate();
            let n = next.norm();
            if n < 1e-300 {
                break;
            }
            let next = next.unscale(n);
            let delta = (&next - &x).norm();
            x = next;
            if delta < 1e-15 {
                break;
            }
        }
        let c = x.conjugate();
        let v = value(&c);
        if best.as_ref().is_none_or(|(_, b)| v > *b + 1e-14) {
            best = Some((c, v));
        }
    }
    let (c, _) = best.expect("at least one start");
    let mut amps = CVector::zeros(4);
    for (a, b) in basis.iter().enumerate() {
        amps += b.amplitudes() * c[a];
    }
    let psi = StateVector::new(amps)?.with_canonical_phase();
    let defect = entanglement_defect(&psi)?;
    Ok((psi, defect))
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c64(0.0, -1.0), c64(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// The antisymmetric form `[[0, 1], [-1, 0]]`.
pub fn epsilon() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO])
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(bits: &[usize]) -> CVector {
        let idx = bits.iter().fold(0, |acc, b| 2 * acc + b);
        StateVector::basis(1 << bits.len(), idx).into_amplitudes()
    }

    fn proj(v: &CVector) -> CMatrix {
        outer(v, v)
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        let k = kernel_basis(&HermitianOperator::identity(4), TAU_RANK).unwrap();
        assert!(k.is_empty());
    }

    #[test]
    fn kernel_of_antiferro_xx_term() {
        let h = HermitianOperator::new(proj(&ket(&[0, 0])) + proj(&ket(&[1, 1]))).unwrap();
        let k = kernel_basis(&h, TAU_RANK).unwrap();
        assert_eq!(k.len(), 2);
        assert!((k[0].amplitudes() - ket(&[0, 1])).norm() < 1e-12);
        assert!((k[1].amplitudes() - ket(&[1, 0])).norm() < 1e-12);
    }

    #[test]
    fn kernel_rejects_negative_operator() {
        let h = HermitianOperator::diagonal(&[-1.0, 1.0]);
        assert!(matches!(kernel_basis(&h, TAU_RANK), Err(Error::NotPsd(_))));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(operator_rank(&HermitianOperator::zeros(4), TAU_RANK), 0);
        let h = HermitianOperator::new(proj(&ket(&[0, 0])) + proj(&ket(&[1, 1]))).unwrap();
        assert_eq!(operator_rank(&h, TAU_RANK), 2);
        assert_eq!(operator_rank(&StateVector::singlet().projector(), TAU_RANK), 1);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn schmidt_examples() {
        let d = schmidt_decompose(&StateVector::new(ket(&[0, 1])).unwrap()).unwrap();
        assert!((d.coefficients[0] - 1.0).abs() < 1e-12 && d.coefficients[1].abs() < 1e-12);
        let d = schmidt_decompose(&StateVector::singlet()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.coefficients[0] - s).abs() < 1e-12 && (d.coefficients[1] - s).abs() < 1e-12);
        assert!((d.recombine() - StateVector::singlet().amplitudes()).norm() < 1e-12);
        assert!(matches!(
            schmidt_decompose(&StateVector::basis(8, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn product_state_examples() {
        assert!(is_product_state(&StateVector::basis(4, 0), TAU_RANK).unwrap());
        assert!(!is_product_state(&StateVector::singlet(), TAU_RANK).unwrap());
        let t = 0.3f64;
        let v = StateVector::from_slice(&[c64(t.cos(), 0.0), ZERO, ZERO, c64(t.sin(), 0.0)]).unwrap();
        assert!(!is_product_state(&v, TAU_RANK).unwrap());
        assert!((entanglement_defect(&v).unwrap() - t.sin()).abs() < 1e-12);
    }

    #[test]
    fn product_operator_examples() {
        let p0 = proj(&ket(&[0]));
        let eta = HermitianOperator::new(kron(&p0, &CMatrix::identity(2, 2))).unwrap();
        let f = is_product_operator(&eta, TAU_RANK).unwrap().expect("product");
        assert!((kron(&f.left, &f.right) - eta.matrix()).norm() < 1e-12);
        assert!(is_product_operator(&StateVector::singlet().projector(), TAU_RANK)
            .unwrap()
            .is_none());
        let plus = CVector::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
        let eta_b = CMatrix::from_row_slice(2, 2, &[c64(2.0, 0.0), c64(0.5, 0.5), c64(0.5, -0.5), ONE]);
        let eta = HermitianOperator::new(kron(&proj(&plus), &eta_b)).unwrap();
        let f = is_product_operator(&eta, TAU_RANK).unwrap().expect("product");
        assert!((kron(&f.left, &f.right) - eta.matrix()).norm() < 1e-12);
        assert!(hermiticity_defect(&f.left) < 1e-14 && hermiticity_defect(&f.right) < 1e-14);
    }

    #[test]
    fn partial_contraction_examples() {
        let v = StateVector::new(ket(&[0, 1])).unwrap();
        assert!(max_abs(&partial_contraction(&v, &v).unwrap()) < 1e-15);
        let s = StateVector::singlet();
        let m = partial_contraction(&s, &s).unwrap();
        assert!((m + CMatrix::identity(2, 2).scale(0.5)).norm() < 1e-15);
    }

    #[test]
    fn most_entangled_vector_in_ising_image() {
        let basis = vec![StateVector::basis(4, 0), StateVector::basis(4, 3)];
        let (v, defect) = most_entangled_in(&basis).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((defect - s).abs() < 1e-12);
        assert!((v.amplitudes() - CVector::from_vec(vec![c64(s, 0.0), ZERO, ZERO, c64(s, 0.0)])).norm() < 1e-12);
    }

    #[test]
    fn most_entangled_vector_in_product_span() {
        // span{|10⟩, |11⟩} contains only product vectors.
        let basis = vec![StateVector::basis(4, 2), StateVector::basis(4, 3)];
        let (_, defect) = most_entangled_in(&basis).unwrap();
        assert!(defect < 1e-12);
    }

    #[test]
    fn complement_is_orthonormal() {
        let c = orthogonal_complement(&[StateVector::singlet()], 4);
        assert_eq!(c.len(), 3);
        for a in &c {
            assert!(a.inner(&StateVector::singlet()).norm() < 1e-12);
            for b in &c {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((a.inner(b).norm() - expect).abs() < 1e-12);
            }
        }
    }
}
