//! Dense complex linear algebra and the basic state types.
//!
//! Everything here works on `nalgebra` dynamic matrices of `Complex64`.
//! Hermiticity, trace and positivity are checked once, at construction;
//! afterwards the wrapped values are immutable.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Shared numerical tolerances.
pub mod tol {
    pub const HERM: f64 = 1e-10;
    pub const PSD: f64 = -1e-10;
    pub const RECON: f64 = 1e-9;
    pub const TRACE: f64 = 1e-10;
    pub const NORM: f64 = 1e-10;
    pub const MAX_DIM: usize = 64;
}

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> CMatrix {
    CMatrix::zeros(d, d)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[r(0.0), -I, I, r(0.0)])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), r(-1.0)])
}

/// `u·σ` for a real 3-vector `u`.
pub fn pauli_dot(u: [f64; 3]) -> CMatrix {
    sigma_x() * r(u[0]) + sigma_y() * r(u[1]) + sigma_z() * r(u[2])
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * r(0.5)
}

pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn jordan_product(a: &Hermitian, b: &Hermitian) -> Hermitian {
    let ab = a.matrix() * b.matrix();
    Hermitian::from_raw(symmetrize(&ab))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Self-adjoint operator, checked within `tol::HERM` and stored exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        if m.nrows() > tol::MAX_DIM {
            return Err(Error::DimTooLarge(m.nrows()));
        }
        let defect = hermitian_defect(&m);
        if defect > tol::HERM {
            return Err(Error::NonHermitian(defect));
        }
        Ok(Hermitian(symmetrize(&m)))
    }

    /// Symmetrizes without checking. For operators Hermitian by construction.
    pub(crate) fn from_raw(m: CMatrix) -> Self {
        Hermitian(symmetrize(&m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Hermitian(CMatrix::from_fn(d, d, |i, j| if i == j { r(diag[i]) } else { r(0.0) }))
    }

    pub fn identity(d: usize) -> Self {
        Hermitian(identity(d))
    }

    pub fn pauli_x() -> Self {
        Hermitian(sigma_x())
    }

    pub fn pauli_y() -> Self {
        Hermitian(sigma_y())
    }

    pub fn pauli_z() -> Self {
        Hermitian(sigma_z())
    }

    pub fn pauli_dot(u: [f64; 3]) -> Self {
        Hermitian(pauli_dot(u))
    }

    pub fn projector(v: &CVector) -> Self {
        Hermitian::from_raw(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn eig(&self) -> Eigen {
        eig_unchecked(&self.0)
    }

    /// Applies a real function to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let e = self.eig();
        let fd = CMatrix::from_diagonal(&CVector::from_iterator(
            e.values.len(),
            e.values.iter().map(|&x| r(f(x))),
        ));
        Hermitian::from_raw(&e.vectors * fd * e.vectors.adjoint())
    }

    /// `exp(i t A)` as a unitary matrix.
    pub fn exp_i(&self, t: f64) -> CMatrix {
        let e = self.eig();
        let fd = CMatrix::from_diagonal(&CVector::from_iterator(
            e.values.len(),
            e.values.iter().map(|&x| C64::from_polar(1.0, t * x)),
        ));
        &e.vectors * fd * e.vectors.adjoint()
    }

    /// Square root of a positive semidefinite operator; small negative
    /// eigenvalues are clipped to zero.
    pub fn psd_sqrt(&self) -> Hermitian {
        self.map_spectrum(|x| x.max(0.0).sqrt())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().values.last().copied().unwrap_or(0.0)
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian(&self.0 * r(s))
    }
}

impl std::ops::Add for &Hermitian {
    type Output = Hermitian;
    fn add(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &Hermitian {
    type Output = Hermitian;
    fn sub(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &rhs.0)
    }
}

/// Spectral decomposition: eigenvalues descending, eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }
}

/// Diagonalizes a Hermitian matrix, rejecting asymmetric input.
pub fn eig_hermitian(a: &CMatrix) -> Result<Eigen> {
    if !a.is_square() {
        return Err(Error::DimMismatch("eig_hermitian needs a square matrix".into()));
    }
    let defect = hermitian_defect(a);
    if defect > tol::HERM {
        return Err(Error::NonHermitian(defect));
    }
    Ok(eig_unchecked(&symmetrize(a)))
}

fn eig_unchecked(a: &CMatrix) -> Eigen {
    let d = a.nrows();
    let se = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        let mut v = se.eigenvectors.column(k).into_owned();
        // fix the phase: first non-negligible component real positive
        if let Some(z) = v.iter().find(|z| z.norm() > 1e-8).copied() {
            v *= z.conj() / z.norm();
        }
        vectors.set_column(col, &v);
    }
    Eigen { values, vectors }
}

/// Unit vector in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    pub fn new(v: CVector) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > tol::NORM {
            return Err(Error::NotNormalized(n));
        }
        Ok(StateVector(v))
    }

    /// Normalizes `v`; fails on the zero vector.
    pub fn normalized(v: CVector) -> Result<Self> {
        let n = v.norm();
        if n < 1e-300 {
            return Err(Error::NotNormalized(n));
        }
        Ok(StateVector(v / r(n)))
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amps))
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = CVector::zeros(d);
        v[k] = r(1.0);
        StateVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    pub fn projector(&self) -> Hermitian {
        Hermitian::projector(&self.0)
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0.dotc(&other.0)
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector(self.0.kronecker(&other.0))
    }
}

/// Trace-one positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Hermitian);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::from_hermitian(Hermitian::new(m)?)
    }

    pub fn from_hermitian(h: Hermitian) -> Result<Self> {
        let t = trace(h.matrix());
        if (t.re - 1.0).abs() > tol::TRACE || t.im.abs() > tol::TRACE {
            return Err(Error::BadTrace(t.re));
        }
        let min = h.min_eigenvalue();
        if min < tol::PSD {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityMatrix(h))
    }

    /// Divides a positive operator by its trace before validating.
    pub fn normalize(m: CMatrix) -> Result<Self> {
        let t = trace(&m).re;
        if t <= 0.0 {
            return Err(Error::BadTrace(t));
        }
        Self::new(m / r(t))
    }

    pub fn pure(psi: &StateVector) -> Self {
        DensityMatrix(psi.projector())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix(Hermitian(identity(d) * r(1.0 / d as f64)))
    }

    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Self::from_hermitian(Hermitian::from_real_diagonal(p))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn hermitian(&self) -> &Hermitian {
        &self.0
    }

    pub fn eig(&self) -> Eigen {
        self.0.eig()
    }

    pub fn purity(&self) -> f64 {
        trace(&(self.matrix() * self.matrix())).re
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> f64 {
        psi.vector().dotc(&(self.matrix() * psi.vector())).re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(Hermitian::from_raw(self.matrix().kronecker(other.matrix())))
    }

    pub fn sqrt(&self) -> Hermitian {
        self.0.psd_sqrt()
    }

    pub(crate) fn from_raw(m: CMatrix) -> Self {
        DensityMatrix(Hermitian::from_raw(m))
    }
}

/// `tr(ρX)`; fails if the imaginary part exceeds 1e-8.
pub fn expect(rho: &DensityMatrix, x: &Hermitian) -> Result<f64> {
    if rho.dim() != x.dim() {
        return Err(Error::DimMismatch(format!("state {} vs observable {}", rho.dim(), x.dim())));
    }
    let v = trace(&(rho.matrix() * x.matrix()));
    if v.im.abs() > 1e-8 {
        return Err(Error::ImaginaryResidue(v.im));
    }
    Ok(v.re)
}

/// Reduced matrix on factor `keep` of a tensor product with factor dims `dims`.
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: usize) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if total != m.nrows() || !m.is_square() {
        return Err(Error::DimMismatch(format!(
            "factor dims {:?} do not match matrix dim {}",
            dims,
            m.nrows()
        )));
    }
    if keep >= dims.len() {
        return Err(Error::DimMismatch(format!("no factor {keep} in {dims:?}")));
    }
    let left: usize = dims[..keep].iter().product();
    let dk = dims[keep];
    let right: usize = dims[keep + 1..].iter().product();
    let idx = |a: usize, k: usize, b: usize| (a * dk + k) * right + b;
    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..left {
                for b in 0..right {
                    s += m[(idx(a, i, b), idx(a, j, b))];
                }
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: usize) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_raw(partial_trace_matrix(rho.matrix(), dims, keep)?))
}

/// Unitary evolution `e^{-iHt} ρ e^{iHt}` with ħ = 1.
pub fn evolve(rho: &DensityMatrix, h: &Hermitian, t: f64) -> Result<DensityMatrix> {
    if rho.dim() != h.dim() {
        return Err(Error::DimMismatch(format!("state {} vs Hamiltonian {}", rho.dim(), h.dim())));
    }
    let u = h.exp_i(-t);
    Ok(DensityMatrix::from_raw(&u * rho.matrix() * u.adjoint()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let b = BlochVector { x, y, z };
        if b.norm() > 1.0 + tol::NORM {
            return Err(Error::BlochNormExceeded(b.norm()));
        }
        Ok(b)
    }

    /// Point on the sphere with colatitude `theta` and azimuth `phi`.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        BlochVector {
            x: theta.sin() * phi.cos(),
            y: theta.sin() * phi.sin(),
            z: theta.cos(),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_pure(&self) -> bool {
        (self.norm() - 1.0).abs() < tol::NORM
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }
}

/// `ρ = ½(1 + u·σ)`
pub fn density_from_bloch(u: &BlochVector) -> Result<DensityMatrix> {
    if u.norm() > 1.0 + tol::NORM {
        return Err(Error::BlochNormExceeded(u.norm()));
    }
    Ok(DensityMatrix::from_raw((identity(2) + pauli_dot(u.as_array())) * r(0.5)))
}

pub fn bloch_from_density(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimMismatch(format!("Bloch vector needs a qubit, got dim {}", rho.dim())));
    }
    let m = rho.matrix();
    Ok(BlochVector {
        x: 2.0 * m[(0, 1)].re,
        y: -2.0 * m[(0, 1)].im,
        z: (m[(0, 0)] - m[(1, 1)]).re,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Orthonormal basis `{|m⟩ : m = j, j-1, …, -j}` of the symmetric subspace of
/// `⊗ⁿ C²`, as the columns of a `2ⁿ × (n+1)` isometry. Column `c` holds the
/// normalized symmetrization of `n - c` copies of `|0⟩` and `c` copies of `|1⟩`.
pub fn symmetric_basis(n: usize) -> CMatrix {
    let big = 1usize << n;
    let mut out = CMatrix::zeros(big, n + 1);
    for idx in 0..big {
        let ones = idx.count_ones() as usize;
        out[(idx, ones)] = r(1.0);
    }
    for col in 0..=n {
        let norm = binomial(n, col).sqrt();
        for idx in 0..big {
            out[(idx, col)] /= r(norm);
        }
    }
    out
}

/// Coherent spin-`n/2` state `⊗ⁿψ` expressed in the normalized `|m⟩` basis,
/// ordered `m = j` first. Coefficients are `√C(2j, j+m) α^{j+m} β^{j−m}`.
pub fn spin_j_coherent(psi: &StateVector, n: usize) -> Result<StateVector> {
    if psi.dim() != 2 {
        return Err(Error::DimMismatch("spin_j_coherent needs a qubit state".into()));
    }
    if n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    let (alpha, beta) = (psi.vector()[0], psi.vector()[1]);
    let amps = (0..=n).map(|c| {
        let zeros = n - c;
        r(binomial(n, c).sqrt()) * alpha.powu(zeros as u32) * beta.powu(c as u32)
    });
    StateVector::new(CVector::from_iterator(n + 1, amps))
}

pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

pub fn tensor_power(rho: &DensityMatrix, n: usize) -> DensityMatrix {
    (1..n).fold(rho.clone(), |acc, _| acc.tensor(rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
        frobenius(&(a - b)) < eps
    }

    #[test]
    fn pauli_squares_are_identity() {
        for s in [sigma_x(), sigma_y(), sigma_z()] {
            assert_eq!(&s * &s, identity(2));
        }
    }

    #[test]
    fn eig_of_sigma_z_is_diagonal() {
        let e = eig_hermitian(&sigma_z()).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        assert!(close(&e.vectors, &identity(2), 1e-12));
    }

    #[test]
    fn eig_of_sigma_x_matches_hand_diagonalization() {
        let e = eig_hermitian(&sigma_x()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12 && (e.values[1] + 1.0).abs() < 1e-12);
        let plus = CVector::from_column_slice(&[r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)]);
        let minus = CVector::from_column_slice(&[r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)]);
        assert!((e.vector(0) - plus).norm() < 1e-12);
        assert!((e.vector(1) - minus).norm() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(0.0), r(0.0)]);
        assert!(matches!(eig_hermitian(&m), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [1, 2, 5, 8, 17, 32] {
            let h = random::hermitian(d, &mut rng);
            let e = h.eig();
            let lam = CMatrix::from_diagonal(&CVector::from_iterator(d, e.values.iter().map(|&x| r(x))));
            let rec = &e.vectors * lam * e.vectors.adjoint();
            assert!(close(&rec, h.matrix(), tol::RECON));
            assert!(close(&(e.vectors.adjoint() * &e.vectors), &identity(d), tol::RECON));
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn tensor_index_arithmetic() {
        let k = tensor_product(&sigma_x(), &sigma_z());
        assert_eq!(k[(0, 2)], r(1.0));
        assert_eq!(tensor_product(&identity(2), &identity(2)), identity(4));
    }

    #[test]
    fn partial_trace_of_product_and_singlet() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random::density(2, &mut rng);
        let b = random::density(3, &mut rng);
        let ab = a.tensor(&b);
        assert!((trace(ab.matrix()).re - 1.0).abs() < 1e-12);
        let ra = partial_trace(&ab, &[2, 3], 0).unwrap();
        let rb = partial_trace(&ab, &[2, 3], 1).unwrap();
        assert!(close(ra.matrix(), a.matrix(), 1e-12));
        assert!(close(rb.matrix(), b.matrix(), 1e-12));

        let s = FRAC_1_SQRT_2;
        let singlet = StateVector::from_slice(&[r(0.0), r(-s), r(s), r(0.0)]).unwrap();
        let marg = partial_trace(&DensityMatrix::pure(&singlet), &[2, 2], 0).unwrap();
        assert!(close(marg.matrix(), &(identity(2) * r(0.5)), 1e-12));

        assert!(matches!(partial_trace(&ab, &[2, 2], 0), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn random_bipartite_partial_trace_has_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random::density(6, &mut rng);
        for keep in 0..2 {
            let red = partial_trace(&rho, &[2, 3], keep).unwrap();
            assert!((trace(red.matrix()).re - 1.0).abs() < 1e-12);
            assert!(red.hermitian().min_eigenvalue() > -1e-12);
        }
    }

    #[test]
    fn expectations() {
        let zero = DensityMatrix::pure(&StateVector::basis(2, 0));
        assert_eq!(expect(&zero, &Hermitian::pauli_z()).unwrap(), 1.0);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_eq!(expect(&mixed, &Hermitian::pauli_x()).unwrap(), 0.0);
        let u = BlochVector::new(0.3, -0.4, 0.5).unwrap();
        let v = [0.2, 0.7, -0.1];
        let got = expect(&density_from_bloch(&u).unwrap(), &Hermitian::pauli_dot(v)).unwrap();
        assert!((got - (0.3 * 0.2 - 0.4 * 0.7 - 0.5 * 0.1)).abs() < 1e-14);
    }

    #[test]
    fn bloch_round_trip_and_polar_form() {
        let north = density_from_bloch(&BlochVector::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        assert!(close(north.matrix(), &StateVector::basis(2, 0).projector().into_matrix(), 1e-15));
        let centre = density_from_bloch(&BlochVector::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(close(centre.matrix(), DensityMatrix::maximally_mixed(2).matrix(), 1e-15));

        let (th, ph) = (0.7, 1.9);
        let rho = density_from_bloch(&BlochVector::from_polar(th, ph)).unwrap();
        let (ch, sh) = ((th / 2.0).cos(), (th / 2.0).sin());
        assert!((rho.matrix()[(0, 0)] - r(ch * ch)).norm() < 1e-12);
        assert!((rho.matrix()[(0, 1)] - C64::from_polar(ch * sh, -ph)).norm() < 1e-12);
        assert!((rho.matrix()[(1, 1)] - r(sh * sh)).norm() < 1e-12);
        let back = bloch_from_density(&rho).unwrap();
        assert!(back.is_pure());
        assert!((back.x - th.sin() * ph.cos()).abs() < 1e-12);

        assert!(matches!(BlochVector::new(1.0, 1.0, 0.0), Err(Error::BlochNormExceeded(_))));
    }

    #[test]
    fn spin_one_coherent_state() {
        assert_eq!(symmetric_basis(2).ncols(), 3);
        let s = FRAC_1_SQRT_2;
        let psi = StateVector::from_slice(&[r(s), r(s)]).unwrap();
        let coh = spin_j_coherent(&psi, 2).unwrap();
        let expected = [0.5, s, 0.5];
        for (a, e) in coh.vector().iter().zip(expected) {
            assert!((a - r(e)).norm() < 1e-12);
        }
        // explicit tensor power projected onto the symmetric basis
        let full = psi.tensor(&psi);
        let proj = symmetric_basis(2).adjoint() * full.vector();
        assert!((proj - coh.vector()).norm() < 1e-12);

        let up = spin_j_coherent(&StateVector::basis(2, 0), 5).unwrap();
        assert_eq!(up.vector()[0], r(1.0));
    }

    #[test]
    fn evolution_rotates_bloch_vector_about_z() {
        let rho = density_from_bloch(&BlochVector::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(evolve(&rho, &Hermitian::pauli_z(), 0.0).unwrap().matrix(), rho.matrix());
        // e^{-iσ_z t} rotates by angle 2t about z
        let t = PI / 4.0;
        let b = bloch_from_density(&evolve(&rho, &Hermitian::pauli_z(), t).unwrap()).unwrap();
        assert!((b.x - (2.0 * t).cos()).abs() < 1e-12);
        assert!((b.y - (2.0 * t).sin()).abs() < 1e-12);
    }

    #[test]
    fn jordan_and_commutator() {
        let comm = commutator(&sigma_x(), &sigma_y());
        assert!(close(&comm, &(sigma_z() * (I * 2.0)), 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random::hermitian(3, &mut rng);
        let aa = jordan_product(&a, &a);
        assert!(close(aa.matrix(), &(a.matrix() * a.matrix()), 1e-12));
        assert!(frobenius(&commutator(a.matrix(), a.matrix())) < 1e-15);
    }

    #[test]
    fn superposition_differs_from_mixture() {
        let s = FRAC_1_SQRT_2;
        let plus = StateVector::from_slice(&[r(s), r(s)]).unwrap();
        let minus = StateVector::from_slice(&[r(s), r(-s)]).unwrap();
        let sup = DensityMatrix::pure(&plus);
        let mix = DensityMatrix::maximally_mixed(2);
        for basis in [0, 1] {
            let p = StateVector::basis(2, basis).projector();
            assert!((expect(&sup, &p).unwrap() - expect(&mix, &p).unwrap()).abs() < 1e-15);
        }
        assert!((expect(&sup, &plus.projector()).unwrap() - 1.0).abs() < 1e-15);
        assert!(expect(&sup, &minus.projector()).unwrap().abs() < 1e-15);
        assert!((expect(&mix, &plus.projector()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityMatrix::new(identity(2)),
            Err(Error::BadTrace(_))
        ));
        let bad = CMatrix::from_row_slice(2, 2, &[r(1.5), r(0.0), r(0.0), r(-0.5)]);
        assert!(matches!(DensityMatrix::new(bad), Err(Error::NotPsd(_))));
        assert!(matches!(Hermitian::new(identity(65)), Err(Error::DimTooLarge(65))));
    }
}
