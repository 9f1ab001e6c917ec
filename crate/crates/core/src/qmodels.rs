//! Quantum exponential models (mechanical, symmetric and unitary type),
//! transformation models under a circle action, and the spin-half great circle.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Povm;
use crate::qcore::{
    commutator, frobenius, identity, r, sigma_x, sigma_y, sigma_z, spin_j_coherent, trace, CMatrix,
    DensityMatrix, Hermitian, C64,
};
use crate::qinfo::ParametricModel;
use crate::random;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpKind {
    /// `e^{−κ} exp{T₀ + θ·T}` with all generators commuting.
    Mechanical,
    /// `e^{−κ} e^{θ·T/2} ρ₀ e^{θ·T/2}`
    Symmetric,
    /// `e^{−iθ·T/2} ρ₀ e^{iθ·T/2}`
    Unitary,
}

/// Quantum exponential model. For the mechanical kind `base` holds `T₀`;
/// otherwise it is the positive operator `ρ₀`.
#[derive(Debug, Clone)]
pub struct ExpModelSpec {
    kind: ExpKind,
    base: Hermitian,
    generators: Vec<Hermitian>,
}

impl ExpModelSpec {
    pub fn new(kind: ExpKind, base: Hermitian, generators: Vec<Hermitian>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Invalid("an exponential model needs at least one generator".into()));
        }
        let d = base.dim();
        if generators.iter().any(|t| t.dim() != d) {
            return Err(Error::DimMismatch("generators must match the base dimension".into()));
        }
        match kind {
            ExpKind::Mechanical => {
                let all: Vec<&Hermitian> = std::iter::once(&base).chain(&generators).collect();
                let mut worst = 0.0f64;
                for (i, a) in all.iter().enumerate() {
                    for b in &all[i + 1..] {
                        worst = worst.max(frobenius(&commutator(a.matrix(), b.matrix())));
                    }
                }
                if worst > 1e-9 {
                    return Err(Error::NonCommuting(worst));
                }
            }
            ExpKind::Symmetric | ExpKind::Unitary => {
                let min = base.min_eigenvalue();
                if min < -1e-10 {
                    return Err(Error::NotPsd(min));
                }
                if trace(base.matrix()).re <= 0.0 {
                    return Err(Error::BadTrace(trace(base.matrix()).re));
                }
            }
        }
        Ok(ExpModelSpec { kind, base, generators })
    }

    pub fn kind(&self) -> ExpKind {
        self.kind
    }

    pub fn base(&self) -> &Hermitian {
        &self.base
    }

    pub fn generators(&self) -> &[Hermitian] {
        &self.generators
    }

    pub fn dim_param(&self) -> usize {
        self.generators.len()
    }

    fn combination(&self, theta: &[f64]) -> Hermitian {
        let d = self.base.dim();
        let m = self
            .generators
            .iter()
            .zip(theta)
            .fold(CMatrix::zeros(d, d), |acc, (t, &x)| acc + t.matrix() * r(x));
        Hermitian::from_raw(m)
    }

    fn unnormalized(&self, theta: &[f64]) -> CMatrix {
        let t = self.combination(theta);
        match self.kind {
            ExpKind::Mechanical => (&self.base + &t).map_spectrum(f64::exp).into_matrix(),
            ExpKind::Symmetric => {
                let half = t.map_spectrum(|x| (0.5 * x).exp());
                half.matrix() * self.base.matrix() * half.matrix()
            }
            ExpKind::Unitary => {
                let u = t.exp_i(-0.5);
                let rho0 = self.base.matrix() / r(trace(self.base.matrix()).re);
                &u * rho0 * u.adjoint()
            }
        }
    }

    /// Log norming constant `κ(θ)`; identically zero for the unitary kind.
    pub fn kappa(&self, theta: &[f64]) -> f64 {
        match self.kind {
            ExpKind::Unitary => 0.0,
            _ => trace(&self.unnormalized(theta)).re.ln(),
        }
    }

    pub fn state(&self, theta: &[f64]) -> Result<DensityMatrix> {
        if theta.len() != self.dim_param() {
            return Err(Error::DimMismatch(format!(
                "{} parameters for {} generators",
                theta.len(),
                self.dim_param()
            )));
        }
        let m = self.unnormalized(theta);
        let k = trace(&m).re;
        DensityMatrix::new(m / r(k))
    }

    pub fn model(&self) -> ParametricModel {
        let spec = self.clone();
        ParametricModel::new(self.dim_param(), move |t| {
            spec.state(t).expect("exponential model state is valid")
        })
    }
}

/// `exp_model_state` entry point.
pub fn exp_model_state(spec: &ExpModelSpec, theta: &[f64]) -> Result<DensityMatrix> {
    spec.state(theta)
}

/// Spin-half circle of colatitude `eta`:
/// `ρ(θ) = ½(1 + sinη cosθ σ_x + sinη sinθ σ_y + cosη σ_z)`.
pub fn latitude_model(eta: f64) -> ParametricModel {
    let (s, c) = (eta.sin(), eta.cos());
    ParametricModel::new(1, move |t| {
        let m = (identity(2) + sigma_x() * r(s * t[0].cos()) + sigma_y() * r(s * t[0].sin()) + sigma_z() * r(c))
            * r(0.5);
        DensityMatrix::from_raw(m)
    })
    .with_derivative(move |t, _| (sigma_x() * r(-s * t[0].sin()) + sigma_y() * r(s * t[0].cos())) * r(0.5))
}

/// `ρ(θ) = U ½(1 + cosθ σ_x + sinθ σ_y) U*` for a 2×2 unitary `U`.
pub fn great_circle_model(u: CMatrix) -> ParametricModel {
    let u2 = u.clone();
    ParametricModel::new(1, move |t| {
        let m = (identity(2) + sigma_x() * r(t[0].cos()) + sigma_y() * r(t[0].sin())) * r(0.5);
        DensityMatrix::from_raw(&u * m * u.adjoint())
    })
    .with_derivative(move |t, _| {
        let m = (sigma_x() * r(-t[0].sin()) + sigma_y() * r(t[0].cos())) * r(0.5);
        &u2 * m * u2.adjoint()
    })
}

/// The great circle as a unitary-type exponential model: `T = Uσ_zU*`,
/// `ρ₀ = U½(1 + σ_x)U*`.
pub fn great_circle_unitary_spec(u: &CMatrix) -> ExpModelSpec {
    let t = Hermitian::from_raw(u * sigma_z() * u.adjoint());
    let rho0 = Hermitian::from_raw(u * (identity(2) + sigma_x()) * r(0.5) * u.adjoint());
    ExpModelSpec::new(ExpKind::Unitary, rho0, vec![t]).expect("valid unitary spec")
}

/// The great circle reparameterized as a symmetric-type model with generator
/// `Uσ_yU*` and base `U½(1 + σ_x)U*`. Parameter `s` corresponds to the angle
/// `θ = gd(s) = atan(sinh s)` on the open half circle `(−π/2, π/2)`.
pub fn great_circle_symmetric_spec(u: &CMatrix) -> ExpModelSpec {
    let t = Hermitian::from_raw(u * sigma_y() * u.adjoint());
    let rho0 = Hermitian::from_raw(u * (identity(2) + sigma_x()) * r(0.5) * u.adjoint());
    ExpModelSpec::new(ExpKind::Symmetric, rho0, vec![t]).expect("valid symmetric spec")
}

/// Gudermannian: great-circle angle of the symmetric-type parameter.
pub fn gudermannian(s: f64) -> f64 {
    s.sinh().atan()
}

/// Pure qubit with Bloch colatitude `θ₀` and azimuth `θ₁`.
pub fn bloch_pure_model() -> ParametricModel {
    let vec_at = |t: &[f64]| {
        crate::qcore::CVector::from_column_slice(&[
            r((t[0] / 2.0).cos()),
            C64::from_polar((t[0] / 2.0).sin(), t[1]),
        ])
    };
    ParametricModel::new(2, move |t| DensityMatrix::pure(&crate::qcore::StateVector::normalized(vec_at(t)).unwrap()))
        .with_derivative(move |t, j| {
            let v = vec_at(t);
            let dv = if j == 0 {
                crate::qcore::CVector::from_column_slice(&[
                    r(-0.5 * (t[0] / 2.0).sin()),
                    C64::from_polar(0.5 * (t[0] / 2.0).cos(), t[1]),
                ])
            } else {
                crate::qcore::CVector::from_column_slice(&[r(0.0), C64::from_polar((t[0] / 2.0).sin(), t[1]) * crate::qcore::I])
            };
            &dv * v.adjoint() + &v * dv.adjoint()
        })
}

/// `ρ(θ) = e^{−iθH} ρ₀ e^{iθH}` with random full-rank `ρ₀` and Hermitian `H`.
pub fn random_unitary_model<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ParametricModel {
    let rho0 = random::density(d, rng);
    let h = random::hermitian(d, rng);
    ParametricModel::new(1, move |t| {
        crate::qcore::evolve(&rho0, &h, t[0]).expect("dims match")
    })
}

/// `ρ(θ) ∝ G(θ)G(θ)*` with `G(θ) = G₀ + θG₁` for random Ginibre `G₀, G₁`;
/// generically full rank with both eigenvalues and eigenvectors moving.
pub fn random_full_rank_model<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ParametricModel {
    let g0 = random::ginibre(d, d, rng);
    let g1 = random::ginibre(d, d, rng);
    ParametricModel::new(1, move |t| {
        let g = &g0 + &g1 * r(t[0]);
        DensityMatrix::normalize(&g * g.adjoint()).expect("full rank")
    })
}

type ParamMap = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// Action of the circle group: elements are angles, composition is addition.
#[derive(Clone)]
pub struct GroupAction {
    elements: Vec<f64>,
    unitary: Arc<dyn Fn(f64) -> CMatrix + Send + Sync>,
    on_param: Arc<ParamMap>,
    /// Index of `g⁻¹x` for outcome index `x`.
    on_outcome_inverse: Arc<dyn Fn(f64, usize) -> usize + Send + Sync>,
}

impl std::fmt::Debug for GroupAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupAction").field("elements", &self.elements).finish()
    }
}

impl GroupAction {
    pub fn new(
        elements: Vec<f64>,
        unitary: impl Fn(f64) -> CMatrix + Send + Sync + 'static,
        on_param: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        on_outcome_inverse: impl Fn(f64, usize) -> usize + Send + Sync + 'static,
    ) -> Self {
        GroupAction {
            elements,
            unitary: Arc::new(unitary),
            on_param: Arc::new(on_param),
            on_outcome_inverse: Arc::new(on_outcome_inverse),
        }
    }

    /// The group `{e}`.
    pub fn trivial(d: usize) -> Self {
        GroupAction::new(vec![0.0], move |_| identity(d), |_, t| t.to_vec(), |_, x| x)
    }

    /// Spin-half circle action `U_φ = diag(e^{iφ/2}, e^{−iφ/2})`, `gθ = θ + g`,
    /// on outcomes gridded at `grid` points, with group elements the multiples
    /// of `2π/grid` listed in `steps`.
    pub fn qubit_circle(grid: usize, steps: &[usize]) -> Self {
        let dphi = 2.0 * PI / grid as f64;
        let elements = steps.iter().map(|&k| k as f64 * dphi).collect();
        GroupAction::new(
            elements,
            |g| {
                CMatrix::from_row_slice(2, 2, &[C64::from_polar(1.0, g / 2.0), r(0.0), r(0.0), C64::from_polar(1.0, -g / 2.0)])
            },
            |g, t| vec![t[0] + g],
            move |g, x| {
                let k = (g / dphi).round() as i64;
                (x as i64 - k).rem_euclid(grid as i64) as usize
            },
        )
    }

    pub fn elements(&self) -> &[f64] {
        &self.elements
    }

    pub fn unitary(&self, g: f64) -> CMatrix {
        (self.unitary)(g)
    }

    /// Largest violation of `U_{g+h} = w U_g U_h` with `|w| = 1`.
    pub fn projective_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for &g in &self.elements {
            for &h in &self.elements {
                let ugh = self.unitary(g + h);
                let prod = self.unitary(g) * self.unitary(h);
                let d = ugh.nrows() as f64;
                let w = trace(&(prod.adjoint() * &ugh)) / r(d);
                worst = worst.max((w.norm() - 1.0).abs());
                worst = worst.max(frobenius(&(ugh - prod * w)));
            }
        }
        worst
    }
}

/// Result of a transformation-model consistency check.
#[derive(Debug, Clone, Copy)]
pub struct TransformationReport {
    pub consistent: bool,
    pub max_violation: f64,
}

/// Checks `tr{ρ(θ)M(A)} = tr{ρ(gθ)M(g⁻¹A)}` on singleton outcome sets over
/// `theta_grid × group × outcomes`.
pub fn transformation_check(
    model: &ParametricModel,
    m: &Povm,
    action: &GroupAction,
    theta_grid: &[Vec<f64>],
) -> Result<TransformationReport> {
    let mut worst = 0.0f64;
    for theta in theta_grid {
        let p = crate::measure::distribution(&model.state(theta), m)?;
        for &g in action.elements() {
            let moved = model.state(&(action.on_param)(g, theta));
            for x in 0..m.len() {
                let y = (action.on_outcome_inverse)(g, x);
                let q = trace(&(moved.matrix() * m.element(y).matrix())).re;
                worst = worst.max((p.probs[x] - q).abs());
            }
        }
    }
    Ok(TransformationReport { consistent: worst < 1e-8, max_violation: worst })
}

/// Equivariant spin-half measurement on a `grid`-point discretization of the
/// circle: element `j` is `m(φ_j)/grid` with
/// `m(φ) = [[1, a e^{iφ}], [ā e^{−iφ}, 1]]`.
pub fn equivariant_qubit_family(a: C64, grid: usize) -> Result<Povm> {
    if a.norm() > 1.0 + 1e-12 {
        return Err(Error::OutOfRange(format!("|a| = {} exceeds 1", a.norm())));
    }
    if grid < 3 {
        return Err(Error::OutOfRange("grid needs at least 3 points".into()));
    }
    let elements = (0..grid)
        .map(|j| {
            let phi = 2.0 * PI * j as f64 / grid as f64;
            let off = a * C64::from_polar(1.0, phi);
            let m = CMatrix::from_row_slice(2, 2, &[r(1.0), off, off.conj(), r(1.0)]);
            Hermitian::from_raw(m / r(grid as f64))
        })
        .collect();
    let labels = (0..grid).map(|j| format!("{}", 2.0 * PI * j as f64 / grid as f64)).collect();
    Povm::with_labels(labels, elements)
}

/// `J = Σ m|m⟩⟨m|` on the symmetric subspace of `n` qubits (`j = n/2`),
/// in the ordering of [`crate::qcore::symmetric_basis`].
pub fn spin_j_operator(n: usize) -> Hermitian {
    let j = n as f64 / 2.0;
    Hermitian::from_real_diagonal(&(0..=n).map(|c| j - c as f64).collect::<Vec<_>>())
}

/// Equivariant spin-j measurement `m(φ) = e^{−iφJ} R₀ e^{iφJ}` gridded at
/// `grid` points (`j ≤ 2`). The caller's `R₀` must make the grid average the
/// identity; this is verified numerically.
pub fn equivariant_spin_j_family(n: usize, r0: &Hermitian, grid: usize) -> Result<Povm> {
    if n == 0 || n > 4 {
        return Err(Error::OutOfRange("spin-j family implemented for 1 <= 2j <= 4".into()));
    }
    if r0.dim() != n + 1 {
        return Err(Error::DimMismatch(format!("R0 must be {}x{}", n + 1, n + 1)));
    }
    if r0.min_eigenvalue() < -1e-10 {
        return Err(Error::NotPsd(r0.min_eigenvalue()));
    }
    let jop = spin_j_operator(n);
    let elements = (0..grid)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / grid as f64;
            let u = jop.exp_i(phi);
            Hermitian::from_raw(u.adjoint() * r0.matrix() * &u / r(grid as f64))
        })
        .collect();
    Povm::new(elements)
}

/// Coherent spin-`n/2` model along the equator: `⊗ⁿ` of the great-circle
/// pure state, expressed on the symmetric subspace.
pub fn coherent_spin_circle(n: usize) -> ParametricModel {
    ParametricModel::new(1, move |t| {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = crate::qcore::StateVector::from_slice(&[r(s), C64::from_polar(s, t[0])]).unwrap();
        DensityMatrix::pure(&spin_j_coherent(&psi, n).unwrap())
    })
}
