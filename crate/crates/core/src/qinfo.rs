//! Quantum score, quantum and classical Fisher information, and the bounds
//! that relate them.
//!
//! A [`ParametricModel`] maps `θ ∈ R^k` to a density matrix. The symmetric
//! logarithmic derivative (SLD) `L_j` solves `ρ_{/j} = ½(ρL_j + L_jρ)`; it is
//! computed in the eigenbasis of `ρ`, where the equation is diagonal:
//! `(L_j)_{ab} = 2(ρ_{/j})_{ab} / (p_a + p_b)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{distribution, from_observable, Povm, Pprom};
use crate::qcore::{frobenius, r, trace, CMatrix, DensityMatrix, Hermitian};
use crate::random;

/// Finite-difference step for `ρ_{/θ}`.
pub const FD_STEP: f64 = 1e-5;
/// Finite-difference step for the derivative of the SLD.
pub const FD_STEP_SLD: f64 = 1e-3;
/// `p_a + p_b` below this is treated as the joint null space of `ρ`.
pub const TOL_NULL: f64 = 1e-12;
/// Outcomes with probability below this are left out of Fisher sums.
pub const TOL_P: f64 = 1e-12;
/// Residual threshold for the Braunstein-Caves equality condition.
pub const TOL_ATTAIN: f64 = 1e-7;

type StateFn = dyn Fn(&[f64]) -> DensityMatrix + Send + Sync;
type DerivFn = dyn Fn(&[f64], usize) -> CMatrix + Send + Sync;

/// `θ ↦ ρ(θ)` with analytic or finite-difference derivatives.
#[derive(Clone)]
pub struct ParametricModel {
    dim_param: usize,
    state: Arc<StateFn>,
    derivative: Option<Arc<DerivFn>>,
    step: f64,
}

impl std::fmt::Debug for ParametricModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametricModel")
            .field("dim_param", &self.dim_param)
            .field("analytic_derivative", &self.derivative.is_some())
            .field("step", &self.step)
            .finish()
    }
}

impl ParametricModel {
    /// Model with central finite-difference derivatives.
    pub fn new(dim_param: usize, state: impl Fn(&[f64]) -> DensityMatrix + Send + Sync + 'static) -> Self {
        ParametricModel { dim_param, state: Arc::new(state), derivative: None, step: FD_STEP }
    }

    /// Attaches an analytic derivative `(θ, j) ↦ ∂ρ/∂θ_j`.
    pub fn with_derivative(
        mut self,
        deriv: impl Fn(&[f64], usize) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(deriv));
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step = h;
        self
    }

    pub fn dim_param(&self) -> usize {
        self.dim_param
    }

    pub fn state(&self, theta: &[f64]) -> DensityMatrix {
        (self.state)(theta)
    }

    pub fn dim(&self) -> usize {
        let zero = vec![0.0; self.dim_param];
        self.state(&zero).dim()
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// `∂ρ/∂θ_j`, analytic if available.
    pub fn derivative(&self, theta: &[f64], j: usize) -> CMatrix {
        match &self.derivative {
            Some(d) => d(theta, j),
            None => self.finite_difference(theta, j),
        }
    }

    pub fn finite_difference(&self, theta: &[f64], j: usize) -> CMatrix {
        let mut up = theta.to_vec();
        let mut down = theta.to_vec();
        up[j] += self.step;
        down[j] -= self.step;
        (self.state(&up).matrix() - self.state(&down).matrix()) * r(0.5 / self.step)
    }

    /// Largest Frobenius gap between analytic and finite-difference derivatives.
    pub fn derivative_consistency(&self, theta: &[f64]) -> Option<f64> {
        self.derivative.as_ref()?;
        Some(
            (0..self.dim_param)
                .map(|j| frobenius(&(self.derivative(theta, j) - self.finite_difference(theta, j))))
                .fold(0.0, f64::max),
        )
    }

    /// Model of `n` independent copies, `ρ(θ)^{⊗n}`.
    pub fn tensor_power(&self, n: usize) -> ParametricModel {
        let base = self.clone();
        let state = move |t: &[f64]| crate::qcore::tensor_power(&base.state(t), n);
        let mut out = ParametricModel::new(self.dim_param, state).with_step(self.step);
        if self.derivative.is_some() {
            let base = self.clone();
            out = out.with_derivative(move |t, j| {
                let rho = base.state(t).matrix().clone();
                let d = base.derivative(t, j);
                // product rule over the n factors
                let mut total: Option<CMatrix> = None;
                for slot in 0..n {
                    let mut acc: Option<CMatrix> = None;
                    for f in 0..n {
                        let factor = if f == slot { &d } else { &rho };
                        acc = Some(match acc {
                            None => factor.clone(),
                            Some(a) => a.kronecker(factor),
                        });
                    }
                    let term = acc.expect("n >= 1");
                    total = Some(match total {
                        None => term,
                        Some(t) => t + term,
                    });
                }
                total.expect("n >= 1")
            });
        }
        out
    }
}

/// Symmetric logarithmic derivatives, one per parameter.
#[derive(Debug, Clone)]
pub struct SldOperator {
    pub ops: Vec<Hermitian>,
    /// `max_j ‖ρ∘L_j − ρ_{/j}‖_F`
    pub residual: f64,
}

/// Solves `ρ_{/θ_j} = ρ∘L_j` in the eigenbasis of `ρ`. Entries in the joint
/// null space (`p_a + p_b ≤ TOL_NULL`) are set to zero.
pub fn sld(model: &ParametricModel, theta: &[f64]) -> Result<SldOperator> {
    let rho = model.state(theta);
    let derivs: Vec<CMatrix> = (0..model.dim_param()).map(|j| model.derivative(theta, j)).collect();
    sld_from_parts(&rho, &derivs)
}

pub(crate) fn sld_from_parts(rho: &DensityMatrix, derivs: &[CMatrix]) -> Result<SldOperator> {
    let eig = rho.eig();
    let v = &eig.vectors;
    let p = &eig.values;
    let d = rho.dim();
    let mut ops = Vec::with_capacity(derivs.len());
    let mut residual = 0.0f64;
    for dr in derivs {
        let local = v.adjoint() * dr * v;
        let l_local = CMatrix::from_fn(d, d, |a, b| {
            let s = p[a] + p[b];
            if s > TOL_NULL {
                local[(a, b)] * r(2.0 / s)
            } else {
                r(0.0)
            }
        });
        let l = Hermitian::from_raw(v * l_local * v.adjoint());
        let jordan = (rho.matrix() * l.matrix() + l.matrix() * rho.matrix()) * r(0.5);
        residual = residual.max(frobenius(&(jordan - dr)));
        ops.push(l);
    }
    if residual > 1e-8 {
        return Err(Error::SldResidual(residual));
    }
    Ok(SldOperator { ops, residual })
}

fn info_from_sld(rho: &DensityMatrix, sld: &SldOperator) -> DMatrix<f64> {
    let k = sld.ops.len();
    DMatrix::from_fn(k, k, |a, b| {
        let la = sld.ops[a].matrix();
        let lb = sld.ops[b].matrix();
        let t = trace(&(la * rho.matrix() * lb)) + trace(&(lb * rho.matrix() * la));
        0.5 * t.re
    })
}

/// Quantum Fisher information `I_{jk} = ½ tr{L_j ρ L_k + L_k ρ L_j}`.
pub fn quantum_fisher(model: &ParametricModel, theta: &[f64]) -> Result<DMatrix<f64>> {
    let rho = model.state(theta);
    let s = sld(model, theta)?;
    Ok(info_from_sld(&rho, &s))
}

/// Observable quantum information `J = −∂L/∂θ` (one parameter) by central
/// differences of the SLD with step [`FD_STEP_SLD`].
pub fn observable_qinfo(model: &ParametricModel, theta: f64) -> Result<Hermitian> {
    if model.dim_param() != 1 {
        return Err(Error::Invalid("observable information needs a one-parameter model".into()));
    }
    let up = sld(model, &[theta + FD_STEP_SLD])?;
    let down = sld(model, &[theta - FD_STEP_SLD])?;
    let j = (down.ops[0].matrix() - up.ops[0].matrix()) * r(0.5 / FD_STEP_SLD);
    Ok(Hermitian::from_raw(j))
}

/// Fisher information of the outcome of `m`:
/// `i_{rs} = Σ_{p > TOL_P} ∂_r p ∂_s p / p`.
pub fn classical_fisher(model: &ParametricModel, theta: &[f64], m: &Povm) -> Result<DMatrix<f64>> {
    let rho = model.state(theta);
    let derivs: Vec<CMatrix> = (0..model.dim_param()).map(|j| model.derivative(theta, j)).collect();
    let p = distribution(&rho, m)?;
    let k = model.dim_param();
    let mut info = DMatrix::zeros(k, k);
    for (x, e) in m.elements().iter().enumerate() {
        let px = p.probs[x];
        if px <= TOL_P {
            continue;
        }
        let dp: Vec<f64> = derivs.iter().map(|d| trace(&(d * e.matrix())).re).collect();
        for a in 0..k {
            for b in 0..k {
                info[(a, b)] += dp[a] * dp[b] / px;
            }
        }
    }
    Ok(info)
}

/// Same quantity through the score: `∂_r p = Re tr{ρ L_r m(x)}`.
pub fn classical_fisher_sld_form(model: &ParametricModel, theta: &[f64], m: &Povm) -> Result<DMatrix<f64>> {
    let rho = model.state(theta);
    let s = sld(model, theta)?;
    let p = distribution(&rho, m)?;
    let k = model.dim_param();
    let mut info = DMatrix::zeros(k, k);
    for (x, e) in m.elements().iter().enumerate() {
        let px = p.probs[x];
        if px <= TOL_P {
            continue;
        }
        let dp: Vec<f64> = s
            .ops
            .iter()
            .map(|l| trace(&(rho.matrix() * l.matrix() * e.matrix())).re)
            .collect();
        for a in 0..k {
            for b in 0..k {
                info[(a, b)] += dp[a] * dp[b] / px;
            }
        }
    }
    Ok(info)
}

/// Simple measurement of the SLD at `θ` (one parameter).
pub fn optimal_measurement(model: &ParametricModel, theta: f64) -> Result<Pprom> {
    if model.dim_param() != 1 {
        return Err(Error::Invalid("optimal measurement needs a one-parameter model".into()));
    }
    let s = sld(model, &[theta])?;
    Ok(from_observable(&s.ops[0]).0)
}

/// Outcome of a Braunstein-Caves audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfoReport {
    pub theta: Vec<f64>,
    #[serde(rename = "I")]
    pub quantum: Vec<Vec<f64>>,
    #[serde(rename = "i")]
    pub classical: Vec<Vec<f64>>,
    pub gap_min_eig: f64,
    pub attained: bool,
    /// Largest `‖A(x) − r(x)B(x)‖_F` over outcomes and parameters, with
    /// `A = m^{1/2} L ρ^{1/2}`, `B = m^{1/2} ρ^{1/2}` and `r` the real
    /// least-squares coefficient.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub equality_residual: Option<f64>,
    /// One-parameter chain `i ≤ Σ|z|²/p ≤ Σ_{p>0} tr(mLρL) ≤ I`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chain: Option<[f64; 4]>,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn min_sym_eig(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Compares `i(θ;M)` with `I(θ)` and evaluates the equality condition.
pub fn bc_audit(model: &ParametricModel, theta: &[f64], m: &Povm) -> Result<InfoReport> {
    let rho = model.state(theta);
    let s = sld(model, theta)?;
    let qfi = info_from_sld(&rho, &s);
    let cfi = classical_fisher(model, theta, m)?;
    let gap_min_eig = min_sym_eig(&(&qfi - &cfi));

    let rho_half = rho.sqrt();
    // eigenvalues at rounding level would turn into ~1e-8 after the root
    let roots: Vec<Hermitian> =
        m.elements().iter().map(|e| e.map_spectrum(|x| if x > TOL_P { x.sqrt() } else { 0.0 })).collect();
    let mut residual = 0.0f64;
    for l in &s.ops {
        for root in &roots {
            let b = root.matrix() * rho_half.matrix();
            let a = root.matrix() * l.matrix() * rho_half.matrix();
            let bb = trace(&(b.adjoint() * &b)).re;
            let coef = if bb > TOL_P { trace(&(b.adjoint() * &a)).re / bb } else { 0.0 };
            residual = residual.max(frobenius(&(a - b * r(coef))));
        }
    }

    let chain = if model.dim_param() == 1 {
        let l = s.ops[0].matrix();
        let (mut re2, mut abs2, mut plus, mut all) = (0.0, 0.0, 0.0, 0.0);
        for e in m.elements() {
            let p = trace(&(rho.matrix() * e.matrix())).re;
            let z = trace(&(rho.matrix() * l * e.matrix()));
            let t = trace(&(e.matrix() * l * rho.matrix() * l)).re;
            all += t;
            if p > TOL_P {
                re2 += z.re * z.re / p;
                abs2 += z.norm_sqr() / p;
                plus += t;
            }
        }
        debug_assert!(all >= plus - 1e-12);
        Some([re2, abs2, plus, all])
    } else {
        None
    };

    Ok(InfoReport {
        theta: theta.to_vec(),
        quantum: to_rows(&qfi),
        classical: to_rows(&cfi),
        gap_min_eig,
        attained: residual < TOL_ATTAIN,
        equality_residual: Some(residual),
        chain,
    })
}

/// Helstrom bound `I(θ)^{-1}`.
pub fn helstrom_bound(model: &ParametricModel, theta: &[f64]) -> Result<DMatrix<f64>> {
    let qfi = quantum_fisher(model, theta)?;
    if min_sym_eig(&qfi) < 1e-10 {
        return Err(Error::SingularInformation);
    }
    qfi.try_inverse().ok_or(Error::SingularInformation)
}

/// `tr{I(θ)^{-1} i_n(θ;M)/n}` for a measurement `M` on `n` copies.
pub fn gill_massar_check(model: &ParametricModel, theta: &[f64], m: &Povm, n: usize) -> Result<f64> {
    let inv = helstrom_bound(model, theta)?;
    let product = model.tensor_power(n);
    let info = classical_fisher(&product, theta, m)?;
    Ok((inv * info).trace() / n as f64)
}

/// Randomized spin-half measurement achieving a target information matrix
/// that is diagonal in the frame where the SLDs are mutually orthogonal in the
/// QFI metric. `weights[j] ≥ 0` with `Σ weights ≤ 1` gives `i = Σ_j w_j I_jj e_j e_jᵀ`
/// when `I` is diagonal; the returned POVM mixes the SLD measurements.
pub fn gill_massar_constructor(model: &ParametricModel, theta: &[f64], weights: &[f64]) -> Result<Povm> {
    let s = sld(model, theta)?;
    if weights.len() != s.ops.len() {
        return Err(Error::DimMismatch("one weight per parameter".into()));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| *w < 0.0) || total > 1.0 + 1e-12 {
        return Err(Error::OutOfRange("weights must be nonnegative with sum at most 1".into()));
    }
    let d = model.dim();
    let mut labels = Vec::new();
    let mut elements = Vec::new();
    for (j, (l, &w)) in s.ops.iter().zip(weights).enumerate() {
        let (pm, _) = from_observable(l);
        for (lab, e) in pm.povm().labels().iter().zip(pm.povm().elements()) {
            labels.push(format!("{j}:{lab}"));
            elements.push(e.scale(w));
        }
    }
    if total < 1.0 {
        labels.push("idle".into());
        elements.push(Hermitian::identity(d).scale(1.0 - total));
    }
    Povm::with_labels(labels, elements)
}

/// Outcome of one adaptive two-stage run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdaptiveRun {
    pub theta: f64,
    pub preliminary: f64,
    pub estimate: f64,
    pub stage1: usize,
    pub stage2: usize,
    pub scaled_sq_error: f64,
    pub newton_iters: usize,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Two-stage adaptive estimation on the spin-half circle of colatitude `eta`.
///
/// Stage one spends `⌈n^0.7⌉` copies, alternating `σ_x` and `σ_y`, to get
/// `θ̃ = atan2(ȳ, x̄)`. Stage two measures the SLD at `θ̃` on every remaining
/// copy and the estimate is the maximum-likelihood `θ` from those outcomes,
/// found by Newton iterations from `θ̃`.
pub fn adaptive_two_stage<R: Rng + ?Sized>(theta: f64, eta: f64, n: usize, rng: &mut R) -> Result<AdaptiveRun> {
    if n < 100 {
        return Err(Error::TooFewSamples(format!("adaptive scheme needs n >= 100, got {n}")));
    }
    let model = crate::qmodels::latitude_model(eta);
    let n1 = ((n as f64).powf(0.7)).ceil() as usize;
    let n2 = n - n1;
    let rho = model.state(&[theta]);

    let spin_mean = |x: &Hermitian, copies: usize, rng: &mut R| -> Result<f64> {
        let p_up = (1.0 + crate::qcore::expect(&rho, x)?) / 2.0;
        let ups = Binomial::new(copies as u64, p_up.clamp(0.0, 1.0))
            .map_err(|e| Error::Invalid(e.to_string()))?
            .sample(rng);
        Ok(2.0 * ups as f64 / copies as f64 - 1.0)
    };
    let nx = n1.div_ceil(2);
    let ny = n1 - nx;
    let mx = spin_mean(&Hermitian::pauli_x(), nx, rng)?;
    let my = spin_mean(&Hermitian::pauli_y(), ny, rng)?;
    let preliminary = my.atan2(mx);

    let pm = optimal_measurement(&model, preliminary)?;
    let up = pm.povm().element(0).clone();
    // p(θ) = tr{ρ(θ)Π} is a + b cos θ + c sin θ for this family
    let prob = |t: f64| crate::qcore::expect(&model.state(&[t]), &up);
    let (p0, p1, p2) = (prob(0.0)?, prob(std::f64::consts::FRAC_PI_2)?, prob(std::f64::consts::PI)?);
    let a = 0.5 * (p0 + p2);
    let b = 0.5 * (p0 - p2);
    let c = p1 - a;
    let p_true = (a + b * theta.cos() + c * theta.sin()).clamp(0.0, 1.0);
    let k = Binomial::new(n2 as u64, p_true)
        .map_err(|e| Error::Invalid(e.to_string()))?
        .sample(rng) as f64;
    let nf = n2 as f64;

    let mut t = preliminary;
    let mut iters = 0;
    for it in 0..50 {
        iters = it + 1;
        let p = (a + b * t.cos() + c * t.sin()).clamp(1e-12, 1.0 - 1e-12);
        let dp = -b * t.sin() + c * t.cos();
        let d2p = -b * t.cos() - c * t.sin();
        let score = dp * (k / p - (nf - k) / (1.0 - p));
        let hess = d2p * (k / p - (nf - k) / (1.0 - p)) - dp * dp * (k / (p * p) + (nf - k) / ((1.0 - p) * (1.0 - p)));
        let curvature = if hess < 0.0 { hess } else { -nf * dp * dp / (p * (1.0 - p)) - 1e-12 };
        let step = (-score / curvature).clamp(-0.5, 0.5);
        t += step;
        if step.abs() < 1e-10 {
            break;
        }
    }
    let estimate = wrap_angle(t);
    let err = wrap_angle(estimate - theta);
    Ok(AdaptiveRun {
        theta,
        preliminary,
        estimate,
        stage1: n1,
        stage2: n2,
        scaled_sq_error: n as f64 * err * err,
        newton_iters: iters,
    })
}

/// Monte Carlo summary over replications.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdaptiveSummary {
    pub replications: usize,
    pub mean_scaled_mse: f64,
    pub std_error: f64,
    pub helstrom: f64,
}

/// Runs `reps` independent replications in parallel; replication `i` uses the
/// stream derived from `(seed, i)`, so results do not depend on scheduling.
pub fn adaptive_monte_carlo(theta: f64, eta: f64, n: usize, reps: usize, seed: u64) -> Result<AdaptiveSummary> {
    let runs: Vec<Result<AdaptiveRun>> = (0..reps)
        .into_par_iter()
        .map(|i| adaptive_two_stage(theta, eta, n, &mut random::stream(seed, i as u64)))
        .collect();
    let errs: Vec<f64> = runs.into_iter().map(|r| r.map(|x| x.scaled_sq_error)).collect::<Result<_>>()?;
    let mean = errs.iter().sum::<f64>() / reps as f64;
    let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps.max(2) - 1) as f64;
    let model = crate::qmodels::latitude_model(eta);
    let helstrom = helstrom_bound(&model, &[theta])?[(0, 0)];
    Ok(AdaptiveSummary {
        replications: reps,
        mean_scaled_mse: mean,
        std_error: (var / reps as f64).sqrt(),
        helstrom,
    })
}
