//! Truncated harmonic oscillator, quadrature distributions, homodyne
//! sampling, and state reconstruction by maximum likelihood and by the
//! tomographic kernel estimator.
//!
//! Conventions: `A⁻|n⟩ = √n|n−1⟩`, `Q = (A⁻ + A⁺)/√2`, `P = (A⁻ − A⁺)/(i√2)`
//! and `X_φ = cos φ Q + sin φ P = e^{iφN} Q e^{−iφN}`. The density of `X_φ`
//! in state `ρ` is `p(x;φ) = Σ ρ_{mm'} e^{−i(m−m')φ} u_m(x) u_{m'}(x)`.
//!
//! Kernel estimator: with `W_z = exp(i r X_φ)` for `z = r e^{iφ}`,
//! `tr(ρA) = ∫dφ/2π ∫dx p(x;φ) g_A(x,φ)` where
//! `g_A(x,φ) = ∫₀^∞ r tr(A W_z) e^{−irx} dr`. This follows from the Weyl
//! inversion `A = (2π)⁻¹ ∫ r dr dφ tr(A W_z) W_{−z}` and
//! `tr(ρ W_{−z}) = E[e^{−irX_φ}]`. The radial integral is cut at `r_max`
//! and evaluated by Gauss–Legendre quadrature.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{r, trace, CMatrix, DensityMatrix, Hermitian, C64, I};
use crate::random;

/// Extra Fock levels carried when spectra of truncated operators matter.
pub const GUARD_LEVELS: usize = 4;
/// Points in the default quadrature grid.
pub const GRID_POINTS: usize = 2048;

/// Fock space truncated at `n_max` (dimension `n_max + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    n_max: usize,
}

impl FockSpace {
    pub fn new(n_max: usize) -> Self {
        FockSpace { n_max }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// The same space with [`GUARD_LEVELS`] extra levels.
    pub fn guarded(&self) -> FockSpace {
        FockSpace::new(self.n_max + GUARD_LEVELS)
    }

    /// `A⁻`.
    pub fn lower(&self) -> CMatrix {
        let mut a = CMatrix::zeros(self.dim(), self.dim());
        for n in 1..self.dim() {
            a[(n - 1, n)] = r((n as f64).sqrt());
        }
        a
    }

    /// `A⁺`, with the top level mapped to zero.
    pub fn raise(&self) -> CMatrix {
        self.lower().adjoint()
    }

    pub fn number(&self) -> Hermitian {
        Hermitian::from_real_diagonal(&(0..self.dim()).map(|n| n as f64).collect::<Vec<_>>())
    }

    pub fn q(&self) -> Hermitian {
        Hermitian::from_raw((self.lower() + self.raise()) * r(std::f64::consts::FRAC_1_SQRT_2))
    }

    pub fn p(&self) -> Hermitian {
        Hermitian::from_raw((self.lower() - self.raise()) * (-I * std::f64::consts::FRAC_1_SQRT_2))
    }

    /// `X_φ = cos φ Q + sin φ P`.
    pub fn quadrature(&self, phi: f64) -> Hermitian {
        Hermitian::from_raw(self.q().matrix() * r(phi.cos()) + self.p().matrix() * r(phi.sin()))
    }

    /// `e^{iθN}`.
    pub fn rotation(&self, theta: f64) -> CMatrix {
        self.number().exp_i(theta)
    }

    /// Zero-pads an operator given on a smaller truncation.
    pub fn embed(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        let k = m.nrows().min(self.dim());
        out.view_mut((0, 0), (k, k)).copy_from(&m.view((0, 0), (k, k)));
        out
    }

    /// Default grid on `[−x_max, x_max]`, `x_max = √(2 n_max + 6)`.
    pub fn x_grid(&self) -> Vec<f64> {
        let xm = (2.0 * self.n_max as f64 + 6.0).sqrt();
        linspace(-xm, xm, GRID_POINTS)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Trapezoid rule on an arbitrary grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Hermite functions `u_0..u_n` at `x` by the upward recursion
/// `√2 x u_k = √(k+1) u_{k+1} + √k u_{k−1}`.
pub fn hermite_all(n: usize, x: f64) -> Vec<f64> {
    let mut u = Vec::with_capacity(n + 1);
    u.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n >= 1 {
        u.push(std::f64::consts::SQRT_2 * x * u[0]);
    }
    for k in 1..n {
        let next = (std::f64::consts::SQRT_2 * x * u[k] - (k as f64).sqrt() * u[k - 1]) / ((k + 1) as f64).sqrt();
        u.push(next);
    }
    u
}

pub fn hermite_u(n: usize, x: f64) -> f64 {
    hermite_all(n, x)[n]
}

/// Table of `u_n(x_j)` for `n ≤ n_max`.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    pub xs: Vec<f64>,
    /// `u[n][j] = u_n(xs[j])`.
    pub u: Vec<Vec<f64>>,
}

impl HermiteBasis {
    pub fn new(n_max: usize, xs: &[f64]) -> Self {
        let cols: Vec<Vec<f64>> = xs.iter().map(|&x| hermite_all(n_max, x)).collect();
        let u = (0..=n_max).map(|n| cols.iter().map(|c| c[n]).collect()).collect();
        HermiteBasis { xs: xs.to_vec(), u }
    }

    pub fn n_max(&self) -> usize {
        self.u.len() - 1
    }

    /// Trapezoid Gram matrix `∫ u_m u_n`.
    pub fn gram(&self) -> nalgebra::DMatrix<f64> {
        let k = self.u.len();
        nalgebra::DMatrix::from_fn(k, k, |m, n| {
            let prod: Vec<f64> = self.u[m].iter().zip(&self.u[n]).map(|(a, b)| a * b).collect();
            trapezoid(&self.xs, &prod)
        })
    }
}

/// Harmonic decomposition `p(x;φ) = Σ_k Re(e^{−ikφ} c_k(x))` of a state's
/// quadrature density on a fixed grid.
#[derive(Debug, Clone)]
struct DensityHarmonics {
    xs: Vec<f64>,
    c: Vec<Vec<C64>>,
}

impl DensityHarmonics {
    fn new(rho: &CMatrix, xs: &[f64]) -> Self {
        let d = rho.nrows();
        let basis = HermiteBasis::new(d - 1, xs);
        let mut c = vec![vec![C64::new(0.0, 0.0); xs.len()]; d];
        for m in 0..d {
            for mp in 0..=m {
                let k = m - mp;
                let w = if k == 0 { rho[(m, mp)] } else { rho[(m, mp)] * 2.0 };
                for (j, cj) in c[k].iter_mut().enumerate() {
                    *cj += w * (basis.u[m][j] * basis.u[mp][j]);
                }
            }
        }
        DensityHarmonics { xs: xs.to_vec(), c }
    }

    fn at(&self, phi: f64) -> Vec<f64> {
        let phases: Vec<C64> = (0..self.c.len()).map(|k| C64::from_polar(1.0, -(k as f64) * phi)).collect();
        (0..self.xs.len())
            .map(|j| self.c.iter().zip(&phases).map(|(ck, e)| (ck[j] * e).re).sum())
            .collect()
    }
}

/// Quadrature density of `ρ` (truncated at `dim − 1`) at phase `φ`.
/// Values above `−1e-9` are clipped at zero; anything lower is reported.
pub fn quadrature_density(rho: &DensityMatrix, phi: f64, xs: &[f64]) -> Result<Vec<f64>> {
    let p = DensityHarmonics::new(rho.matrix(), xs).at(phi);
    clip_density(p)
}

fn clip_density(p: Vec<f64>) -> Result<Vec<f64>> {
    let min = p.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-9 {
        return Err(Error::NegativeDensity(min));
    }
    Ok(p.into_iter().map(|v| v.max(0.0)).collect())
}

/// Homodyne record: phases and quadrature values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureSamples {
    pub phi: Vec<f64>,
    pub x: Vec<f64>,
    pub seed: Option<u64>,
}

impl QuadratureSamples {
    pub fn new(phi: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if phi.len() != x.len() {
            return Err(Error::DimMismatch("phi and x columns differ in length".into()));
        }
        Ok(QuadratureSamples { phi, x, seed: None })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// CSV with header `phi,x`, 15 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("phi,x\n");
        for (p, x) in self.phi.iter().zip(&self.x) {
            s.push_str(&format!("{:.14e},{:.14e}\n", p, x));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(|h| h.trim()) {
            Some("phi,x") => {}
            other => return Err(Error::Invalid(format!("expected header phi,x, found {other:?}"))),
        }
        let (mut phi, mut x) = (Vec::new(), Vec::new());
        for (k, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::Invalid(format!("bad sample row {}", k + 2)))
            };
            phi.push(next()?);
            x.push(next()?);
        }
        QuadratureSamples::new(phi, x)
    }
}

/// Draws `n` samples: `φ` uniform on `[0, 2π)`, `x` by inverse CDF on the
/// default grid, plus optional Gaussian detector noise of std `noise_sd`.
pub fn sample_homodyne(rho: &DensityMatrix, n: usize, seed: u64, noise_sd: Option<f64>) -> Result<QuadratureSamples> {
    let fock = FockSpace::new(rho.dim() - 1);
    let xs = fock.x_grid();
    let harm = DensityHarmonics::new(rho.matrix(), &xs);
    let pairs: Vec<Result<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = random::stream(seed, i as u64);
            let phi = rng.random::<f64>() * 2.0 * PI;
            let p = clip_density(harm.at(phi))?;
            let mut x = inverse_cdf(&xs, &p, rng.random::<f64>());
            if let Some(sd) = noise_sd {
                x += sd * rng.sample::<f64, _>(StandardNormal);
            }
            Ok((phi, x))
        })
        .collect();
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    let (phi, x) = pairs.into_iter().unzip();
    Ok(QuadratureSamples { phi, x, seed: Some(seed) })
}

fn inverse_cdf(xs: &[f64], p: &[f64], u: f64) -> f64 {
    let mut cum = Vec::with_capacity(xs.len());
    cum.push(0.0);
    for j in 1..xs.len() {
        cum.push(cum[j - 1] + 0.5 * (xs[j] - xs[j - 1]) * (p[j] + p[j - 1]));
    }
    let target = u * cum[cum.len() - 1];
    let j = cum.partition_point(|&c| c < target).clamp(1, xs.len() - 1);
    let span = cum[j] - cum[j - 1];
    let t = if span > 0.0 { (target - cum[j - 1]) / span } else { 0.5 };
    xs[j - 1] + t * (xs[j] - xs[j - 1])
}

/// Outcome of the likelihood maximization.
#[derive(Debug, Clone)]
pub struct MleResult {
    pub rho: DensityMatrix,
    /// Total log-likelihood at the returned state.
    pub loglik: f64,
    /// Total log-likelihood after each accepted step.
    pub loglik_trace: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    pub max_iter: usize,
    pub initial_step: f64,
    /// Stop when an accepted step raises the mean log-likelihood by less.
    pub tol: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions { max_iter: 5000, initial_step: 1e-2, tol: 1e-10 }
    }
}

/// Sample vectors `a_i = (u_m(x_i) e^{imφ_i})_m`, so that `p_i = a_i* ρ a_i`.
fn sample_vectors(samples: &QuadratureSamples, n_max: usize) -> CMatrix {
    let n = samples.len();
    let mut a = CMatrix::zeros(n_max + 1, n);
    for (i, (&phi, &x)) in samples.phi.iter().zip(&samples.x).enumerate() {
        for (m, u) in hermite_all(n_max, x).into_iter().enumerate() {
            a[(m, i)] = C64::from_polar(u, m as f64 * phi);
        }
    }
    a
}

fn upper_triangular(mut t: CMatrix) -> CMatrix {
    for i in 0..t.nrows() {
        for j in 0..i {
            t[(i, j)] = r(0.0);
        }
    }
    t
}

/// Mean log-likelihood of `ρ = TT*` (trace one) and the probabilities.
fn mean_loglik(t: &CMatrix, a: &CMatrix) -> (f64, Vec<f64>) {
    let b = t.adjoint() * a;
    let probs: Vec<f64> = b.column_iter().map(|c| c.norm_squared()).collect();
    let ll = probs.iter().map(|p| p.max(1e-300).ln()).sum::<f64>() / probs.len() as f64;
    (ll, probs)
}

/// Maximum likelihood over `ρ = TT*/tr(TT*)` with `T` upper triangular, by
/// projected gradient ascent with backtracking.
pub fn mle_estimate(samples: &QuadratureSamples, n_max: usize) -> Result<MleResult> {
    mle_estimate_with(samples, n_max, MleOptions::default())
}

pub fn mle_estimate_with(samples: &QuadratureSamples, n_max: usize, opts: MleOptions) -> Result<MleResult> {
    let d = n_max + 1;
    if samples.len() < 10 * d * d {
        return Err(Error::TooFewSamples(format!("{} samples for n_max = {}; need {}", samples.len(), n_max, 10 * d * d)));
    }
    let a = sample_vectors(samples, n_max);
    let n = samples.len() as f64;
    let mut t = CMatrix::identity(d, d) * r(1.0 / (d as f64).sqrt());
    let (mut ll, mut probs) = mean_loglik(&t, &a);
    let mut trace_ll = vec![ll * n];
    let mut step = opts.initial_step;
    let mut converged = false;
    let mut iters = 0;
    while iters < opts.max_iter {
        iters += 1;
        // R = Σ a a*/p / n;  gradient 2 (R − 1) T on the trace-one sphere
        let scaled = CMatrix::from_fn(d, a.ncols(), |m, i| a[(m, i)] / probs[i].max(1e-300));
        let rmat = (&scaled * a.adjoint()) / r(n);
        let grad = upper_triangular((rmat - CMatrix::identity(d, d)) * &t * r(2.0));
        let mut accepted = false;
        while step > 1e-14 {
            let cand = &t + &grad * r(step);
            let norm = trace(&(&cand * cand.adjoint())).re.sqrt();
            let cand = cand / r(norm);
            let (cll, cprobs) = mean_loglik(&cand, &a);
            if cll > ll {
                let gain = cll - ll;
                t = cand;
                ll = cll;
                probs = cprobs;
                trace_ll.push(ll * n);
                step *= 2.0;
                accepted = true;
                if gain < opts.tol {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = true;
        }
        if converged {
            break;
        }
    }
    let rho = DensityMatrix::normalize(crate::qcore::symmetrize(&(&t * t.adjoint())))?;
    Ok(MleResult { rho, loglik: ll * n, loglik_trace: trace_ll, iters, converged })
}

/// `m!` as a float.
fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Generalized Laguerre polynomial `L_n^{(α)}(x)`.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + alpha - x);
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// `⟨m|D(β)|n⟩` for the displacement `D(β) = exp(βA⁺ − β̄A⁻)`.
pub fn displacement_element(m: usize, n: usize, beta: C64) -> C64 {
    let x = beta.norm_sqr();
    let g = (-0.5 * x).exp();
    if m >= n {
        let k = m - n;
        beta.powu(k as u32) * ((factorial(n) / factorial(m)).sqrt() * g * laguerre(n, k as f64, x))
    } else {
        let k = n - m;
        (-beta.conj()).powu(k as u32) * ((factorial(m) / factorial(n)).sqrt() * g * laguerre(m, k as f64, x))
    }
}

/// `W_z = exp(i r X_φ)` for `z = r e^{iφ}`, on the truncated space.
pub fn weyl_operator(z: C64, fock: &FockSpace) -> CMatrix {
    fock.quadrature(z.arg()).exp_i(z.norm())
}

/// `⟨m|W_z|n⟩` without truncation; `W_z = D(i z/√2)`.
pub fn weyl_element(m: usize, n: usize, z: C64) -> C64 {
    displacement_element(m, n, I * z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Radial kernel for the target `|m'⟩⟨m|`: tabulates
/// `w_k r_k ⟨m|W_{r_k}|m'⟩` on Gauss–Legendre nodes of `[0, r_max]`.
#[derive(Debug, Clone)]
pub struct TomographicKernel {
    pub m: usize,
    pub mp: usize,
    pub r_max: f64,
    nodes: Vec<(f64, C64)>,
}

impl TomographicKernel {
    pub fn new(m: usize, mp: usize, r_max: f64, n_nodes: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(n_nodes.max(1)).unwrap());
        let half = 0.5 * r_max;
        let nodes = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(s, w)| {
                let rr = half * (s + 1.0);
                (rr, weyl_element(m, mp, r(rr)) * (w * half * rr))
            })
            .collect();
        TomographicKernel { m, mp, r_max, nodes }
    }

    /// `g_A(x, φ)`.
    pub fn eval(&self, x: f64, phi: f64) -> C64 {
        let radial: C64 = self.nodes.iter().map(|(rr, c)| c * C64::from_polar(1.0, -rr * x)).sum();
        radial * C64::from_polar(1.0, (self.m as f64 - self.mp as f64) * phi)
    }
}

/// Default radial cutoff and node count of the kernel estimator.
pub const KERNEL_R_MAX: f64 = 8.0;
pub const KERNEL_NODES: usize = 160;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEstimate {
    pub m: usize,
    pub mp: usize,
    pub re: f64,
    pub im: f64,
    /// Standard error of the complex sample mean.
    pub standard_error: f64,
}

impl KernelEstimate {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Sample average of `g_A` for `A = |m'⟩⟨m|`, estimating `ρ_{m m'}`.
pub fn kernel_estimate(samples: &QuadratureSamples, m: usize, mp: usize) -> Result<KernelEstimate> {
    kernel_estimate_with(samples, &TomographicKernel::new(m, mp, KERNEL_R_MAX, KERNEL_NODES))
}

pub fn kernel_estimate_with(samples: &QuadratureSamples, kernel: &TomographicKernel) -> Result<KernelEstimate> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples("kernel estimate needs at least two samples".into()));
    }
    let vals: Vec<C64> = samples.x.par_iter().zip(&samples.phi).map(|(&x, &phi)| kernel.eval(x, phi)).collect();
    let n = vals.len() as f64;
    let mean: C64 = vals.iter().sum::<C64>() / n;
    let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    Ok(KernelEstimate { m: kernel.m, mp: kernel.mp, re: mean.re, im: mean.im, standard_error: (var / n).sqrt() })
}

/// Exact expectation of `g_A` under the quadrature law of `ρ`, by 2-D
/// quadrature (uniform phases, trapezoid in `x` on a wide grid).
pub fn kernel_expectation(rho: &DensityMatrix, kernel: &TomographicKernel) -> C64 {
    let n_max = rho.dim() - 1;
    let xm = (2.0 * n_max as f64 + 1.0).sqrt() + 6.0;
    let xs = linspace(-xm, xm, 6001);
    let harm = DensityHarmonics::new(rho.matrix(), &xs);
    let n_phi = 4 * (n_max + 1);
    let total: C64 = (0..n_phi)
        .into_par_iter()
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            let p = harm.at(phi);
            let g: Vec<C64> = xs.iter().map(|&x| kernel.eval(x, phi)).collect();
            let re: Vec<f64> = g.iter().zip(&p).map(|(g, p)| g.re * p).collect();
            let im: Vec<f64> = g.iter().zip(&p).map(|(g, p)| g.im * p).collect();
            C64::new(trapezoid(&xs, &re), trapezoid(&xs, &im))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    total / n_phi as f64
}

/// Largest `|E g_A − ρ_{mm'}|` over targets `m, m' ≤ max_index`.
pub fn unbiasedness_gate(rho: &DensityMatrix, max_index: usize, r_max: f64, n_nodes: usize) -> f64 {
    let mut worst = 0.0f64;
    for m in 0..=max_index.min(rho.dim() - 1) {
        for mp in 0..=max_index.min(rho.dim() - 1) {
            let e = kernel_expectation(rho, &TomographicKernel::new(m, mp, r_max, n_nodes));
            worst = worst.max((e - rho.matrix()[(m, mp)]).norm());
        }
    }
    worst
}

/// Pads a state given on a smaller truncation into `n_max`.
pub fn pad_state(rho: &DensityMatrix, n_max: usize) -> Result<DensityMatrix> {
    DensityMatrix::new(FockSpace::new(n_max).embed(rho.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{frobenius, StateVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fock_state(n_max: usize, k: usize) -> DensityMatrix {
        DensityMatrix::pure(&StateVector::basis(n_max + 1, k))
    }

    fn hermite_direct(n: usize, x: f64) -> f64 {
        // physicists' H_n from the explicit sum
        let mut h = 0.0;
        for k in 0..=n / 2 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            h += sign * (2.0 * x).powi((n - 2 * k) as i32) / (factorial(k) * factorial(n - 2 * k));
        }
        h *= factorial(n);
        h * (-0.5 * x * x).exp() / (2f64.powi(n as i32) * factorial(n) * PI.sqrt()).sqrt()
    }

    #[test]
    fn hermite_recursion_matches_direct_formula() {
        for n in 0..=10 {
            for &x in &[-3.1, -1.0, -0.2, 0.0, 0.7, 2.5] {
                assert!((hermite_u(n, x) - hermite_direct(n, x)).abs() < 1e-9, "n={n} x={x}");
            }
        }
        assert_eq!(hermite_u(1, 0.0), 0.0);
        let x = 0.8f64;
        assert!((hermite_u(0, x).powi(2) - (-x * x).exp() / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hermite_gram_is_identity() {
        let fock = FockSpace::new(10);
        let g = HermiteBasis::new(10, &linspace(-9.0, 9.0, GRID_POINTS)).gram();
        assert!((g - nalgebra::DMatrix::<f64>::identity(11, 11)).abs().max() < 1e-6);
        assert_eq!(fock.x_grid().len(), GRID_POINTS);
    }

    #[test]
    fn operator_tables() {
        let f = FockSpace::new(6);
        let q = f.q();
        let p = f.p();
        for n in 0..6 {
            let v = ((n + 1) as f64).sqrt() / std::f64::consts::SQRT_2;
            assert!((q.matrix()[(n, n + 1)] - r(v)).norm() < 1e-15);
            assert!((q.matrix()[(n + 1, n)] - r(v)).norm() < 1e-15);
            assert!((p.matrix()[(n, n + 1)] - C64::new(0.0, -v)).norm() < 1e-15);
            assert!((p.matrix()[(n + 1, n)] - C64::new(0.0, v)).norm() < 1e-15);
        }
        let comm = q.matrix() * p.matrix() - p.matrix() * q.matrix();
        for n in 0..5 {
            assert!((comm[(n, n)] - I).norm() < 1e-14);
        }
        // A⁺A = N
        let nn = f.raise() * f.lower();
        assert!(frobenius(&(nn - f.number().matrix())) < 1e-14);
        // X_φ = e^{iφN} Q e^{−iφN}
        let phi = 0.77;
        let rot = f.rotation(phi);
        let x = &rot * q.matrix() * rot.adjoint();
        assert!(frobenius(&(x - f.quadrature(phi).matrix())) < 1e-13);
    }

    #[test]
    fn vacuum_density_is_normal_half() {
        let xs = FockSpace::new(4).x_grid();
        for phi in [0.0, 1.0, 4.0] {
            let p = quadrature_density(&fock_state(4, 0), phi, &xs).unwrap();
            for (x, v) in xs.iter().zip(&p) {
                assert!((v - (-x * x).exp() / PI.sqrt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn number_state_density_is_phase_free() {
        let xs = FockSpace::new(5).x_grid();
        let a = quadrature_density(&fock_state(5, 3), 0.0, &xs).unwrap();
        let b = quadrature_density(&fock_state(5, 3), 2.2, &xs).unwrap();
        for ((x, a), b) in xs.iter().zip(&a).zip(&b) {
            assert!((a - b).abs() < 1e-14);
            assert!((a - hermite_u(3, *x).powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn density_normalized_for_supported_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n_max = 8;
        for _ in 0..10 {
            let rho = pad_state(&random::density(n_max - 3, &mut rng), n_max).unwrap();
            let xs = FockSpace::new(n_max).x_grid();
            let p = quadrature_density(&rho, rng.random::<f64>() * 6.0, &xs).unwrap();
            assert!((trapezoid(&xs, &p) - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn density_moments_match_quadrature_operator() {
        // independent oracle: mean and second moment of X_φ from the matrix
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n_max = 4;
        let rho = random::density(n_max + 1, &mut rng);
        let big = FockSpace::new(n_max).guarded();
        let rho_big = big.embed(rho.matrix());
        let xs = linspace(-9.0, 9.0, 8001);
        for phi in [0.0, 0.6, 2.0, 4.4] {
            let p = quadrature_density(&rho, phi, &xs).unwrap();
            let xq = big.quadrature(phi);
            let m1: Vec<f64> = xs.iter().zip(&p).map(|(x, p)| x * p).collect();
            let m2: Vec<f64> = xs.iter().zip(&p).map(|(x, p)| x * x * p).collect();
            let e1 = trace(&(&rho_big * xq.matrix())).re;
            let e2 = trace(&(&rho_big * xq.matrix() * xq.matrix())).re;
            assert!((trapezoid(&xs, &m1) - e1).abs() < 1e-8, "phi={phi}");
            assert!((trapezoid(&xs, &m2) - e2).abs() < 1e-8, "phi={phi}");
        }
    }

    #[test]
    fn fourier_rotation_maps_p_to_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fock = FockSpace::new(5);
        let psi = random::state_vector(6, &mut rng);
        let f = fock.rotation(-PI / 2.0);
        let fpsi = StateVector::new(&f * psi.vector()).unwrap();
        let xs = fock.x_grid();
        let p_of_psi = quadrature_density(&DensityMatrix::pure(&psi), PI / 2.0, &xs).unwrap();
        let q_of_fpsi = quadrature_density(&DensityMatrix::pure(&fpsi), 0.0, &xs).unwrap();
        for (a, b) in p_of_psi.iter().zip(&q_of_fpsi) {
            assert!((a - b).abs() < 1e-13);
        }
        // and F P F* = Q on the truncation
        let lhs = &f * fock.p().matrix() * f.adjoint();
        assert!(frobenius(&(lhs - fock.q().matrix())) < 1e-12);
    }

    #[test]
    fn vacuum_sample_moments() {
        let s = sample_homodyne(&fock_state(2, 0), 100_000, 7, None).unwrap();
        let (mean, se) = crate::stats::mean_se(&s.x);
        assert!(mean.abs() < 3.0 * se);
        let sq: Vec<f64> = s.x.iter().map(|x| x * x).collect();
        let (var, se_var) = crate::stats::mean_se(&sq);
        assert!((var - 0.5).abs() < 3.0 * se_var, "{var} ± {se_var}");
        assert!(s.phi.iter().all(|p| (0.0..2.0 * PI).contains(p)));
    }

    #[test]
    fn one_photon_samples_pass_ks() {
        let s = sample_homodyne(&fock_state(2, 1), 20_000, 8, None).unwrap();
        // CDF of u₁² by fine quadrature
        let grid = linspace(-8.0, 8.0, 20001);
        let dens: Vec<f64> = grid.iter().map(|x| hermite_u(1, *x).powi(2)).collect();
        let mut cdf = vec![0.0];
        for j in 1..grid.len() {
            cdf.push(cdf[j - 1] + 0.5 * (grid[j] - grid[j - 1]) * (dens[j] + dens[j - 1]));
        }
        let f = |x: f64| {
            let j = grid.partition_point(|g| *g < x).clamp(1, grid.len() - 1);
            cdf[j]
        };
        let (_, p) = crate::stats::ks_test(&s.x, f);
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn sampling_is_reproducible_and_csv_round_trips() {
        let rho = fock_state(3, 1);
        let a = sample_homodyne(&rho, 500, 42, Some(0.1)).unwrap();
        let b = sample_homodyne(&rho, 500, 42, Some(0.1)).unwrap();
        assert_eq!(a, b);
        let back = QuadratureSamples::from_csv(&a.to_csv()).unwrap();
        for (u, v) in back.x.iter().zip(&a.x) {
            assert!(((u - v) / v.abs().max(1e-300)).abs() < 1e-14);
        }
        assert!(QuadratureSamples::from_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn mle_recovers_vacuum_monotonically() {
        let s = sample_homodyne(&fock_state(4, 0), 5_000, 11, None).unwrap();
        let fit = mle_estimate(&s, 4).unwrap();
        assert!(fit.rho.matrix()[(0, 0)].re > 0.97, "{}", fit.rho.matrix()[(0, 0)].re);
        for w in fit.loglik_trace.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!((trace(fit.rho.matrix()).re - 1.0).abs() < 1e-10);
        assert!(fit.rho.hermitian().min_eigenvalue() > -1e-10);
    }

    #[test]
    fn mle_needs_enough_samples() {
        let s = sample_homodyne(&fock_state(4, 0), 100, 1, None).unwrap();
        assert!(matches!(mle_estimate(&s, 4), Err(Error::TooFewSamples(_))));
    }

    #[test]
    fn truncation_too_low_costs_likelihood() {
        let s = sample_homodyne(&fock_state(3, 2), 4_000, 12, None).unwrap();
        let low = mle_estimate(&s, 1).unwrap();
        let right = mle_estimate(&s, 3).unwrap();
        assert!(right.loglik - low.loglik > 100.0);
    }

    #[test]
    fn displacement_elements_match_truncated_exponential() {
        let big = FockSpace::new(40);
        for z in [C64::from_polar(0.8, 0.3), C64::from_polar(1.5, 2.0)] {
            let w = weyl_operator(z, &big);
            for m in 0..5 {
                for n in 0..5 {
                    assert!((w[(m, n)] - weyl_element(m, n, z)).norm() < 1e-10, "{m} {n}");
                }
            }
        }
    }

    #[test]
    fn weyl_operator_properties() {
        let f = FockSpace::new(12);
        assert!(frobenius(&(weyl_operator(r(0.0), &f) - crate::qcore::identity(13))) < 1e-14);
        let z = C64::from_polar(0.4, 1.1);
        let w = weyl_operator(z, &f);
        assert!(frobenius(&(w.adjoint() * &w - crate::qcore::identity(13))) < 1e-8);
        assert!(frobenius(&(w.adjoint() - weyl_operator(-z, &f))) < 1e-12);
        let theta = 0.9;
        let rot = f.rotation(theta);
        let lhs = &rot * &w * rot.adjoint();
        assert!(frobenius(&(lhs - weyl_operator(z * C64::from_polar(1.0, theta), &f))) < 1e-6);
        // group law on the low block, up to a unimodular factor
        let z2 = C64::from_polar(0.3, -0.4);
        let prod = &w * weyl_operator(z2, &f);
        let sum = weyl_operator(z + z2, &f);
        let low = 4;
        let factor = prod[(0, 0)] / sum[(0, 0)];
        assert!((factor.norm() - 1.0).abs() < 1e-6);
        for m in 0..low {
            for n in 0..low {
                assert!((prod[(m, n)] - sum[(m, n)] * factor).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn laguerre_closed_forms() {
        for &x in &[0.0, 0.5, 3.0] {
            assert!((laguerre(2, 1.0, x) - (0.5 * x * x - 3.0 * x + 3.0)).abs() < 1e-13);
            assert!((laguerre(1, 2.0, x) - (3.0 - x)).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_gate_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = pad_state(&random::density(3, &mut rng), 4).unwrap();
        assert!(unbiasedness_gate(&rho, 2, KERNEL_R_MAX, KERNEL_NODES) < 1e-3);
    }

    #[test]
    fn kernel_estimates_on_vacuum_data() {
        let s = sample_homodyne(&fock_state(4, 0), 20_000, 21, None).unwrap();
        let e00 = kernel_estimate(&s, 0, 0).unwrap();
        assert!((e00.value() - r(1.0)).norm() < 3.0 * e00.standard_error, "{e00:?}");
        let e10 = kernel_estimate(&s, 1, 0).unwrap();
        assert!(e10.value().norm() < 3.0 * e10.standard_error, "{e10:?}");
        let total: C64 = (0..5).map(|m| kernel_estimate(&s, m, m).unwrap().value()).sum();
        assert!((total - r(1.0)).norm() < 0.1);
    }
}
