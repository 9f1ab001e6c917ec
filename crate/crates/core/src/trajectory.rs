//! Lindblad master equation and its quantum jump and diffusion unravelings.
//!
//! Basis convention for the two-level examples: index 0 is the ground state,
//! index 1 the excited state, and decay is `A = α|0⟩⟨1|`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{frobenius, r, sigma_x, trace, CMatrix, CVector, DensityMatrix, Hermitian, StateVector, I};
use crate::random;

/// `Lρ = −i[H,ρ] + Σ (AρA* − ½ρA*A − ½A*Aρ)`.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    h: Hermitian,
    jumps: Vec<CMatrix>,
}

impl LindbladGenerator {
    pub fn new(h: Hermitian, jumps: Vec<CMatrix>) -> Result<Self> {
        let d = h.dim();
        if jumps.iter().any(|a| a.nrows() != d || a.ncols() != d) {
            return Err(Error::DimMismatch("jump operators must match the Hamiltonian".into()));
        }
        Ok(LindbladGenerator { h, jumps })
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn hamiltonian(&self) -> &Hermitian {
        &self.h
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    /// `Σ A*A`.
    fn decay(&self) -> CMatrix {
        let d = self.dim();
        self.jumps.iter().fold(CMatrix::zeros(d, d), |acc, a| acc + a.adjoint() * a)
    }

    /// Non-Hermitian effective Hamiltonian `H − (i/2) Σ A*A`.
    pub fn effective_hamiltonian(&self) -> CMatrix {
        self.h.matrix() - self.decay() * (I * 0.5)
    }

    /// Rough operator scale `‖H‖ + Σ‖A‖²` used for step-size heuristics.
    pub fn scale(&self) -> f64 {
        frobenius(self.h.matrix()) + self.jumps.iter().map(|a| frobenius(a).powi(2)).sum::<f64>()
    }

    /// Decay of an excited two-level atom, `A = α|0⟩⟨1|`, `H = 0`.
    pub fn two_level_decay(alpha: f64) -> Self {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = r(alpha);
        LindbladGenerator { h: Hermitian::from_real_diagonal(&[0.0, 0.0]), jumps: vec![a] }
    }

    /// `H = Ω σ_x`, `A = √γ σ⁻`.
    pub fn driven_qubit(omega: f64, gamma: f64) -> Self {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = r(gamma.sqrt());
        LindbladGenerator { h: Hermitian::from_raw(sigma_x() * r(omega)), jumps: vec![a] }
    }

    /// `|2⟩ → |1⟩ → |0⟩` with rates `g1`, `g2`.
    pub fn three_level_cascade(g1: f64, g2: f64) -> Self {
        let mut a1 = CMatrix::zeros(3, 3);
        a1[(1, 2)] = r(g1.sqrt());
        let mut a2 = CMatrix::zeros(3, 3);
        a2[(0, 1)] = r(g2.sqrt());
        LindbladGenerator { h: Hermitian::from_real_diagonal(&[0.0, 0.0, 0.0]), jumps: vec![a1, a2] }
    }
}

pub fn lindblad_rhs(g: &LindbladGenerator, rho: &CMatrix) -> CMatrix {
    let h = g.h.matrix();
    let mut out = (h * rho - rho * h) * (-I);
    for a in &g.jumps {
        let ada = a.adjoint() * a;
        out += a * rho * a.adjoint() - (rho * &ada + &ada * rho) * r(0.5);
    }
    out
}

/// Time discretization: step `dt`, horizon `t_max`, and a record every
/// `record_every` steps (time 0 is always recorded).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub dt: f64,
    pub record_every: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, dt: f64, record_every: usize) -> Result<Self> {
        if !(dt > 0.0 && t_max > 0.0) || record_every == 0 {
            return Err(Error::OutOfRange("time grid needs dt > 0, t_max > 0, record_every > 0".into()));
        }
        Ok(TimeGrid { t_max, dt, record_every })
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    pub fn record_times(&self) -> Vec<f64> {
        (0..=self.steps()).step_by(self.record_every).map(|k| k as f64 * self.dt).collect()
    }

    pub fn halved(&self) -> TimeGrid {
        TimeGrid { t_max: self.t_max, dt: self.dt / 2.0, record_every: self.record_every * 2 }
    }
}

/// Classical RK4 on the matrix ODE, returning the state at the record times.
pub fn integrate_master(g: &LindbladGenerator, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Vec<DensityMatrix>> {
    if rho0.dim() != g.dim() {
        return Err(Error::DimMismatch("initial state dimension".into()));
    }
    let dt = grid.dt;
    let mut rho = rho0.matrix().clone();
    let mut out = vec![rho0.clone()];
    for k in 1..=grid.steps() {
        let k1 = lindblad_rhs(g, &rho);
        let k2 = lindblad_rhs(g, &(&rho + &k1 * r(dt / 2.0)));
        let k3 = lindblad_rhs(g, &(&rho + &k2 * r(dt / 2.0)));
        let k4 = lindblad_rhs(g, &(&rho + &k3 * r(dt)));
        rho += (k1 + k2 * r(2.0) + k3 * r(2.0) + k4) * r(dt / 6.0);
        rho = crate::qcore::symmetrize(&rho);
        let drift = (trace(&rho).re - 1.0).abs();
        if drift > 1e-8 || !drift.is_finite() {
            return Err(Error::StepTooLarge(dt));
        }
        if k % grid.record_every == 0 {
            let state = DensityMatrix::from_raw(rho.clone());
            if state.hermitian().min_eigenvalue() < -1e-7 {
                return Err(Error::StepTooLarge(dt));
            }
            out.push(state);
        }
    }
    Ok(out)
}

/// One unraveled path, recorded on the grid's record times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Normalized state at each record time.
    pub states: Vec<CVector>,
    /// Whether a jump happened since the previous record.
    pub jump_flags: Vec<bool>,
    pub jump_times: Vec<f64>,
    pub jump_channels: Vec<usize>,
    /// Norm the unnormalized no-jump evolution would have at each record.
    pub weights: Vec<f64>,
    pub seed: u64,
}

impl Trajectory {
    /// `ρ̂(t) = |ψ⟩⟨ψ|`.
    pub fn density(&self, k: usize) -> CMatrix {
        &self.states[k] * self.states[k].adjoint()
    }

    /// Columns `t, jump_flag, re(ψ_0), im(ψ_0), ...`.
    pub fn to_csv(&self) -> String {
        let d = self.states.first().map(|s| s.len()).unwrap_or(0);
        let mut s = String::from("t,jump_flag");
        for k in 0..d {
            s.push_str(&format!(",re_psi{k},im_psi{k}"));
        }
        s.push('\n');
        for ((t, psi), flag) in self.times.iter().zip(&self.states).zip(&self.jump_flags) {
            s.push_str(&format!("{},{}", crate::io::round15(*t), *flag as u8));
            for z in psi.iter() {
                s.push_str(&format!(",{},{}", crate::io::round15(z.re), crate::io::round15(z.im)));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unraveling {
    Jump,
    Diffusion,
}

fn normalize(v: &mut CVector) -> f64 {
    let n = v.norm();
    if n > 0.0 {
        *v /= r(n);
    }
    n
}

struct Stepper {
    no_jump: CMatrix,
    h_eff: CMatrix,
}

impl Stepper {
    fn new(g: &LindbladGenerator, dt: f64) -> Self {
        let h_eff = g.effective_hamiltonian();
        let no_jump = (&h_eff * (-I * dt)).exp();
        Stepper { no_jump, h_eff }
    }
}

fn run<R: Rng + ?Sized>(
    g: &LindbladGenerator,
    psi0: &StateVector,
    grid: &TimeGrid,
    kind: Unraveling,
    seed: u64,
    rng: &mut R,
) -> Trajectory {
    let dt = grid.dt;
    let stepper = Stepper::new(g, dt);
    let mut psi = psi0.vector().clone();
    let mut weight = 1.0;
    let mut tr = Trajectory {
        times: vec![0.0],
        states: vec![psi.clone()],
        jump_flags: vec![false],
        jump_times: Vec::new(),
        jump_channels: Vec::new(),
        weights: vec![1.0],
        seed,
    };
    let mut flag = false;
    for k in 1..=grid.steps() {
        match kind {
            Unraveling::Jump => {
                let mut fired = None;
                for (c, a) in g.jumps.iter().enumerate() {
                    let intensity = (a * &psi).norm_squared();
                    if intensity > 0.0 && rng.random::<f64>() < intensity * dt && fired.is_none() {
                        fired = Some(c);
                    }
                }
                match fired {
                    Some(c) => {
                        psi = &g.jumps[c] * &psi;
                        tr.jump_times.push(k as f64 * dt);
                        tr.jump_channels.push(c);
                        flag = true;
                    }
                    None => {
                        psi = &stepper.no_jump * &psi;
                        weight *= psi.norm();
                    }
                }
            }
            Unraveling::Diffusion => {
                let mut drift = &stepper.h_eff * &psi * (-I);
                let mut noise = CVector::zeros(psi.len());
                for a in &g.jumps {
                    let ax = a * &psi;
                    let x = 2.0 * psi.dotc(&ax).re;
                    drift += &ax * r(0.5 * x) - &psi * r(x * x / 8.0);
                    let dw: f64 = rng.sample::<f64, _>(StandardNormal) * dt.sqrt();
                    noise += (ax - &psi * r(0.5 * x)) * r(dw);
                }
                psi += drift * r(dt) + noise;
            }
        }
        normalize(&mut psi);
        if k % grid.record_every == 0 {
            tr.times.push(k as f64 * dt);
            tr.states.push(psi.clone());
            tr.jump_flags.push(flag);
            tr.weights.push(weight);
            flag = false;
        }
    }
    tr
}

/// Quantum jump path with per-step, per-channel Bernoulli(`I_k dt`) collapses.
pub fn jump_trajectory(g: &LindbladGenerator, psi0: &StateVector, grid: &TimeGrid, seed: u64) -> Result<Trajectory> {
    check_dims(g, psi0)?;
    Ok(run(g, psi0, grid, Unraveling::Jump, seed, &mut random::stream(seed, 0)))
}

/// Homodyne diffusion path, Euler–Maruyama with renormalization:
/// `dψ = [−iH − ½A*A + ½⟨x⟩A − ⅛⟨x⟩²]ψ dt + (A − ½⟨x⟩)ψ dW`, `⟨x⟩ = ⟨A + A*⟩`.
pub fn diffusion_trajectory(g: &LindbladGenerator, psi0: &StateVector, grid: &TimeGrid, seed: u64) -> Result<Trajectory> {
    check_dims(g, psi0)?;
    Ok(run(g, psi0, grid, Unraveling::Diffusion, seed, &mut random::stream(seed, 0)))
}

fn check_dims(g: &LindbladGenerator, psi0: &StateVector) -> Result<()> {
    if psi0.dim() != g.dim() {
        return Err(Error::DimMismatch("initial vector dimension".into()));
    }
    Ok(())
}

/// Time of the first collapse, or `None` if none happens before `t_max`.
pub fn first_jump_time<R: Rng + ?Sized>(g: &LindbladGenerator, psi0: &StateVector, grid: &TimeGrid, rng: &mut R) -> Option<f64> {
    let stepper = Stepper::new(g, grid.dt);
    let mut psi = psi0.vector().clone();
    for k in 1..=grid.steps() {
        for a in &g.jumps {
            let intensity = (a * &psi).norm_squared();
            if intensity > 0.0 && rng.random::<f64>() < intensity * grid.dt {
                return Some(k as f64 * grid.dt);
            }
        }
        psi = &stepper.no_jump * &psi;
        normalize(&mut psi);
    }
    None
}

/// Ensemble average of `ρ̂(t)` with its Frobenius standard error.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub mean: Vec<CMatrix>,
    /// `sqrt(Σ_i ‖ρ̂_i − ρ̄‖² / (n(n−1)))`, zero for a single path.
    pub standard_error: Vec<f64>,
    pub n_traj: usize,
}

impl EnsembleResult {
    /// Largest `‖ρ̄(t) − ρ(t)‖_F / SE(t)` against a reference series, with
    /// `floor` added to the error to absorb exact-arithmetic ties.
    pub fn max_z(&self, reference: &[DensityMatrix], floor: f64) -> f64 {
        self.mean
            .iter()
            .zip(reference)
            .zip(&self.standard_error)
            .map(|((m, rf), se)| frobenius(&(m - rf.matrix())) / (se + floor))
            .fold(0.0, f64::max)
    }

    pub fn max_deviation(&self, reference: &[DensityMatrix]) -> f64 {
        self.mean.iter().zip(reference).map(|(m, rf)| frobenius(&(m - rf.matrix()))).fold(0.0, f64::max)
    }
}

/// Runs `n_traj` independent paths on streams `(seed, i)` in parallel and
/// reduces them in index order.
pub fn ensemble_mean(
    g: &LindbladGenerator,
    psi0: &StateVector,
    grid: &TimeGrid,
    n_traj: usize,
    seed: u64,
    kind: Unraveling,
) -> Result<EnsembleResult> {
    check_dims(g, psi0)?;
    if n_traj == 0 {
        return Err(Error::TooFewSamples("ensemble needs at least one trajectory".into()));
    }
    let paths: Vec<Vec<CVector>> = (0..n_traj)
        .into_par_iter()
        .map(|i| run(g, psi0, grid, kind, seed, &mut random::stream(seed, i as u64)).states)
        .collect();
    let times = grid.record_times();
    let d = g.dim();
    let n = n_traj as f64;
    let mut mean = vec![CMatrix::zeros(d, d); times.len()];
    for p in &paths {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v * v.adjoint();
        }
    }
    for m in &mut mean {
        *m /= r(n);
    }
    let mut se = vec![0.0; times.len()];
    if n_traj > 1 {
        for p in &paths {
            for ((s, m), v) in se.iter_mut().zip(&mean).zip(p) {
                *s += frobenius(&(v * v.adjoint() - m)).powi(2);
            }
        }
        for s in &mut se {
            *s = (*s / (n * (n - 1.0))).sqrt();
        }
    }
    Ok(EnsembleResult { times, mean, standard_error: se, n_traj })
}

/// Columns `t, re(ρ_00), im(ρ_00), re(ρ_01), ...` flattened row-major.
pub fn series_csv(times: &[f64], states: &[CMatrix]) -> String {
    let d = states.first().map(|s| s.nrows()).unwrap_or(0);
    let mut s = String::from("t");
    for i in 0..d {
        for j in 0..d {
            s.push_str(&format!(",re_rho{i}{j},im_rho{i}{j}"));
        }
    }
    s.push('\n');
    for (t, m) in times.iter().zip(states) {
        s.push_str(&format!("{}", crate::io::round15(*t)));
        for i in 0..d {
            for j in 0..d {
                s.push_str(&format!(",{},{}", crate::io::round15(m[(i, j)].re), crate::io::round15(m[(i, j)].im)));
            }
        }
        s.push('\n');
    }
    s
}

/// One-sample Kolmogorov–Smirnov test against Exponential(`rate`).
pub fn ks_exponential(samples: &[f64], rate: f64) -> (f64, f64) {
    crate::stats::ks_test(samples, |x| 1.0 - (-rate * x.max(0.0)).exp())
}

/// Ground and excited basis vectors of the two-level examples.
pub fn ground() -> StateVector {
    StateVector::basis(2, 0)
}

pub fn excited() -> StateVector {
    StateVector::basis(2, 1)
}
