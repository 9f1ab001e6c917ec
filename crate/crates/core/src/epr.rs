//! Singlet correlations, Bell's inequality against local hidden variables,
//! teleportation and decoherence by phase averaging.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instrument::{apply, KrausInstrument};
use crate::measure::{distribution, from_observable, product_measurement, OutcomeDistribution};
use crate::qcore::{
    frobenius, identity, partial_trace, r, tensor_product, BlochVector, CMatrix, CVector, DensityMatrix, Hermitian,
    StateVector, C64,
};
use crate::random;

/// `(|10⟩ − |01⟩)/√2`.
pub fn singlet() -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_slice(&[r(0.0), r(-s), r(s), r(0.0)]).unwrap()
}

/// Joint law of `σ_u ⊗ 1` and `1 ⊗ σ_v` on the singlet,
/// labelled by the eigenvalue pair.
pub fn singlet_correlations(u: &BlochVector, v: &BlochVector) -> Result<OutcomeDistribution> {
    for w in [u, v] {
        if (w.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::OutOfRange(format!("direction has norm {}", w.norm())));
        }
    }
    let (mu, _) = from_observable(&Hermitian::pauli_dot(u.as_array()));
    let (mv, _) = from_observable(&Hermitian::pauli_dot(v.as_array()));
    distribution(&DensityMatrix::pure(&singlet()), &product_measurement(mu.povm(), mv.povm()))
}

/// `P(a = b)` from a joint law produced by [`singlet_correlations`].
pub fn p_equal(law: &OutcomeDistribution) -> f64 {
    law.labels
        .iter()
        .zip(&law.probs)
        .filter(|(l, _)| {
            let signs: Vec<bool> = l.split(',').map(|x| x.parse::<f64>().map(|v| v > 0.0).unwrap_or(false)).collect();
            signs.len() == 2 && signs[0] == signs[1]
        })
        .map(|(_, p)| p)
        .sum()
}

fn in_plane(deg: f64) -> BlochVector {
    BlochVector::from_polar(PI / 2.0, deg.to_radians())
}

/// A deterministic local strategy: the answers `X₁, X₂` of party 1 for
/// directions `u₁, u₂`, and `Y₁, Y₂` of party 2 for `v₁, v₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LhvStrategy {
    pub x1: i8,
    pub x2: i8,
    pub y1: i8,
    pub y2: i8,
}

impl LhvStrategy {
    /// All 16 deterministic strategies.
    pub fn all() -> Vec<LhvStrategy> {
        (0..16)
            .map(|k| {
                let s = |b: usize| if (k >> b) & 1 == 1 { 1 } else { -1 };
                LhvStrategy { x1: s(0), x2: s(1), y1: s(2), y2: s(3) }
            })
            .collect()
    }

    /// Indicators of `X₁=Y₁, X₁=Y₂, Y₂=X₂, X₂=Y₁` in the order of the Bell table.
    pub fn equalities(&self) -> [f64; 4] {
        let e = |a: i8, b: i8| (a == b) as i32 as f64;
        [e(self.x1, self.y1), e(self.x1, self.y2), e(self.y2, self.x2), e(self.x2, self.y1)]
    }
}

/// Mixture weights over [`LhvStrategy::all`].
pub fn lhv_mixture_table(weights: &[f64]) -> Result<[f64; 4]> {
    if weights.len() != 16 || weights.iter().any(|w| *w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid("LHV mixture needs 16 nonnegative weights summing to 1".into()));
    }
    let mut t = [0.0; 4];
    for (w, s) in weights.iter().zip(LhvStrategy::all()) {
        for (ti, e) in t.iter_mut().zip(s.equalities()) {
            *ti += w * e;
        }
    }
    Ok(t)
}

/// Smallest Euclidean distance from `target` (first `target.len()` entries
/// of the Bell table) to the set of tables reachable by LHV mixtures,
/// computed by Frank–Wolfe over the 16-vertex simplex.
pub fn lhv_distance(target: &[f64]) -> f64 {
    let k = target.len();
    let verts: Vec<[f64; 4]> = LhvStrategy::all().iter().map(|s| s.equalities()).collect();
    let mut w = vec![1.0 / 16.0; 16];
    let table = |w: &[f64]| -> Vec<f64> {
        (0..k).map(|j| w.iter().zip(&verts).map(|(wi, v)| wi * v[j]).sum()).collect()
    };
    for it in 0..20_000 {
        let t = table(&w);
        let grad: Vec<f64> = t.iter().zip(target).map(|(a, b)| a - b).collect();
        let (best, _) = verts
            .iter()
            .enumerate()
            .map(|(i, v)| (i, (0..k).map(|j| v[j] * grad[j]).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let gamma = 2.0 / (it as f64 + 2.0);
        for (i, wi) in w.iter_mut().enumerate() {
            *wi *= 1.0 - gamma;
            if i == best {
                *wi += gamma;
            }
        }
    }
    table(&w).iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct BellRow {
    pub setting: String,
    pub p_equal_quantum: f64,
    /// Whether LHV mixtures can reproduce this row together with all rows above it.
    pub lhv_bound_satisfiable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BellReport {
    pub rows: Vec<BellRow>,
    /// `max_s [X₁=Y₁] − ([X₁=Y₂] + [Y₂=X₂] + [X₂=Y₁])` over deterministic strategies.
    pub lhv_max: f64,
    /// `P(X₁=Y₁) − (P(X₁=Y₂) + P(Y₂=X₂) + P(X₂=Y₁))` for the singlet.
    pub quantum_margin: f64,
    pub violated: bool,
    /// `X₁≠Y₂ ∧ Y₂≠X₂ ∧ X₂≠Y₁ ⇒ X₁≠Y₁` for all 16 strategies.
    pub implication_holds: bool,
}

impl BellReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("setting,p_equal_quantum,lhv_bound_satisfiable\n");
        for row in &self.rows {
            s.push_str(&format!("{},{:.14e},{}\n", row.setting, row.p_equal_quantum, row.lhv_bound_satisfiable));
        }
        s
    }
}

/// Directions `u₁=0°, u₂=120°, v₁=180°, v₂=60°` on a great circle.
pub fn bell_demo() -> Result<BellReport> {
    let (u1, u2, v1, v2) = (0.0, 120.0, 180.0, 60.0);
    let settings = [(u1, v1), (u1, v2), (u2, v2), (u2, v1)];
    let mut probs = Vec::new();
    for (a, b) in settings {
        probs.push(p_equal(&singlet_correlations(&in_plane(a), &in_plane(b))?));
    }
    let rows = settings
        .iter()
        .zip(&probs)
        .enumerate()
        .map(|(k, ((a, b), p))| BellRow {
            setting: format!("u{}v{}:{a}-{b}", [1, 1, 2, 2][k], [1, 2, 2, 1][k]),
            p_equal_quantum: *p,
            lhv_bound_satisfiable: lhv_distance(&probs[..=k]) < 1e-3,
        })
        .collect();
    let strategies = LhvStrategy::all();
    let lhv_max = strategies
        .iter()
        .map(|s| {
            let e = s.equalities();
            e[0] - (e[1] + e[2] + e[3])
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let implication_holds = strategies.iter().all(|s| {
        !(s.x1 != s.y2 && s.y2 != s.x2 && s.x2 != s.y1) || s.x1 != s.y1
    });
    let quantum_margin = probs[0] - (probs[1] + probs[2] + probs[3]);
    Ok(BellReport { rows, lhv_max, quantum_margin, violated: quantum_margin > lhv_max + 1e-12, implication_holds })
}

/// Bell vectors `Φ₁, Φ₂, Ψ₁, Ψ₂` on qubits 1 and 2.
pub fn bell_basis() -> [(String, StateVector); 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: [f64; 4]| StateVector::from_slice(&a.map(|x| r(x * s))).unwrap();
    [
        ("Phi1".to_string(), v([0.0, -1.0, 1.0, 0.0])),
        ("Phi2".to_string(), v([0.0, 1.0, 1.0, 0.0])),
        ("Psi1".to_string(), v([1.0, 0.0, 0.0, 1.0])),
        ("Psi2".to_string(), v([-1.0, 0.0, 0.0, 1.0])),
    ]
}

/// Correction applied on qubit 3 after each Bell outcome. With the input
/// `α|0⟩ + β|1⟩` on qubit 1 and the singlet on qubits 2, 3, the conditional
/// states are `−(α|0⟩+β|1⟩)`, `α|0⟩−β|1⟩`, `β|0⟩−α|1⟩`, `β|0⟩+α|1⟩`.
pub fn corrections() -> [CMatrix; 4] {
    let m = |a: [f64; 4]| CMatrix::from_row_slice(2, 2, &a.map(r));
    [
        identity(2),
        m([1.0, 0.0, 0.0, -1.0]),
        m([0.0, -1.0, 1.0, 0.0]),
        m([0.0, 1.0, 1.0, 0.0]),
    ]
}

/// The source-side simple instrument with projectors `|B⟩⟨B| ⊗ 1`.
pub fn bell_instrument() -> KrausInstrument {
    let (labels, kraus) = bell_basis()
        .into_iter()
        .map(|(l, b)| (l, vec![tensor_product(b.projector().matrix(), &identity(2))]))
        .unzip();
    KrausInstrument::new(labels, kraus).expect("Bell projectors resolve the identity")
}

#[derive(Debug, Clone, Serialize)]
pub struct TeleportOutcome {
    pub outcome: String,
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct TeleportResult {
    pub outcome: String,
    pub probabilities: [f64; 4],
    pub output: StateVector,
    pub fidelity: f64,
    /// Result for every possible outcome, in Bell-basis order.
    pub all: Vec<TeleportOutcome>,
}

fn principal_vector(rho: &DensityMatrix) -> StateVector {
    StateVector::normalized(rho.eig().vector(0)).expect("nonzero eigenvector")
}

/// Teleports `α|0⟩ + β|1⟩`; the Bell outcome is drawn from stream `(seed, 0)`.
pub fn teleport(alpha: C64, beta: C64, seed: u64) -> Result<TeleportResult> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized((norm - 1.0).abs()));
    }
    let input = StateVector::from_slice(&[alpha, beta])?;
    let joint = DensityMatrix::pure(&input.tensor(&singlet()));
    let fam = apply(&bell_instrument(), &joint)?;
    let corr = corrections();
    let mut all = Vec::new();
    let mut outputs = Vec::new();
    for (k, u) in corr.iter().enumerate() {
        let post = fam.posteriors[k].as_ref().ok_or_else(|| Error::Invalid("zero-probability Bell outcome".into()))?;
        let third = partial_trace(post, &[2, 2, 2], 2)?;
        let out = StateVector::normalized(u * principal_vector(&third).vector())?;
        all.push(TeleportOutcome { outcome: fam.labels[k].clone(), probability: fam.probs[k], fidelity: out.fidelity(&input) });
        outputs.push(out);
    }
    let mut rng = random::stream(seed, 0);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut pick = 3;
    for (k, p) in fam.probs.iter().enumerate() {
        acc += p;
        if u < acc {
            pick = k;
            break;
        }
    }
    Ok(TeleportResult {
        outcome: fam.labels[pick].clone(),
        probabilities: [fam.probs[0], fam.probs[1], fam.probs[2], fam.probs[3]],
        output: outputs[pick].clone(),
        fidelity: all[pick].fidelity,
        all,
    })
}

#[derive(Debug, Clone)]
pub struct DecoherenceReport {
    /// Averaged joint state on `C² ⊗ C^D`, qubit first.
    pub rho: DensityMatrix,
    /// Frobenius norm of the off-diagonal qubit blocks.
    pub offdiag_norm: f64,
    /// The block-diagonal limit `|α|² UψψU* ⊕ |β|² ψψ*`.
    pub limit: DensityMatrix,
}

/// Averages the joint state `α|0⟩⊗U_εψ + β|1⟩⊗ψ`, `U_ε = e^{−i(Hτ + ε)}`,
/// over `n_phase` equally spaced `ε ∈ [0, 2π)` (units with `ħ = 1`).
pub fn decoherence_average(
    alpha: C64,
    beta: C64,
    h: &Hermitian,
    tau: f64,
    psi: &StateVector,
    n_phase: usize,
) -> Result<DecoherenceReport> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized((norm - 1.0).abs()));
    }
    if h.dim() != psi.dim() {
        return Err(Error::DimMismatch("detector Hamiltonian and state".into()));
    }
    if n_phase == 0 {
        return Err(Error::OutOfRange("n_phase must be positive".into()));
    }
    let d = psi.dim();
    let evolved = h.exp_i(-tau) * psi.vector();
    let q0 = CVector::from_vec(vec![r(1.0), r(0.0)]);
    let q1 = CVector::from_vec(vec![r(0.0), r(1.0)]);
    let mut avg = CMatrix::zeros(2 * d, 2 * d);
    for k in 0..n_phase {
        let eps = 2.0 * PI * k as f64 / n_phase as f64;
        let branch0 = &evolved * (alpha * C64::from_polar(1.0, -eps));
        let v = crate::qcore::tensor_vec(&q0, &branch0) + crate::qcore::tensor_vec(&q1, &(psi.vector() * beta));
        avg += &v * v.adjoint();
    }
    avg /= r(n_phase as f64);
    let offdiag = avg.view((0, d), (d, d)).into_owned();
    let offdiag_norm = std::f64::consts::SQRT_2 * frobenius(&offdiag);
    let mut limit = CMatrix::zeros(2 * d, 2 * d);
    limit.view_mut((0, 0), (d, d)).copy_from(&(&evolved * evolved.adjoint() * r(alpha.norm_sqr())));
    limit.view_mut((d, d), (d, d)).copy_from(&(psi.vector() * psi.vector().adjoint() * r(beta.norm_sqr())));
    Ok(DecoherenceReport {
        rho: DensityMatrix::new(avg)?,
        offdiag_norm,
        limit: DensityMatrix::new(limit)?,
    })
}
