//! Completely positive instruments in Kraus form.
//!
//! Convention: an outcome `x` with Kraus operators `W_i(x)` occurs with
//! probability `Σ tr{ρ W W*}` and leaves the posterior `Σ W*ρW`, normalized.
//! In the observable picture `N({x})[Y] = Σ W Y W*`, so `N({x})[1]` is the
//! induced POVM element and `Σ_x Σ_i W W* = 1`.

use crate::error::{Error, Result};
use crate::measure::{from_observable, Povm};
use crate::qcore::{frobenius, identity, tensor_product, trace, CMatrix, CVector, DensityMatrix, Hermitian, StateVector};
use crate::qinfo::ParametricModel;

const TOL_NORMALIZATION: f64 = 1e-9;
/// Outcomes below this probability have no posterior.
pub const TOL_ZERO_PROB: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct KrausInstrument {
    dim: usize,
    outcomes: Vec<String>,
    kraus: Vec<Vec<CMatrix>>,
}

impl KrausInstrument {
    pub fn new(outcomes: Vec<String>, kraus: Vec<Vec<CMatrix>>) -> Result<Self> {
        if outcomes.len() != kraus.len() || kraus.is_empty() {
            return Err(Error::DimMismatch("one Kraus list per outcome is required".into()));
        }
        let d = kraus
            .iter()
            .flatten()
            .next()
            .map(|w| w.nrows())
            .ok_or_else(|| Error::Invalid("instrument has no Kraus operators".into()))?;
        if kraus.iter().flatten().any(|w| w.nrows() != d || w.ncols() != d) {
            return Err(Error::DimMismatch("Kraus operators must all be d x d".into()));
        }
        let total = kraus.iter().flatten().fold(CMatrix::zeros(d, d), |acc, w| acc + w * w.adjoint());
        let defect = frobenius(&(total - identity(d)));
        if defect > TOL_NORMALIZATION {
            return Err(Error::KrausNotNormalized(defect));
        }
        Ok(KrausInstrument { dim: d, outcomes, kraus })
    }

    /// Numbered outcomes `"0"`, `"1"`, ...
    pub fn from_kraus(kraus: Vec<Vec<CMatrix>>) -> Result<Self> {
        let labels = (0..kraus.len()).map(|k| k.to_string()).collect();
        KrausInstrument::new(labels, kraus)
    }

    /// `W = 1` with a single outcome.
    pub fn trivial(d: usize) -> Self {
        KrausInstrument { dim: d, outcomes: vec!["0".into()], kraus: vec![vec![identity(d)]] }
    }

    /// `W(x) = m(x)^{1/2}`; its induced measurement is `m`.
    pub fn from_povm_sqrt(m: &Povm) -> Self {
        let kraus = m.elements().iter().map(|e| vec![e.psd_sqrt().into_matrix()]).collect();
        KrausInstrument { dim: m.dim(), outcomes: m.labels().to_vec(), kraus }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn kraus(&self) -> &[Vec<CMatrix>] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|l| l == label)
    }

    /// Unnormalized posterior `N({x})` in the state picture: `Σ W*ρW`.
    pub fn operate(&self, x: usize, rho: &CMatrix) -> CMatrix {
        self.kraus[x]
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, w| acc + w.adjoint() * rho * w)
    }

    /// Observable picture `N({x})[Y] = Σ W Y W*`.
    pub fn evaluate(&self, x: usize, y: &CMatrix) -> CMatrix {
        self.kraus[x]
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, w| acc + w * y * w.adjoint())
    }

    /// `N(A)[Y]` for a set of outcome indices.
    pub fn evaluate_set(&self, set: &[usize], y: &CMatrix) -> CMatrix {
        set.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, &x| acc + self.evaluate(x, y))
    }

    /// Total state map `ρ ↦ Σ_x Σ W*ρW`.
    pub fn total_map(&self, rho: &CMatrix) -> CMatrix {
        (0..self.len()).fold(CMatrix::zeros(self.dim, self.dim), |acc, x| acc + self.operate(x, rho))
    }
}

/// Outcome law and posterior states for one prior.
#[derive(Debug, Clone)]
pub struct PosteriorFamily {
    pub labels: Vec<String>,
    pub probs: Vec<f64>,
    /// `None` where the outcome probability is below [`TOL_ZERO_PROB`].
    pub posteriors: Vec<Option<DensityMatrix>>,
}

impl PosteriorFamily {
    pub fn prob(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|k| self.probs[k])
    }

    pub fn posterior(&self, label: &str) -> Option<&DensityMatrix> {
        self.labels.iter().position(|l| l == label).and_then(|k| self.posteriors[k].as_ref())
    }

    /// `Σ π(x) σ(x)`, the unconditional post-measurement state.
    pub fn mixture(&self) -> CMatrix {
        let d = self.posteriors.iter().flatten().next().map(|s| s.dim()).unwrap_or(0);
        self.posteriors
            .iter()
            .zip(&self.probs)
            .filter_map(|(s, p)| s.as_ref().map(|s| s.matrix() * crate::qcore::r(*p)))
            .fold(CMatrix::zeros(d, d), |a, b| a + b)
    }
}

pub fn apply(n: &KrausInstrument, rho: &DensityMatrix) -> Result<PosteriorFamily> {
    if rho.dim() != n.dim() {
        return Err(Error::DimMismatch(format!("state dim {} vs instrument dim {}", rho.dim(), n.dim())));
    }
    let mut probs = Vec::with_capacity(n.len());
    let mut posteriors = Vec::with_capacity(n.len());
    for x in 0..n.len() {
        let post = n.operate(x, rho.matrix());
        let p = trace(&post).re;
        if p < TOL_ZERO_PROB {
            probs.push(p.max(0.0));
            posteriors.push(None);
        } else {
            probs.push(p);
            posteriors.push(Some(DensityMatrix::from_raw(crate::qcore::symmetrize(&(post / crate::qcore::r(p))))));
        }
    }
    Ok(PosteriorFamily { labels: n.outcomes.clone(), probs, posteriors })
}

/// `M({x}) = N({x})[1] = Σ W W*`.
pub fn induced_povm(n: &KrausInstrument) -> Povm {
    let elements = (0..n.len())
        .map(|x| Hermitian::from_raw(crate::qcore::symmetrize(&n.evaluate(x, &identity(n.dim)))))
        .collect();
    Povm::from_parts_unchecked(n.outcomes.clone(), elements)
}

/// `N1` followed by `N2`; outcomes `"x,y"` with Kraus products `W1_i(x) W2_j(y)`.
pub fn compose(n1: &KrausInstrument, n2: &KrausInstrument) -> Result<KrausInstrument> {
    if n1.dim != n2.dim {
        return Err(Error::DimMismatch("composed instruments must share the dimension".into()));
    }
    let mut outcomes = Vec::new();
    let mut kraus = Vec::new();
    for (x, lx) in n1.outcomes.iter().enumerate() {
        for (y, ly) in n2.outcomes.iter().enumerate() {
            outcomes.push(format!("{lx},{ly}"));
            let mut ops = Vec::new();
            for w1 in &n1.kraus[x] {
                for w2 in &n2.kraus[y] {
                    ops.push(w1 * w2);
                }
            }
            kraus.push(ops);
        }
    }
    Ok(KrausInstrument { dim: n1.dim, outcomes, kraus })
}

/// Merges outcomes with equal image under `map`, keeping first-appearance order.
pub fn coarsen_instrument(n: &KrausInstrument, map: impl Fn(&str) -> String) -> KrausInstrument {
    let mut outcomes: Vec<String> = Vec::new();
    let mut kraus: Vec<Vec<CMatrix>> = Vec::new();
    for (label, ops) in n.outcomes.iter().zip(&n.kraus) {
        let t = map(label);
        match outcomes.iter().position(|o| *o == t) {
            Some(k) => kraus[k].extend(ops.iter().cloned()),
            None => {
                outcomes.push(t);
                kraus.push(ops.clone());
            }
        }
    }
    KrausInstrument { dim: n.dim, outcomes, kraus }
}

/// Projection-postulate instrument of an observable: one projector per
/// distinct eigenvalue, labelled by the eigenvalue.
pub fn simple_instrument(x: &Hermitian) -> KrausInstrument {
    let (pm, _) = from_observable(x);
    let povm = pm.into_povm();
    let kraus = povm.elements().iter().map(|e| vec![e.matrix().clone()]).collect();
    KrausInstrument { dim: x.dim(), outcomes: povm.labels().to_vec(), kraus }
}

/// `C = Σ_ij E_ij ⊗ map(E_ij)` for a linear map on `d × d` matrices.
pub fn choi_matrix(d: usize, map: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let mut c = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut e = CMatrix::zeros(d, d);
            e[(i, j)] = crate::qcore::r(1.0);
            c += tensor_product(&e, &map(&e));
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiReport {
    pub completely_positive: bool,
    /// Smallest eigenvalue of the unnormalized Choi matrix.
    pub min_eigenvalue: f64,
    /// Smallest eigenvalue after dividing by `d`.
    pub min_eigenvalue_normalized: f64,
}

pub fn choi_cp_check_map(d: usize, map: impl Fn(&CMatrix) -> CMatrix) -> ChoiReport {
    let c = choi_matrix(d, map);
    let min = Hermitian::from_raw(crate::qcore::symmetrize(&c)).min_eigenvalue();
    ChoiReport { completely_positive: min >= -1e-9, min_eigenvalue: min, min_eigenvalue_normalized: min / d as f64 }
}

/// CP check of the total state map of an instrument.
pub fn choi_cp_check(n: &KrausInstrument) -> ChoiReport {
    choi_cp_check_map(n.dim, |e| n.total_map(e))
}

/// The transpose map, positive but not completely positive.
pub fn transpose_map(m: &CMatrix) -> CMatrix {
    m.transpose()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExhaustivityReport {
    pub exhaustive: bool,
    pub max_deviation: f64,
    /// Every outcome has a single rank-one Kraus operator, so posteriors are
    /// fixed whatever the prior.
    pub trivially_exhaustive: bool,
}

/// Checks that posteriors do not depend on the parameter over `grid`.
pub fn is_exhaustive(n: &KrausInstrument, model: &ParametricModel, grid: &[Vec<f64>]) -> Result<ExhaustivityReport> {
    if grid.is_empty() {
        return Err(Error::Invalid("exhaustivity needs a nonempty parameter grid".into()));
    }
    let fams = grid.iter().map(|t| apply(n, &model.state(t))).collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for x in 0..n.len() {
        if fams.iter().any(|f| f.probs[x] < 1e-10 || f.posteriors[x].is_none()) {
            continue;
        }
        let first = fams[0].posteriors[x].as_ref().unwrap();
        for f in &fams[1..] {
            worst = worst.max(frobenius(&(f.posteriors[x].as_ref().unwrap().matrix() - first.matrix())));
        }
    }
    Ok(ExhaustivityReport { exhaustive: worst < 1e-8, max_deviation: worst, trivially_exhaustive: rank_one(n) })
}

fn rank_one(n: &KrausInstrument) -> bool {
    n.kraus.iter().all(|ops| {
        ops.len() == 1 && {
            let w = &ops[0];
            let sv = w.clone().singular_values();
            let top = sv.max();
            sv.iter().filter(|s| **s > 1e-10 * top.max(1.0)).count() == 1
        }
    })
}

/// `W_i(x) = |ψ_x⟩⟨φ_{i,x}|`, completely exhaustive. Requires
/// `Σ_x (Σ_i ‖φ_{i,x}‖²) |ψ_x⟩⟨ψ_x| = 1`.
pub fn exhaustive_constructor(psi: &[StateVector], phi: &[Vec<CVector>]) -> Result<KrausInstrument> {
    if psi.len() != phi.len() || psi.is_empty() {
        return Err(Error::DimMismatch("one vector family per outcome".into()));
    }
    let d = psi[0].dim();
    if psi.iter().any(|p| p.dim() != d) || phi.iter().flatten().any(|v| v.len() != d) {
        return Err(Error::DimMismatch("vectors must share the dimension".into()));
    }
    let kraus: Vec<Vec<CMatrix>> = psi
        .iter()
        .zip(phi)
        .map(|(p, fs)| fs.iter().map(|f| p.vector() * f.adjoint()).collect())
        .collect();
    let total = kraus.iter().flatten().fold(CMatrix::zeros(d, d), |acc, w| acc + w * w.adjoint());
    let defect = frobenius(&(total - identity(d)));
    if defect > TOL_NORMALIZATION {
        return Err(Error::NotNormalized(defect));
    }
    KrausInstrument::from_kraus(kraus)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutReport {
    pub is_cut: bool,
    pub max_posterior_deviation: f64,
    pub max_probability_deviation: f64,
}

/// Verifies `σ(x; ρ(ψ,φ)) = M_x(ψ)` and `π(x; ρ(ψ,φ)) = f_x(φ)` over the grids.
pub fn quantum_cut_check(
    n: &KrausInstrument,
    family: impl Fn(&[f64], &[f64]) -> DensityMatrix,
    f: impl Fn(usize, &[f64]) -> f64,
    m: impl Fn(usize, &[f64]) -> DensityMatrix,
    psi_grid: &[Vec<f64>],
    phi_grid: &[Vec<f64>],
) -> Result<CutReport> {
    let mut dp = 0.0f64;
    let mut ds = 0.0f64;
    for psi in psi_grid {
        for phi in phi_grid {
            let fam = apply(n, &family(psi, phi))?;
            for x in 0..n.len() {
                dp = dp.max((fam.probs[x] - f(x, phi)).abs());
                if let Some(s) = &fam.posteriors[x] {
                    ds = ds.max(frobenius(&(s.matrix() - m(x, psi).matrix())));
                }
            }
        }
    }
    Ok(CutReport { is_cut: dp < 1e-9 && ds < 1e-9, max_posterior_deviation: ds, max_probability_deviation: dp })
}
