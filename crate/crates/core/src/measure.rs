//! Finite-outcome generalized measurements (POVMs) and simple measurements
//! (projector-valued), with coarsening, rank-one refinement, products and the
//! Naimark dilation.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::qcore::{
    frobenius, identity, r, trace, CMatrix, CVector, DensityMatrix, Hermitian,
};

const TOL_RESOLUTION: f64 = 1e-9;
const TOL_PSD: f64 = -1e-10;
const TOL_PROJECTOR: f64 = 1e-9;
/// Eigenvalues closer than this are treated as one degenerate eigenvalue.
pub const CLUSTER_GAP: f64 = 1e-8;

/// Operator-valued probability measure on a finite outcome set. Elements are
/// positive and sum to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    labels: Vec<String>,
    elements: Vec<Hermitian>,
}

impl Povm {
    /// Validates elements labelled `0, 1, …`.
    pub fn new(elements: Vec<Hermitian>) -> Result<Self> {
        let labels = (0..elements.len()).map(|i| i.to_string()).collect();
        Self::with_labels(labels, elements)
    }

    pub fn with_labels(labels: Vec<String>, elements: Vec<Hermitian>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Invalid("a POVM needs at least one element".into()));
        }
        if labels.len() != elements.len() {
            return Err(Error::DimMismatch(format!(
                "{} labels for {} elements",
                labels.len(),
                elements.len()
            )));
        }
        let d = elements[0].dim();
        if let Some(e) = elements.iter().find(|e| e.dim() != d) {
            return Err(Error::DimMismatch(format!("element dims {} and {}", d, e.dim())));
        }
        for e in &elements {
            let min = e.min_eigenvalue();
            if min < TOL_PSD {
                return Err(Error::NotPsd(min));
            }
        }
        let total = elements
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, e| acc + e.matrix());
        let dev = frobenius(&(total - identity(d)));
        if dev > TOL_RESOLUTION {
            return Err(Error::NotResolution(dev));
        }
        Ok(Povm { labels, elements })
    }

    /// The trivial measurement `{1}`.
    pub fn trivial(d: usize) -> Self {
        Povm { labels: vec!["1".into()], elements: vec![Hermitian::identity(d)] }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> &[Hermitian] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &Hermitian {
        &self.elements[k]
    }

    /// True when every element is a projector and distinct elements are orthogonal.
    pub fn is_projective(&self) -> bool {
        Pprom::check(self).is_ok()
    }

    /// Pushes outcomes forward along `map`; merged labels keep first-appearance order.
    pub fn coarsen(&self, map: impl Fn(&str) -> String) -> Povm {
        let mut labels: Vec<String> = Vec::new();
        let mut slot: HashMap<String, usize> = HashMap::new();
        let mut sums: Vec<CMatrix> = Vec::new();
        for (lab, e) in self.labels.iter().zip(&self.elements) {
            let target = map(lab);
            let k = *slot.entry(target.clone()).or_insert_with(|| {
                labels.push(target.clone());
                sums.push(CMatrix::zeros(self.dim(), self.dim()));
                sums.len() - 1
            });
            sums[k] += e.matrix();
        }
        Povm { labels, elements: sums.into_iter().map(Hermitian::from_raw).collect() }
    }

    /// Splits each element into rank-one pieces `λ|ξ⟩⟨ξ|` from its spectrum.
    pub fn refine_rank1(&self) -> Refinement {
        let mut labels = Vec::new();
        let mut elements = Vec::new();
        let mut source = Vec::new();
        let mut vectors = Vec::new();
        for (k, (lab, e)) in self.labels.iter().zip(&self.elements).enumerate() {
            let eig = e.eig();
            let mut piece = 0;
            for (j, &lam) in eig.values.iter().enumerate() {
                if lam <= 1e-12 {
                    continue;
                }
                let v = eig.vector(j) * r(lam.sqrt());
                labels.push(format!("{lab}#{piece}"));
                elements.push(Hermitian::projector(&v));
                vectors.push(v);
                source.push(k);
                piece += 1;
            }
        }
        Refinement { povm: Povm { labels, elements }, source, vectors }
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<String>, elements: Vec<Hermitian>) -> Self {
        Povm { labels, elements }
    }
}

/// Rank-one refinement of a POVM. `source[k]` is the index of the original
/// element that piece `k` came from; `vectors[k]` is the unnormalized `v` with
/// piece `k` equal to `|v⟩⟨v|`.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub povm: Povm,
    pub source: Vec<usize>,
    pub vectors: Vec<CVector>,
}

impl Refinement {
    /// Coarsens back to the original outcome set.
    pub fn merge_back(&self, original: &Povm) -> Povm {
        let d = original.dim();
        let mut sums = vec![CMatrix::zeros(d, d); original.len()];
        for (e, &s) in self.povm.elements.iter().zip(&self.source) {
            sums[s] += e.matrix();
        }
        Povm {
            labels: original.labels.clone(),
            elements: sums.into_iter().map(Hermitian::from_raw).collect(),
        }
    }
}

/// Simple (projector-valued) measurement.
#[derive(Debug, Clone)]
pub struct Pprom(Povm);

impl Pprom {
    pub fn new(povm: Povm) -> Result<Self> {
        Self::check(&povm)?;
        Ok(Pprom(povm))
    }

    fn check(povm: &Povm) -> Result<()> {
        for (a, ea) in povm.elements.iter().enumerate() {
            let m = ea.matrix();
            let dev = frobenius(&(m * m - m));
            if dev > TOL_PROJECTOR {
                return Err(Error::Invalid(format!("element {a} is not a projector ({dev:e})")));
            }
            for eb in &povm.elements[a + 1..] {
                let dev = frobenius(&(m * eb.matrix()));
                if dev > TOL_PROJECTOR {
                    return Err(Error::Invalid(format!("elements are not orthogonal ({dev:e})")));
                }
            }
        }
        Ok(())
    }

    pub fn povm(&self) -> &Povm {
        &self.0
    }

    pub fn into_povm(self) -> Povm {
        self.0
    }
}

/// Validates a list of elements as a POVM.
pub fn validate_povm(elements: Vec<Hermitian>) -> Result<Povm> {
    Povm::new(elements)
}

/// Outcome probabilities of a measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub labels: Vec<String>,
    pub probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn prob(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|k| self.probs[k])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Pushforward along a label map, matching [`Povm::coarsen`] ordering.
    pub fn pushforward(&self, map: impl Fn(&str) -> String) -> OutcomeDistribution {
        let mut labels: Vec<String> = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        for (lab, &p) in self.labels.iter().zip(&self.probs) {
            let t = map(lab);
            match labels.iter().position(|l| *l == t) {
                Some(k) => probs[k] += p,
                None => {
                    labels.push(t);
                    probs.push(p);
                }
            }
        }
        OutcomeDistribution { labels, probs }
    }
}

/// `x ↦ tr(ρ m(x))`.
pub fn distribution(rho: &DensityMatrix, m: &Povm) -> Result<OutcomeDistribution> {
    if rho.dim() != m.dim() {
        return Err(Error::DimMismatch(format!("state {} vs measurement {}", rho.dim(), m.dim())));
    }
    let probs = m
        .elements
        .iter()
        .map(|e| trace(&(rho.matrix() * e.matrix())).re.max(0.0))
        .collect();
    Ok(OutcomeDistribution { labels: m.labels.clone(), probs })
}

/// Spectral measurement of an observable: one projector per distinct
/// eigenvalue (clustered within [`CLUSTER_GAP`]), eigenvalues descending.
pub fn from_observable(x: &Hermitian) -> (Pprom, Vec<f64>) {
    let eig = x.eig();
    let d = x.dim();
    let mut groups: Vec<(Vec<f64>, CMatrix)> = Vec::new();
    for (j, &lam) in eig.values.iter().enumerate() {
        let v = eig.vector(j);
        let proj = &v * v.adjoint();
        match groups.last_mut() {
            Some((vals, p)) if (vals[vals.len() - 1] - lam).abs() < CLUSTER_GAP => {
                vals.push(lam);
                *p += proj;
            }
            _ => groups.push((vec![lam], proj)),
        }
    }
    let values: Vec<f64> = groups
        .iter()
        .map(|(vals, _)| vals.iter().sum::<f64>() / vals.len() as f64)
        .collect();
    let labels = values.iter().map(|v| format!("{v}")).collect();
    let elements = groups.into_iter().map(|(_, p)| Hermitian::from_raw(p)).collect();
    debug_assert_eq!(d, x.dim());
    (Pprom(Povm { labels, elements }), values)
}

/// Product measurement `m(x) ⊗ m'(y)` with labels `"x,y"`.
pub fn product_measurement(a: &Povm, b: &Povm) -> Povm {
    let mut labels = Vec::with_capacity(a.len() * b.len());
    let mut elements = Vec::with_capacity(a.len() * b.len());
    for (la, ea) in a.labels.iter().zip(&a.elements) {
        for (lb, eb) in b.labels.iter().zip(&b.elements) {
            labels.push(format!("{la},{lb}"));
            elements.push(Hermitian::from_raw(ea.matrix().kronecker(eb.matrix())));
        }
    }
    Povm { labels, elements }
}

/// Realisation of a POVM as a simple measurement on `H ⊗ K` with the ancilla
/// `K` prepared in `|0⟩`.
#[derive(Debug, Clone)]
pub struct Dilation {
    pub ancilla_dim: usize,
    pub ancilla_state: DensityMatrix,
    pub pprom: Pprom,
    /// Orthogonal projection `H ⊗ K → H` onto `H ⊗ |0⟩`, as a `d × d·a` matrix.
    pub projection: CMatrix,
}

impl Dilation {
    /// `tr{(ρ ⊗ ρ_a) M̃(x)}` for every outcome.
    pub fn distribution(&self, rho: &DensityMatrix) -> Result<OutcomeDistribution> {
        distribution(&rho.tensor(&self.ancilla_state), self.pprom.povm())
    }

    /// `Π M̃(x) Π*`, which equals the original POVM.
    pub fn compressed(&self) -> Vec<CMatrix> {
        self.pprom
            .povm()
            .elements()
            .iter()
            .map(|e| &self.projection * e.matrix() * self.projection.adjoint())
            .collect()
    }
}

/// Naimark/Holevo dilation. The rank-one refinement `|v_k⟩⟨v_k|` defines the
/// isometry `V: ψ ↦ Σ_k ⟨v_k|ψ⟩ |k⟩`; it is placed on the columns `ψ ⊗ |0⟩`
/// of a unitary `U` on `H ⊗ K` (remaining columns by Gram-Schmidt), and
/// `M̃(x) = U* P_x U` with `P_x` the coordinate projector onto the pieces of `x`.
pub fn naimark_dilate(m: &Povm) -> Result<Dilation> {
    let d = m.dim();
    if m.is_projective() {
        return Ok(Dilation {
            ancilla_dim: 1,
            ancilla_state: DensityMatrix::pure(&crate::qcore::StateVector::basis(1, 0)),
            pprom: Pprom(m.clone()),
            projection: identity(d),
        });
    }
    let refined = m.refine_rank1();
    let pieces = refined.vectors.len();
    let a = pieces.div_ceil(d).max(2);
    let big = d * a;

    // column i*a of U is V e_i, i.e. the image of e_i ⊗ |0⟩
    let mut u = CMatrix::zeros(big, big);
    for i in 0..d {
        for (k, v) in refined.vectors.iter().enumerate() {
            u[(k, i * a)] = v[i].conj();
        }
    }
    let fixed: Vec<usize> = (0..d).map(|i| i * a).collect();
    complete_unitary(&mut u, &fixed);

    // coordinate k belongs to outcome source[k]; spare coordinates go to outcome 0
    let mut proj = vec![CMatrix::zeros(big, big); m.len()];
    for k in 0..big {
        let owner = refined.source.get(k).copied().unwrap_or(0);
        proj[owner][(k, k)] = r(1.0);
    }
    let elements: Vec<Hermitian> = proj
        .into_iter()
        .map(|p| Hermitian::from_raw(u.adjoint() * p * &u))
        .collect();

    let mut projection = CMatrix::zeros(d, big);
    for i in 0..d {
        projection[(i, i * a)] = r(1.0);
    }
    let dilation = Dilation {
        ancilla_dim: a,
        ancilla_state: DensityMatrix::pure(&crate::qcore::StateVector::basis(a, 0)),
        pprom: Pprom(Povm::from_parts_unchecked(m.labels.clone(), elements)),
        projection,
    };
    let dev = dilation
        .compressed()
        .iter()
        .zip(m.elements())
        .map(|(c, e)| frobenius(&(c - e.matrix())))
        .fold(0.0, f64::max);
    if dev > 1e-8 || !dilation.pprom.povm().is_projective() {
        return Err(Error::DilationFailure(dev));
    }
    Ok(dilation)
}

/// Fills the zero columns of `u` (all but `fixed`, which must be orthonormal)
/// with an orthonormal completion by modified Gram-Schmidt over unit vectors.
fn complete_unitary(u: &mut CMatrix, fixed: &[usize]) {
    let n = u.nrows();
    let mut basis: Vec<CVector> = fixed.iter().map(|&c| u.column(c).into_owned()).collect();
    let free: Vec<usize> = (0..n).filter(|c| !fixed.contains(c)).collect();
    let mut next = free.into_iter();
    for cand in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = CVector::zeros(n);
        v[cand] = r(1.0);
        for _ in 0..2 {
            for b in &basis {
                let ov = b.dotc(&v);
                v -= b * ov;
            }
        }
        let nv = v.norm();
        if nv > 1e-6 {
            v /= r(nv);
            let col = next.next().expect("free column available");
            u.set_column(col, &v);
            basis.push(v);
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::qcore::{sigma_x, BlochVector, StateVector};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    pub(crate) fn triad() -> Povm {
        let elems = (0..3)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 3.0;
                Hermitian::from_raw((identity(2) + crate::qcore::pauli_dot([a.cos(), a.sin(), 0.0])) * r(1.0 / 3.0))
            })
            .collect();
        Povm::new(elems).unwrap()
    }

    #[test]
    fn validation_examples() {
        let half = |s: f64| Hermitian::from_raw((identity(2) + sigma_x() * r(s)) * r(0.5));
        let m = validate_povm(vec![half(1.0), half(-1.0)]).unwrap();
        assert!(m.is_projective());
        let t = triad();
        assert!(!t.is_projective());
        assert!(validate_povm(vec![Hermitian::identity(3)]).unwrap().is_projective());

        assert!(matches!(
            validate_povm(vec![half(1.0)]),
            Err(Error::NotResolution(_))
        ));
        let neg = Hermitian::from_real_diagonal(&[2.0, 1.0]);
        let comp = Hermitian::from_real_diagonal(&[-1.0, 0.0]);
        assert!(matches!(validate_povm(vec![neg, comp]), Err(Error::NotPsd(_))));
    }

    #[test]
    fn distributions() {
        let t = triad();
        let p = distribution(&DensityMatrix::maximally_mixed(2), &t).unwrap();
        for q in &p.probs {
            assert!((q - 1.0 / 3.0).abs() < 1e-14);
        }
        let (z, _) = from_observable(&Hermitian::pauli_z());
        let p = distribution(&DensityMatrix::pure(&StateVector::basis(2, 0)), z.povm()).unwrap();
        assert_eq!(p.probs, vec![1.0, 0.0]);
        assert!(matches!(
            distribution(&DensityMatrix::maximally_mixed(3), &t),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn superposition_versus_mixture_under_plus_minus_basis() {
        let s = FRAC_1_SQRT_2;
        let plus = StateVector::normalized(CVector::from_column_slice(&[r(s), r(s)])).unwrap();
        let minus = StateVector::normalized(CVector::from_column_slice(&[r(s), r(-s)])).unwrap();
        let m = Povm::new(vec![plus.projector(), minus.projector()]).unwrap();
        let sup = distribution(&DensityMatrix::pure(&plus), &m).unwrap();
        let mix = distribution(&DensityMatrix::maximally_mixed(2), &m).unwrap();
        assert!((sup.probs[0] - 1.0).abs() < 1e-14 && sup.probs[1].abs() < 1e-14);
        assert!((mix.probs[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn observable_measurements() {
        let (z, vals) = from_observable(&Hermitian::pauli_z());
        assert_eq!(vals, vec![1.0, -1.0]);
        assert!(frobenius(&(z.povm().element(0).matrix() - StateVector::basis(2, 0).projector().matrix())) < 1e-14);

        let psi = crate::random::state_vector(2, &mut ChaCha8Rng::seed_from_u64(1));
        let x = Hermitian::from_raw(psi.projector().matrix() * r(2.0) - identity(2));
        let (pm, vals) = from_observable(&x);
        assert_eq!(pm.povm().len(), 2);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] + 1.0).abs() < 1e-12);
        assert!(frobenius(&(pm.povm().element(0).matrix() - psi.projector().matrix())) < 1e-12);

        let (one, vals) = from_observable(&Hermitian::identity(3));
        assert_eq!(one.povm().len(), 1);
        assert!((vals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn observable_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in 2..6 {
            let x = random::hermitian(d, &mut rng);
            let (pm, vals) = from_observable(&x);
            let rec = pm
                .povm()
                .elements()
                .iter()
                .zip(&vals)
                .fold(CMatrix::zeros(d, d), |acc, (p, &v)| acc + p.matrix() * r(v));
            assert!(frobenius(&(rec - x.matrix())) < 1e-9);
        }
    }

    #[test]
    fn coarsening() {
        let t = triad();
        assert_eq!(t.coarsen(|l| l.to_string()).elements(), t.elements());
        let merged = t.coarsen(|l| if l == "0" { "a".into() } else { "b".into() });
        let p = distribution(&DensityMatrix::maximally_mixed(2), &merged).unwrap();
        assert!((p.probs[0] - 1.0 / 3.0).abs() < 1e-14 && (p.probs[1] - 2.0 / 3.0).abs() < 1e-14);
        let trivial = t.coarsen(|_| "all".into());
        assert_eq!(trivial.len(), 1);
        assert!(frobenius(&(trivial.element(0).matrix() - identity(2))) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random::povm(3, 5, 2, &mut rng);
        let rho = random::density(3, &mut rng);
        let map = |l: &str| (l.parse::<usize>().unwrap() % 2).to_string();
        let lhs = distribution(&rho, &m.coarsen(map)).unwrap();
        let rhs = distribution(&rho, &m).unwrap().pushforward(map);
        assert_eq!(lhs.labels, rhs.labels);
        for (a, b) in lhs.probs.iter().zip(&rhs.probs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_refinement() {
        let (z, _) = from_observable(&Hermitian::pauli_z());
        assert_eq!(z.povm().refine_rank1().povm.len(), 2);

        let half = Hermitian::identity(2).scale(0.5);
        let split = Povm::new(vec![half.clone(), half]).unwrap();
        let refined = split.refine_rank1();
        assert_eq!(refined.povm.len(), 4);
        assert_eq!(refined.source, vec![0, 0, 1, 1]);

        let t = triad();
        let rt = t.refine_rank1();
        assert_eq!(rt.povm.len(), 3);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random::povm(4, 3, 3, &mut rng);
        let rf = m.refine_rank1();
        for e in rf.povm.elements() {
            let ev = e.eig().values;
            assert!(ev[1..].iter().all(|v| v.abs() < 1e-9));
        }
        let back = rf.merge_back(&m);
        for (a, b) in back.elements().iter().zip(m.elements()) {
            assert!(frobenius(&(a.matrix() - b.matrix())) < 1e-9);
        }
    }

    #[test]
    fn dilation_of_triad_and_projective() {
        let (z, _) = from_observable(&Hermitian::pauli_z());
        assert_eq!(naimark_dilate(z.povm()).unwrap().ancilla_dim, 1);

        let t = triad();
        let dil = naimark_dilate(&t).unwrap();
        assert!(dil.ancilla_dim * 2 >= 3);
        let p = dil.distribution(&DensityMatrix::maximally_mixed(2)).unwrap();
        for q in p.probs {
            assert!((q - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dilation_reproduces_random_qubit_povm() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let m = random::povm(2, 4, 2, &mut rng);
        let dil = naimark_dilate(&m).unwrap();
        for _ in 0..20 {
            let rho = random::density(2, &mut rng);
            let a = distribution(&rho, &m).unwrap();
            let b = dil.distribution(&rho).unwrap();
            for (x, y) in a.probs.iter().zip(&b.probs) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn product_measurements() {
        let (z, _) = from_observable(&Hermitian::pauli_z());
        let zz = product_measurement(z.povm(), z.povm());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, b) = (random::density(2, &mut rng), random::density(2, &mut rng));
        let joint = distribution(&a.tensor(&b), &zz).unwrap();
        let pa = distribution(&a, z.povm()).unwrap();
        let pb = distribution(&b, z.povm()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((joint.probs[2 * i + j] - pa.probs[i] * pb.probs[j]).abs() < 1e-12);
            }
        }

        // singlet: P(equal) = ½(1 − u·v)
        let s = FRAC_1_SQRT_2;
        let singlet = StateVector::from_slice(&[r(0.0), r(-s), r(s), r(0.0)]).unwrap();
        let u = BlochVector::from_polar(0.4, 1.1);
        let v = BlochVector::from_polar(2.0, -0.3);
        let (mu, _) = from_observable(&Hermitian::pauli_dot(u.as_array()));
        let (mv, _) = from_observable(&Hermitian::pauli_dot(v.as_array()));
        let joint = distribution(&DensityMatrix::pure(&singlet), &product_measurement(mu.povm(), mv.povm())).unwrap();
        let equal = joint.probs[0] + joint.probs[3];
        assert!((equal - 0.5 * (1.0 - u.dot(&v))).abs() < 1e-12);

        let tm = product_measurement(&Povm::trivial(2), z.povm());
        let p = distribution(&a.tensor(&b), &tm).unwrap();
        assert!((p.probs[0] - pb.probs[0]).abs() < 1e-12);
    }
}
