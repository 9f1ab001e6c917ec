//! Random states, operators and measurements, plus deterministic seed derivation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::measure::Povm;
use crate::qcore::{c, r, CMatrix, CVector, DensityMatrix, Hermitian, StateVector};

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for replication `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

/// Independent generator for replication `index`; scheduling-independent.
pub fn stream(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Hermitian {
    let g = ginibre(d, d, rng);
    Hermitian::from_raw((&g + g.adjoint()) * r(0.5))
}

/// Full-rank density matrix from the Ginibre ensemble.
pub fn density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(d, d, rng);
    DensityMatrix::normalize(&g * g.adjoint()).expect("Ginibre product is positive")
}

pub fn state_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> StateVector {
    let v = CVector::from_fn(d, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    StateVector::normalized(v).expect("Gaussian vector is nonzero")
}

/// Haar-ish unitary from the QR decomposition of a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (q, rmat) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = rmat[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                r(1.0)
            }
        } else {
            r(0.0)
        }
    });
    q * phases
}

/// POVM with `outcomes` elements of rank up to `rank`, made from
/// `S^{-1/2} G_x S^{-1/2}` with `S = Σ G_x`. Needs `outcomes · rank ≥ d`
/// so that `S` is invertible.
pub fn povm<R: Rng + ?Sized>(d: usize, outcomes: usize, rank: usize, rng: &mut R) -> Povm {
    assert!(outcomes * rank >= d, "random POVM needs outcomes * rank >= d");
    let raw: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let b = ginibre(d, rank, rng);
            &b * b.adjoint()
        })
        .collect();
    let total = raw.iter().fold(CMatrix::zeros(d, d), |acc, g| acc + g);
    let inv_sqrt = Hermitian::from_raw(total).map_spectrum(|x| 1.0 / x.sqrt());
    let s = inv_sqrt.matrix();
    let elements = raw
        .into_iter()
        .map(|g| Hermitian::from_raw(s * g * s))
        .collect();
    Povm::new(elements).expect("normalized random POVM is valid")
}
