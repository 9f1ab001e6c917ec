//! Randomized invariants across modules.

use proptest::prelude::*;
use qinfer::epr::{decoherence_average, teleport};
use qinfer::instrument::{apply, choi_cp_check, induced_povm, KrausInstrument};
use qinfer::io::{from_json, to_json, MatrixJson, PovmJson};
use qinfer::measure::{distribution, naimark_dilate, product_measurement};
use qinfer::qcore::{frobenius, partial_trace, trace, DensityMatrix};
use qinfer::qinfo::{bc_audit, quantum_fisher, sld};
use qinfer::qmodels::{random_full_rank_model, random_unitary_model};
use qinfer::random;

fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    random::stream(seed, 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outcome_laws_are_probability_vectors(seed in any::<u64>(), d in 1usize..6, outcomes in 1usize..6) {
        let mut g = rng(seed);
        let rho = random::density(d, &mut g);
        let m = random::povm(d, outcomes.max(d), 1, &mut g);
        let law = distribution(&rho, &m).unwrap();
        prop_assert!((law.total() - 1.0).abs() < 1e-10);
        prop_assert!(law.probs.iter().all(|p| *p >= -1e-12));
    }

    #[test]
    fn partial_trace_inverts_tensor(seed in any::<u64>(), a in 1usize..4, b in 1usize..4) {
        let mut g = rng(seed);
        let ra = random::density(a, &mut g);
        let rb = random::density(b, &mut g);
        let joint = ra.tensor(&rb);
        prop_assert!(frobenius(&(partial_trace(&joint, &[a, b], 0).unwrap().matrix() - ra.matrix())) < 1e-12);
        prop_assert!(frobenius(&(partial_trace(&joint, &[a, b], 1).unwrap().matrix() - rb.matrix())) < 1e-12);
    }

    #[test]
    fn product_measurement_factorizes(seed in any::<u64>()) {
        let mut g = rng(seed);
        let (ra, rb) = (random::density(2, &mut g), random::density(3, &mut g));
        let (ma, mb) = (random::povm(2, 3, 1, &mut g), random::povm(3, 3, 1, &mut g));
        let joint = distribution(&ra.tensor(&rb), &product_measurement(&ma, &mb)).unwrap();
        let (pa, pb) = (distribution(&ra, &ma).unwrap(), distribution(&rb, &mb).unwrap());
        for (i, p) in pa.probs.iter().enumerate() {
            for (j, q) in pb.probs.iter().enumerate() {
                prop_assert!((joint.probs[i * 3 + j] - p * q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sld_is_centred_and_bounds_classical_information(seed in any::<u64>(), d in 2usize..5, theta in -1.0f64..1.0) {
        let mut g = rng(seed);
        let model = if seed % 2 == 0 { random_unitary_model(d, &mut g) } else { random_full_rank_model(d, &mut g) };
        let rho = model.state(&[theta]);
        let l = sld(&model, &[theta]).unwrap();
        prop_assert!(trace(&(rho.matrix() * l.ops[0].matrix())).norm() < 1e-8);
        let m = random::povm(d, d + 1, 1, &mut g);
        prop_assert!(bc_audit(&model, &[theta], &m).unwrap().gap_min_eig >= -1e-8);
    }

    #[test]
    fn quantum_information_is_additive(seed in any::<u64>(), copies in 1usize..4) {
        let mut g = rng(seed);
        let model = random_full_rank_model(2, &mut g);
        let one = quantum_fisher(&model, &[0.2]).unwrap()[(0, 0)];
        let many = quantum_fisher(&model.tensor_power(copies), &[0.2]).unwrap()[(0, 0)];
        prop_assert!((many - copies as f64 * one).abs() < 1e-6 * (1.0 + many));
    }

    #[test]
    fn instrument_statistics_match_induced_povm(seed in any::<u64>(), d in 2usize..4) {
        let mut g = rng(seed);
        let m = random::povm(d, 3, d, &mut g);
        let n = KrausInstrument::from_povm_sqrt(&m);
        let rho = random::density(d, &mut g);
        let fam = apply(&n, &rho).unwrap();
        let law = distribution(&rho, &induced_povm(&n)).unwrap();
        for (a, b) in fam.probs.iter().zip(&law.probs) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((trace(&fam.mixture()).re - 1.0).abs() < 1e-10);
        prop_assert!(choi_cp_check(&n).completely_positive);
    }

    #[test]
    fn dilation_reproduces_statistics(seed in any::<u64>(), outcomes in 2usize..5) {
        let mut g = rng(seed);
        let m = random::povm(2, outcomes, 1, &mut g);
        let dil = naimark_dilate(&m).unwrap();
        let rho = random::density(2, &mut g);
        let (p, q) = (distribution(&rho, &m).unwrap(), dil.distribution(&rho).unwrap());
        for (a, b) in p.probs.iter().zip(&q.probs) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), d in 1usize..5) {
        let mut g = rng(seed);
        let rho = random::density(d, &mut g);
        let back: MatrixJson = from_json(&to_json(&MatrixJson::from_matrix(rho.matrix())).unwrap()).unwrap();
        prop_assert!(frobenius(&(back.to_matrix().unwrap() - rho.matrix())) < 1e-13);
        let m = random::povm(d, d + 1, 1, &mut g);
        let back: PovmJson = from_json(&to_json(&PovmJson::from_povm(&m)).unwrap()).unwrap();
        prop_assert_eq!(back.to_povm().unwrap().len(), m.len());
    }

    #[test]
    fn teleportation_is_exact(seed in any::<u64>()) {
        let psi = random::state_vector(2, &mut rng(seed));
        let res = teleport(psi.vector()[0], psi.vector()[1], seed).unwrap();
        prop_assert!(res.fidelity > 1.0 - 1e-10);
        prop_assert!(res.all.iter().all(|o| (o.probability - 0.25).abs() < 1e-10));
    }

    #[test]
    fn phase_average_kills_coherence(seed in any::<u64>(), n_phase in 2usize..50, dim in 1usize..6) {
        let mut g = rng(seed);
        let psi = random::state_vector(2, &mut g);
        let h = random::hermitian(dim, &mut g);
        let det = random::state_vector(dim, &mut g);
        let rep = decoherence_average(psi.vector()[0], psi.vector()[1], &h, 0.8, &det, n_phase).unwrap();
        prop_assert!(rep.offdiag_norm < 2.0 / n_phase as f64);
        prop_assert!(frobenius(&(rep.rho.matrix() - rep.limit.matrix())) < 1e-10);
        let _: &DensityMatrix = &rep.rho;
    }
}
