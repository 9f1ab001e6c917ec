//! Instruments: posterior families, composition, coarsening and the Choi test
//! for complete positivity.

use qinfer::instrument::{
    apply, choi_cp_check, choi_cp_check_map, coarsen_instrument, compose, induced_povm, simple_instrument,
    transpose_map, KrausInstrument,
};
use qinfer::qcore::{frobenius, DensityMatrix, Hermitian};
use qinfer::random;

fn main() -> qinfer::Result<()> {
    let mut rng = random::stream(5, 0);
    let rho = random::density(2, &mut rng);

    let nz = simple_instrument(&Hermitian::pauli_z());
    let nx = simple_instrument(&Hermitian::pauli_x());
    let both = compose(&nz, &nx)?;
    let fam = apply(&both, &rho)?;
    println!("σ_z then σ_x on a random qubit:");
    for (l, p) in fam.labels.iter().zip(&fam.probs) {
        println!("  {l:>6}  π = {p:.4}");
    }
    // forgetting the first result leaves a σ_x measurement on the dephased state
    let coarse = coarsen_instrument(&both, |l| l.split(',').nth(1).unwrap().to_string());
    let cf = apply(&coarse, &rho)?;
    println!("coarsened to the second result: {:?} {:?}", cf.labels, cf.probs);
    let mixture_gap = frobenius(&(cf.mixture() - fam.mixture()));
    println!("unconditional states agree to {mixture_gap:.1e}");
    println!("induced POVM of the composite has {} elements", induced_povm(&both).len());

    let m = random::povm(3, 4, 2, &mut rng);
    let n = KrausInstrument::from_povm_sqrt(&m);
    let rep = choi_cp_check(&n);
    println!("\nrandom Kraus instrument: CP = {}, min Choi eigenvalue {:.2e}", rep.completely_positive, rep.min_eigenvalue);
    let t = choi_cp_check_map(3, transpose_map);
    println!("transpose map: CP = {}, min Choi eigenvalue {:.3}", t.completely_positive, t.min_eigenvalue);

    let rho3 = DensityMatrix::maximally_mixed(3);
    let post = apply(&n, &rho3)?;
    println!("posterior purities: {:?}", post.posteriors.iter().flatten().map(|s| (s.purity() * 1e4).round() / 1e4).collect::<Vec<_>>());
    Ok(())
}
