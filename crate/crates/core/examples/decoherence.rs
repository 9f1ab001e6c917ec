//! An unknown detector phase washes out the interference terms between the
//! branches of a measurement.

use qinfer::epr::decoherence_average;
use qinfer::qcore::r;
use qinfer::random;

fn main() -> qinfer::Result<()> {
    let mut rng = random::stream(4, 0);
    let h = random::hermitian(8, &mut rng);
    let psi = random::state_vector(8, &mut rng);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    println!("n_phase  off-diagonal norm");
    for n in [1, 2, 3, 10, 100, 360] {
        let rep = decoherence_average(r(s), r(s), &h, 1.0, &psi, n)?;
        println!("{n:>7}  {:.3e}", rep.offdiag_norm);
    }
    let rep = decoherence_average(r(0.6), r(0.8), &h, 1.0, &psi, 360)?;
    let dist = qinfer::qcore::frobenius(&(rep.rho.matrix() - rep.limit.matrix()));
    println!("|α|² = 0.36: distance to the block-diagonal limit {dist:.1e}");
    Ok(())
}
