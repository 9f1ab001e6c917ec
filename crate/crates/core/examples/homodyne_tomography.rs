//! Homodyne tomography: sampling quadratures, maximum likelihood and the
//! unbiased kernel estimator.

use qinfer::qcore::{r, DensityMatrix, StateVector};
use qinfer::tomo::{kernel_estimate, mle_estimate, quadrature_density, sample_homodyne, unbiasedness_gate, KERNEL_NODES, KERNEL_R_MAX};

fn main() -> qinfer::Result<()> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let states = [
        ("vacuum", StateVector::from_slice(&[r(1.0), r(0.0)])?),
        ("(|0⟩+|1⟩)/√2", StateVector::from_slice(&[r(s), r(s)])?),
    ];
    for (name, psi) in &states {
        let rho = DensityMatrix::pure(psi);
        let dens = quadrature_density(&rho, 0.0, &[-1.0, 0.0, 1.0])?;
        println!("{name}: p(x; φ=0) at -1, 0, 1 = {:.4?}", dens);

        let samples = sample_homodyne(&rho, 20_000, 7, None)?;
        let est = mle_estimate(&samples, 4)?;
        let padded = qinfer::tomo::pad_state(&rho, 4)?;
        let fid = (psi.vector().adjoint() * est.rho.matrix().view((0, 0), (2, 2)) * psi.vector())[(0, 0)].re;
        println!("  MLE n_max = 4: {} iterations, fidelity {fid:.4}, purity {:.4}", est.iters, est.rho.purity());

        let gate = unbiasedness_gate(&padded, 3, KERNEL_R_MAX, KERNEL_NODES);
        println!("  kernel quadrature reproduces tr(ρA) to {gate:.1e}");
        for (m, mp) in [(0, 0), (0, 1), (1, 1)] {
            let k = kernel_estimate(&samples, m, mp)?;
            println!("  ρ_{m}{mp} ≈ {:.4} {:+.4}i ± {:.4}", k.re, k.im, k.standard_error);
        }
    }
    Ok(())
}
