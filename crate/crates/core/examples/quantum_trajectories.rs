//! Jump and diffusion unravelings of Lindblad generators against the
//! master equation.

use qinfer::qcore::{DensityMatrix, StateVector};
use qinfer::random;
use qinfer::trajectory::{
    ensemble_mean, excited, first_jump_time, ground, integrate_master, jump_trajectory, ks_exponential,
    LindbladGenerator, TimeGrid, Unraveling,
};

fn main() -> qinfer::Result<()> {
    let decay = LindbladGenerator::two_level_decay(1.0);
    let grid = TimeGrid::new(3.0, 1e-3, 250)?;

    let path = jump_trajectory(&decay, &excited(), &grid, 1)?;
    println!("one decay path: jump at {:?}", path.jump_times);

    let mut rng = random::stream(2, 0);
    let waits: Vec<f64> = (0..2000).filter_map(|_| first_jump_time(&decay, &excited(), &TimeGrid::new(20.0, 1e-3, 1000).unwrap(), &mut rng)).collect();
    let (d, p) = ks_exponential(&waits, 1.0);
    println!("2000 waiting times: mean {:.3}, KS D = {d:.4}, p = {p:.3}", waits.iter().sum::<f64>() / waits.len() as f64);

    let cases: [(&str, LindbladGenerator, StateVector); 3] = [
        ("decay", decay.clone(), excited()),
        ("driven", LindbladGenerator::driven_qubit(1.0, 0.5), ground()),
        ("cascade", LindbladGenerator::three_level_cascade(1.0, 0.7), StateVector::basis(3, 2)),
    ];
    for (name, g, psi0) in &cases {
        let reference = integrate_master(g, &DensityMatrix::pure(psi0), &grid)?;
        for kind in [Unraveling::Jump, Unraveling::Diffusion] {
            let ens = ensemble_mean(g, psi0, &grid, 400, 3, kind)?;
            // early on no path may have jumped yet and the sample SE is zero;
            // the 1/n floor is the resolution of a single path
            println!(
                "{name:>8} {kind:?}: max |ρ̄ - ρ| = {:.3}, max z = {:.2}",
                ens.max_deviation(&reference),
                ens.max_z(&reference, 1.0 / 400.0)
            );
        }
    }
    Ok(())
}
