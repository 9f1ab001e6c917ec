//! Ensemble means of both unravelings against the master equation on three
//! benchmark generators.

use qinfer::qcore::{DensityMatrix, StateVector};
use qinfer::trajectory::{
    ensemble_mean, excited, ground, integrate_master, LindbladGenerator, TimeGrid, Unraveling,
};

fn check(name: &str, g: &LindbladGenerator, psi0: &StateVector, kind: Unraveling) {
    let grid = TimeGrid::new(2.0, 1e-3, 100).unwrap();
    let n = 600;
    let reference = integrate_master(g, &DensityMatrix::pure(psi0), &grid).unwrap();
    let ens = ensemble_mean(g, psi0, &grid, n, 77, kind).unwrap();
    // 1/n is the resolution of a single path; it covers records where no path
    // has jumped yet and the sample SE is exactly zero
    let z = ens.max_z(&reference, 1.0 / n as f64);
    assert!(z < 4.5, "{name} {kind:?}: max z {z}");
    assert!(ens.max_deviation(&reference) < 0.1, "{name} {kind:?}");
}

#[test]
fn two_level_decay() {
    let g = LindbladGenerator::two_level_decay(1.0);
    check("decay", &g, &excited(), Unraveling::Jump);
    check("decay", &g, &excited(), Unraveling::Diffusion);
}

#[test]
fn driven_qubit() {
    let g = LindbladGenerator::driven_qubit(1.2, 0.6);
    check("driven", &g, &ground(), Unraveling::Jump);
    check("driven", &g, &ground(), Unraveling::Diffusion);
}

#[test]
fn three_level_cascade() {
    let g = LindbladGenerator::three_level_cascade(1.0, 0.5);
    let top = StateVector::basis(3, 2);
    check("cascade", &g, &top, Unraveling::Jump);
    check("cascade", &g, &top, Unraveling::Diffusion);
}

#[test]
fn ensembles_do_not_depend_on_scheduling() {
    let g = LindbladGenerator::driven_qubit(1.0, 0.5);
    let grid = TimeGrid::new(0.5, 1e-3, 50).unwrap();
    let a = ensemble_mean(&g, &ground(), &grid, 64, 3, Unraveling::Jump).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| ensemble_mean(&g, &ground(), &grid, 64, 3, Unraveling::Jump).unwrap());
    assert_eq!(a.mean, b.mean);
}
