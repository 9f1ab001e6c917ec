//! Exponential quantum models and covariant measurements on the circle.

use qinfer::instrument::is_exhaustive;
use qinfer::measure::from_observable;
use qinfer::qcore::{c, identity};
use qinfer::qinfo::{bc_audit, quantum_fisher};
use qinfer::qmodels::{
    equivariant_qubit_family, great_circle_symmetric_spec, great_circle_unitary_spec, gudermannian, transformation_check,
    GroupAction,
};

fn main() -> qinfer::Result<()> {
    let u = identity(2);
    let unitary = great_circle_unitary_spec(&u);
    let symmetric = great_circle_symmetric_spec(&u);
    println!("   θ     unitary I   symmetric I   gd(θ)");
    for t in [-1.5, -0.5, 0.0, 0.7, 2.0] {
        let iu = quantum_fisher(&unitary.model(), &[t])?[(0, 0)];
        let is = quantum_fisher(&symmetric.model(), &[t])?[(0, 0)];
        println!("{t:6.2}  {iu:10.6}  {is:12.6}  {:7.4}", gudermannian(t));
    }
    // measuring T attains I uniformly for the symmetric type
    let t_meas = from_observable(&symmetric.generators()[0]).0;
    let worst = [-1.0, 0.0, 1.3]
        .iter()
        .map(|t| bc_audit(&symmetric.model(), &[*t], t_meas.povm()).unwrap())
        .map(|r| (r.quantum[0][0] - r.classical[0][0]).abs())
        .fold(0.0, f64::max);
    println!("symmetric type, measuring T: max |I - i| = {worst:.2e}");

    let grid = 12;
    let family = equivariant_qubit_family(c(0.6, 0.2), grid)?;
    let action = GroupAction::qubit_circle(grid, &(0..grid).collect::<Vec<_>>());
    let thetas: Vec<Vec<f64>> = (0..5).map(|k| vec![0.3 * k as f64]).collect();
    let rep = transformation_check(&unitary.model(), &family, &action, &thetas)?;
    println!("covariant family of {grid} outcomes: consistent = {}, violation {:.1e}", rep.consistent, rep.max_violation);
    // the square-root instrument leaves θ-information in the posterior
    let n = qinfer::instrument::KrausInstrument::from_povm_sqrt(&family);
    let ex = is_exhaustive(&n, &unitary.model(), &thetas)?;
    println!("square-root instrument exhaustive = {} (deviation {:.1e})", ex.exhaustive, ex.max_deviation);
    Ok(())
}
