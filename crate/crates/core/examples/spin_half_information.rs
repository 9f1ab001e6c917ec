//! Quantum and classical Fisher information for spin-half models.
//!
//! On the equator every in-plane simple measurement attains the quantum
//! information. Off the equator the optimal measurement depends on θ, so a
//! measurement tuned at one point loses information elsewhere.

use std::f64::consts::{FRAC_PI_2, PI};

use qinfer::measure::from_observable;
use qinfer::qcore::{identity, Hermitian};
use qinfer::qinfo::{bc_audit, classical_fisher, optimal_measurement, quantum_fisher, sld};
use qinfer::qmodels::{great_circle_model, latitude_model};

fn main() -> qinfer::Result<()> {
    let model = great_circle_model(identity(2));
    println!("great circle, in-plane measurements at θ = 0.3");
    for phi in [0.0f64, 0.7, 2.0, -1.3] {
        let m = from_observable(&Hermitian::pauli_dot([phi.cos(), phi.sin(), 0.0])).0;
        let i = classical_fisher(&model, &[0.3], m.povm())?[(0, 0)];
        println!("  φ = {phi:+.2}   i(θ;M) = {i:.10}");
    }
    let z = from_observable(&Hermitian::pauli_z()).0;
    let rep = bc_audit(&model, &[0.3], z.povm())?;
    println!("  σ_z (out of plane): i = {:.3e}, attained = {}\n", rep.classical[0][0], rep.attained);

    println!("latitude circles, I(θ) = sin²η");
    for eta in [FRAC_PI_2, PI / 3.0, PI / 6.0] {
        let model = latitude_model(eta);
        let qfi = quantum_fisher(&model, &[0.0])?[(0, 0)];
        let l = sld(&model, &[0.0])?;
        // measurement tuned at θ = 0, evaluated along the circle
        let m = optimal_measurement(&model, 0.0)?;
        let along: Vec<String> = [0.0, 0.5, 1.0]
            .iter()
            .map(|t| format!("{:.4}", classical_fisher(&model, &[*t], m.povm()).unwrap()[(0, 0)]))
            .collect();
        println!(
            "  η = {:5.1}°  I = {qfi:.6}  sin²η = {:.6}  SLD residual {:.1e}  i at θ=0,0.5,1: {}",
            eta.to_degrees(),
            eta.sin().powi(2),
            l.residual,
            along.join(", ")
        );
    }
    Ok(())
}
