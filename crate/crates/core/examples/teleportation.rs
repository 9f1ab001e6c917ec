//! Teleportation through a singlet with a Bell-basis simple instrument.

use qinfer::epr::teleport;
use qinfer::qcore::{c, r};
use qinfer::random;

fn main() -> qinfer::Result<()> {
    let inputs = [
        ("|0⟩", r(1.0), r(0.0)),
        ("|1⟩", r(0.0), r(1.0)),
        ("|+⟩", r(0.5f64.sqrt()), r(0.5f64.sqrt())),
        ("0.6|0⟩+0.8i|1⟩", r(0.6), c(0.0, 0.8)),
    ];
    for (k, (name, a, b)) in inputs.iter().enumerate() {
        let res = teleport(*a, *b, k as u64)?;
        println!("{name:>16}: outcome {} fidelity {:.12}", res.outcome, res.fidelity);
        for o in &res.all {
            println!("{:>20} p = {:.6} fidelity {:.12}", o.outcome, o.probability, o.fidelity);
        }
    }
    let mut rng = random::stream(9, 0);
    let mut worst = 1.0f64;
    for k in 0..100 {
        let psi = random::state_vector(2, &mut rng);
        let res = teleport(psi.vector()[0], psi.vector()[1], k)?;
        worst = worst.min(res.all.iter().map(|o| o.fidelity).fold(1.0, f64::min));
    }
    println!("100 random inputs, all outcomes: worst fidelity {worst:.12}");
    Ok(())
}
