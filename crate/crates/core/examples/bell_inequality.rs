//! Singlet correlations violate the inequality every local hidden variable
//! model must satisfy.

use qinfer::epr::{bell_demo, LhvStrategy};

fn main() -> qinfer::Result<()> {
    let rep = bell_demo()?;
    println!("{}", rep.to_csv());
    println!("quantum: P(X1=Y1) - [P(X1=Y2) + P(Y2=X2) + P(X2=Y1)] = {:.4}", rep.quantum_margin);
    println!("best deterministic strategy: {:.1}", rep.lhv_max);
    println!("combinatorial implication holds for all 16 strategies: {}", rep.implication_holds);
    println!("violated: {}", rep.violated);
    for s in LhvStrategy::all().iter().take(4) {
        println!("  {:?} -> equalities {:?}", s, s.equalities());
    }
    Ok(())
}
