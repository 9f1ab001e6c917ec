//! Braunstein-Caves, Helstrom and Gill-Massar bounds on random models.

use qinfer::qinfo::{bc_audit, gill_massar_check, gill_massar_constructor, helstrom_bound, optimal_measurement};
use qinfer::qmodels::{bloch_pure_model, random_full_rank_model, random_unitary_model};
use qinfer::random;

fn main() -> qinfer::Result<()> {
    let mut worst_gap = f64::INFINITY;
    let mut attained = 0;
    for k in 0..60u64 {
        let mut rng = random::stream(11, k);
        let d = 2 + (k as usize % 3);
        let model = if k % 2 == 0 { random_unitary_model(d, &mut rng) } else { random_full_rank_model(d, &mut rng) };
        let m = random::povm(d, d + 2, 1, &mut rng);
        worst_gap = worst_gap.min(bc_audit(&model, &[0.2], &m)?.gap_min_eig);
        let opt = optimal_measurement(&model, 0.2)?;
        attained += bc_audit(&model, &[0.2], opt.povm())?.attained as usize;
    }
    println!("60 random models: min eig(I - i) = {worst_gap:.3e}");
    println!("SLD eigenprojector measurement attains I in {attained}/60 cases");

    let model = bloch_pure_model();
    let theta = [1.1, 0.4];
    let h = helstrom_bound(&model, &theta)?;
    println!("\npure qubit, 2 parameters: I^-1 = [[{:.4}, {:.4}], [{:.4}, {:.4}]]", h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
    let mut rng = random::stream(12, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = random::povm(2, 4, 1, &mut rng);
        worst = worst.max(gill_massar_check(&model, &theta, &m, 1)?);
    }
    println!("max tr(I^-1 i) over 100 random POVMs: {worst:.6} (bound 1)");
    for w in [[0.5, 0.5], [0.8, 0.2], [1.0, 0.0]] {
        let m = gill_massar_constructor(&model, &theta, &w)?;
        println!("  randomized SLD measurement, weights {w:?}: tr = {:.6}", gill_massar_check(&model, &theta, &m, 1)?);
    }
    Ok(())
}
