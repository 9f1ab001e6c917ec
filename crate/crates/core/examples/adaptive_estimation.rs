//! Two-stage adaptive estimation of a spin direction on the equator.
//! Stage 1 spends ⌈n^0.7⌉ copies on σ_x and σ_y; stage 2 measures the rest in
//! the optimal basis at the preliminary estimate.

use std::f64::consts::FRAC_PI_2;

use qinfer::qinfo::{adaptive_monte_carlo, adaptive_two_stage};
use qinfer::random;

fn main() -> qinfer::Result<()> {
    let run = adaptive_two_stage(0.3, FRAC_PI_2, 10_000, &mut random::stream(1, 0))?;
    println!(
        "single run: stage1 {} copies -> {:.4}, stage2 {} copies -> {:.6} (Newton iters {})",
        run.stage1, run.preliminary, run.stage2, run.estimate, run.newton_iters
    );
    for n in [100, 1_000, 10_000] {
        let s = adaptive_monte_carlo(0.3, FRAC_PI_2, n, 300, 2)?;
        println!(
            "n = {n:>6}: mean n(θ̂-θ)² = {:.4} ± {:.4}  (Helstrom {:.1})",
            s.mean_scaled_mse, s.std_error, s.helstrom
        );
    }
    Ok(())
}
