//! POVMs, pushforwards and Naimark dilation to a simple measurement.

use qinfer::measure::{distribution, naimark_dilate, Povm};
use qinfer::qcore::{r, DensityMatrix, Hermitian, StateVector};
use qinfer::random;

fn triad() -> qinfer::Result<Povm> {
    let els = (0..3)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let v = StateVector::from_slice(&[r((a / 2.0).cos()), r((a / 2.0).sin())]).unwrap();
            v.projector().scale(2.0 / 3.0)
        })
        .collect::<Vec<Hermitian>>();
    Povm::new(els)
}

fn main() -> qinfer::Result<()> {
    let m = triad()?;
    let dil = naimark_dilate(&m)?;
    println!("triad: {} outcomes on C^2, dilated with an ancilla of dimension {}", m.len(), dil.ancilla_dim);
    let mut rng = random::stream(3, 0);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let rho = random::density(2, &mut rng);
        let p = distribution(&rho, &m)?;
        let q = dil.distribution(&rho)?;
        worst = worst.max(p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    println!("max |p - p_dilated| over 20 random states: {worst:.2e}");

    let rho = DensityMatrix::maximally_mixed(2);
    let law = distribution(&rho, &m)?;
    println!("maximally mixed state: {:?}", law.probs);
    let coarse = m.coarsen(|l| if l == "0" { "a".into() } else { "b".into() });
    println!("coarsened: {:?} {:?}", coarse.labels(), distribution(&rho, &coarse)?.probs);
    Ok(())
}
