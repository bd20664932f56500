//! Continuity principle: extending f along a polydisc chain over a disc, and
//! the monodromy detector around a pole.

use std::f64::consts::PI;

use crdisc::bishop::AnalyticDisc;
use crdisc::extend::continuity::{continuity_extend, MONODROMY_TOL};
use crdisc::holo::HoloFn;
use crdisc::{CircleFunction, CircleGrid, Complex64, Error};

fn disc(center: Complex64, radius: f64) -> crdisc::Result<AnalyticDisc> {
    let grid = CircleGrid::new(128)?;
    AnalyticDisc::from_components(vec![CircleFunction::sample_zeta(grid, |z| center + radius * z)])
}

fn main() -> crdisc::Result<()> {
    let f = HoloFn::pole(1, 0, Complex64::new(0.0, 0.0));
    // ω: everything except the pole, distance to bω = |z|
    let omega = |z: &[Complex64]| z[0].norm();
    for k in 0..4 {
        let phi = PI * k as f64 / 2.0;
        let away = disc(Complex64::from_polar(1.0, phi), 0.5)?;
        let chain = continuity_extend(&f, &away, &omega)?;
        println!(
            "disc at {:.2}: σ = {:.4}, {} polydiscs, max disagreement {:.1e}",
            Complex64::from_polar(1.0, phi),
            chain.sigma,
            chain.centers.len(),
            chain.max_disagreement
        );
        let around = disc(Complex64::from_polar(0.3, phi), 0.5)?;
        match continuity_extend(&f, &around, &omega) {
            Err(Error::Monodromy { disagreement, .. }) => {
                println!("  disc around the pole: monodromy {disagreement:.2e} > {MONODROMY_TOL:.0e}")
            }
            other => println!("  disc around the pole: unexpected {other:?}"),
        }
    }
    Ok(())
}
