//! Bishop's equation on the quadric y = |w|²: the disc w = c(1 − ζ) has
//! z = 2ic²(1 − ζ) in closed form.

use crdisc::bishop::{seed_disc_w, solve_bishop, BishopOptions};
use crdisc::{CircleFunction, CircleGrid, Complex64, GenericManifold};

fn main() -> crdisc::Result<()> {
    let m = GenericManifold::sphere_quadric(1, 1);
    let grid = CircleGrid::default();
    for c in [0.01, 0.03, 0.05] {
        let w = seed_disc_w(grid, &[Complex64::new(0.0, 0.0)], c, None);
        let disc = solve_bishop(&m, &w, &[0.0], &BishopOptions::default(), None)?;
        let exact = CircleFunction::sample_zeta(grid, |z| Complex64::new(0.0, 2.0 * c * c) * (1.0 - z));
        println!(
            "c = {c:.2}: {} iterations, |z - 2ic²(1-ζ)| = {:.2e}, attachment residual {:.2e}",
            disc.iterations(),
            disc.z()[0].sub(&exact).sup_norm(),
            disc.attachment_residual(&m)
        );
    }
    Ok(())
}
