//! The Gaussian approximation operator on a curved maximally real patch.
//! For f = e^z the exact value is e^(ẑ + 1/(4τ)).

use crdisc::extend::approx::{convergence_table, GaussOptions, Patch};
use crdisc::Complex64;

fn main() -> crdisc::Result<()> {
    let patch = Patch {
        center: vec![[0.0, 0.0]],
        half_width: vec![4.0],
        curvature: 0.1,
    };
    let s0: f64 = 0.3;
    let zhat = [Complex64::new(s0, 0.1 * s0 * s0)];
    let f = |z: &[Complex64]| z[0].exp();
    let rows = convergence_table(&f, &patch, &zhat, &[10.0, 40.0, 160.0, 640.0], &GaussOptions::default())?;
    println!("{:>6} {:>14} {:>14}", "tau", "|G f - f|", "vs exact");
    for r in rows {
        let exact = (zhat[0] + 0.25 / r.tau).exp();
        println!("{:>6} {:>14.3e} {:>14.1e}", r.tau, r.error, (r.value - exact).norm());
    }
    Ok(())
}
