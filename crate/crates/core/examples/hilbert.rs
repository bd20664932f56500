//! The normalized Hilbert transform on the circle and the functional J.

use crdisc::circle::{hilbert_t1, j_functional};
use crdisc::{CircleFunction, CircleGrid};

fn main() -> crdisc::Result<()> {
    let grid = CircleGrid::new(256)?;
    for k in [1, 5, 40] {
        let kf = k as f64;
        let u = CircleFunction::sample_real(grid, |t| (kf * t).cos());
        let want = CircleFunction::sample_real(grid, |t| (kf * t).sin());
        let err = hilbert_t1(&u)?.sub(&want).sup_norm();
        println!("T1 cos({k}θ) = sin({k}θ)      max error {err:.2e}");
    }

    // T1² u = −u + u(1)
    let u = CircleFunction::sample_real(grid, |t| 0.3 + t.cos() - 0.5 * (3.0 * t).sin());
    let twice = hilbert_t1(&hilbert_t1(&u)?)?;
    let want = u.map(|z| -z + u.at_one());
    println!("T1 T1 u = -u + u(1)        max error {:.2e}", twice.sub(&want).sup_norm());

    // J(1 − cos kθ) = −d/dθ T1(1 − cos kθ)(0) = k
    for k in [1, 2, 7] {
        let kf = k as f64;
        let g = CircleFunction::sample_real(grid, |t| 1.0 - (kf * t).cos());
        println!("J(1 - cos {k}θ) = {:.12}", j_functional(&g)?);
    }
    Ok(())
}
