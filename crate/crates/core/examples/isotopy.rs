//! Analytic isotopies to a point avoiding a singular set Φ.

use crdisc::bishop::BishopOptions;
use crdisc::extend::isotopy::{blocking_ring, isotopy_to_point, transversal_geometry, IsotopyConfig, Recipe};
use crdisc::Error;

fn main() -> crdisc::Result<()> {
    let opts = BishopOptions::default();
    let recipes = [Recipe::ShrinkW, Recipe::MoveBase, Recipe::Combined];

    let (m, n, disc) = transversal_geometry(0.02, 0.05, &opts)?;
    println!("Φ = {{w = 0}}, disc w = 0.02 + 0.05(1 - ζ)");
    for recipe in recipes {
        let cfg = IsotopyConfig { recipe, ..Default::default() };
        let s = isotopy_to_point(&m, &disc, Some(&n), None, &cfg, &opts)?.summary();
        println!(
            "  {recipe:?}: terminal diameter {:.1e}, min clearance {:.4}",
            s.terminal_diameter, s.min_clearance
        );
    }

    let (m, _, disc) = transversal_geometry(0.0, 0.05, &opts)?;
    let ring = blocking_ring(&m, 0.05)?;
    println!("Φ = ring inside the disc w = 0.05(1 - ζ)");
    for recipe in recipes {
        let cfg = IsotopyConfig { recipe, ..Default::default() };
        match isotopy_to_point(&m, &disc, Some(&ring), None, &cfg, &opts) {
            Err(Error::IsotopyBlocked { s, nearest }) => {
                println!("  {recipe:?}: blocked at s = {s:.4} near {nearest:.4?}")
            }
            other => println!("  {recipe:?}: unexpected {:?}", other.map(|p| p.summary())),
        }
    }
    Ok(())
}
