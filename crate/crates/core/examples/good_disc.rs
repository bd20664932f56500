//! Searching for a disc through z₀ whose boundary stays away from N except
//! near ζ = 1.

use crdisc::bishop::{find_good_disc, BishopOptions, GoodDiscConfig};
use crdisc::{CircleGrid, GenericManifold, Submanifold};

fn main() -> crdisc::Result<()> {
    // C³ quadric, N = {v₁ = v₂ = 0}, M₁ = {v₁ = 0}
    let m = GenericManifold::sphere_quadric(2, 1);
    let n = Submanifold::coordinate(&m, &[2, 3])?;
    let m1 = Submanifold::coordinate(&m, &[2])?;
    let good = find_good_disc(
        &m,
        &n,
        &m1,
        0.05,
        CircleGrid::default(),
        &GoodDiscConfig::default(),
        &BishopOptions::default(),
    )?;
    println!("{}", serde_json::to_string_pretty(&good.summary())?);
    Ok(())
}
