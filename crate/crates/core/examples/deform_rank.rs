//! Rank of D′(0) for the normal deformation of a quadric, with the
//! cross-check against J(GχH_t∘A).

use crdisc::bishop::{seed_disc_w, solve_bishop, BishopOptions};
use crdisc::deform::{normal_derivative_map, DeformProfile, DeformedGraph, T_STEP};
use crdisc::{CircleGrid, GenericManifold};

fn main() -> crdisc::Result<()> {
    let opts = BishopOptions::default();
    for (p, q) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let m = GenericManifold::sphere_quadric(p, q);
        let w = seed_disc_w(CircleGrid::default(), &m.base_point()[..p], 0.05, None);
        let disc = solve_bishop(&m, &w, &vec![0.0; q], &opts, None)?;
        let dg = DeformedGraph::new(&m, &disc, DeformProfile::default())?;
        let nd = normal_derivative_map(&disc, &dg, T_STEP, &opts)?;
        println!(
            "p = {p}, q = {q}: rank D'(0) = {}, singular values [{}], cross-check {:.1e}, J(χ) = {:.10}",
            nd.rank.rank,
            nd.rank.singular_values.iter().map(|s| format!("{s:.3e}")).collect::<Vec<_>>().join(", "),
            nd.cross_check_error, nd.j_chi
        );
    }
    Ok(())
}
