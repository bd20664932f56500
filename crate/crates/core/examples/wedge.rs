//! Directions and point cloud of the wedge swept by the deformation family
//! around a good disc. Writes the cloud to wedge.csv in the temp directory.

use crdisc::scenario::Scenario;
use crdisc::bishop::find_good_disc;
use crdisc::deform::{sample_wedge, DeformedGraph};

fn main() -> crdisc::Result<()> {
    let sc = Scenario::builtin("removable-quadric")?;
    let m = sc.manifold.build()?;
    let n = sc.n.build(&m)?;
    let m1 = sc.m1.build(&m)?;
    let good = find_good_disc(&m, &n, &m1, sc.c, sc.grid, &sc.good_disc, &sc.bishop)?;
    let dg = DeformedGraph::new(&m, &good.disc, sc.profile)?;
    let sample = sample_wedge(&good.disc, &dg, &sc.kgraph(&m)?, &n, &sc.wedge, &sc.bishop)?;
    println!("v0 = {:.4?}", sample.v0);
    if let Some(cone) = &sample.cone {
        println!(
            "{} directions, rank {} of {}, margin {:.0e}, v0 inside: {}, sub-cones disjoint: {:?}",
            sample.directions.len(),
            cone.rank,
            cone.dimension,
            cone.margin,
            cone.v0_inside,
            cone.subcones_disjoint
        );
    }
    let path = std::env::temp_dir().join("wedge.csv");
    std::fs::write(&path, sample.to_csv())?;
    println!("{} points from {} discs written to {}", sample.points.len(), sample.discs.len(), path.display());
    Ok(())
}
