//! Defect of attached discs through the ν-factorization, and the rank law
//! for the evaluation maps of a perturbation family.

use crdisc::bishop::{seed_disc_w, solve_bishop, AnalyticDisc, BishopOptions, WPerturbationFamily};
use crdisc::defect::{defect_of, verify_rank_law, DefectOptions, NuOptions};
use crdisc::poly::RealPoly;
use crdisc::{CircleGrid, Complex64, GenericManifold};

fn seed(m: &GenericManifold) -> crdisc::Result<AnalyticDisc> {
    let w = seed_disc_w(CircleGrid::default(), &m.base_point()[..m.p()], 0.05, None);
    solve_bishop(m, &w, &vec![0.0; m.q()], &BishopOptions::default(), None)
}

fn main() -> crdisc::Result<()> {
    let (nu, opts) = (NuOptions::default(), DefectOptions::default());
    let flat = GenericManifold::flat(1, 2);
    let quadric = GenericManifold::sphere_quadric(1, 1);
    let constant = AnalyticDisc::constant(CircleGrid::default(), &[Complex64::new(0.0, 0.0); 2], 1);

    let (_, r) = defect_of(&quadric, &constant, &nu, &opts)?;
    println!("constant disc on the quadric: defect {} of {}", r.defect, r.q);
    let (_, r) = defect_of(&flat, &seed(&flat)?, &nu, &opts)?;
    println!("disc on flat C^3: defect {} of {}", r.defect, r.q);
    let (_, r) = defect_of(&quadric, &seed(&quadric)?, &nu, &opts)?;
    println!("disc on the quadric: defect {} of {}, same at all sampled ζ: {}", r.defect, r.q, r.consistent);

    // y = |w|² + x·u, so that w-perturbations also move x
    let h = RealPoly::monomial(3, 1.0, &[(0, 2)])
        .add(&RealPoly::monomial(3, 1.0, &[(1, 2)]))
        .add(&RealPoly::monomial(3, 1.0, &[(0, 1), (2, 1)]));
    let m = GenericManifold::new(1, 1, vec![h])?;
    let d = seed(&m)?;
    let (fac, rep) = defect_of(&m, &d, &nu, &opts)?;
    let family = WPerturbationFamily::new(&m, &d, 2, BishopOptions::default());
    let v = verify_rank_law(&m, &family, &d, &fac, &rep, &[64, 128, 320])?;
    for node in &v.nodes {
        println!(
            "ζ0 = e^(i·{:.3}): codim {}, T^c inclusion residual {:.1e}",
            node.theta, node.codim, node.tc_inclusion_residual
        );
    }
    println!("codims equal the defect {}: {}", v.defect, v.codims_equal_defect);
    Ok(())
}
