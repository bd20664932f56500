//! Property tests over randomized inputs.

use crdisc::bishop::{seed_disc_w, solve_bishop, AnalyticDisc, BishopOptions};
use crdisc::defect::{defect_of, DefectOptions, NuOptions};
use crdisc::deform::{sample_wedge, DeformProfile, DeformedGraph, KGraph, WedgeConfig};
use crdisc::extend::approx::{gauss_approx, GaussOptions, Patch};
use crdisc::extend::cauchy::cauchy_extension;
use crdisc::holo::HoloFn;
use crdisc::poly::{ComplexMonomial, ComplexPoly};
use crdisc::{CircleGrid, Complex64, GenericManifold, Submanifold};
use proptest::prelude::*;

fn disc(m: &GenericManifold, grid: CircleGrid, c: f64, dir: Complex64) -> AnalyticDisc {
    let mut d = vec![Complex64::new(0.0, 0.0); m.p()];
    d[0] = dir;
    let w = seed_disc_w(grid, &m.base_point()[..m.p()], c, Some(&d));
    solve_bishop(m, &w, &vec![0.0; m.q()], &BishopOptions::default(), None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bishop_discs_are_attached_and_holomorphic(c in 0.005f64..0.08, angle in 0.0f64..6.28, q in 1usize..3) {
        let m = GenericManifold::sphere_quadric(1, q);
        let d = disc(&m, CircleGrid::new(256).unwrap(), c, Complex64::from_polar(1.0, angle));
        prop_assert!(d.attachment_residual(&m) < 1e-9);
        prop_assert!(d.holomorphy_defect() < 1e-8);
        // the rotated disc has the same x-component as w = c(1 − ζ)
        let x = d.x(0).real_values();
        let grid = d.grid();
        for (j, xv) in x.iter().enumerate() {
            prop_assert!((xv - 2.0 * c * c * grid.theta(j).sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn defect_is_independent_of_disc_size(c in 0.01f64..0.07) {
        let m = GenericManifold::sphere_quadric(1, 1);
        let d = disc(&m, CircleGrid::new(256).unwrap(), c, Complex64::new(1.0, 0.0));
        let (_, r) = defect_of(&m, &d, &NuOptions::default(), &DefectOptions::default()).unwrap();
        prop_assert_eq!(r.defect, 0);
        prop_assert!(r.consistent);
    }

    #[test]
    fn gauss_operator_reproduces_affine_functions(
        x in -0.5f64..0.5,
        tau in 5.0f64..200.0,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let patch = Patch::real_box(1, 4.0);
        let zh = [Complex64::new(x, 0.0)];
        let f = |z: &[Complex64]| Complex64::new(a, b) * z[0] + 1.0;
        let v = gauss_approx(&f, &patch, &zh, tau, &GaussOptions::default()).unwrap();
        prop_assert!((v.value - f(&zh)).norm() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn wedge_extension_of_polynomials_is_exact(seed in 0u64..1000, c0 in -1.0f64..1.0, c1 in -1.0f64..1.0) {
        let m = GenericManifold::sphere_quadric(1, 1);
        let grid = CircleGrid::default();
        let d = disc(&m, grid, 0.05, Complex64::new(1.0, 0.0));
        let dg = DeformedGraph::new(&m, &d, DeformProfile::default()).unwrap();
        let n = Submanifold::coordinate(&m, &[0, 1]).unwrap();
        let cfg = WedgeConfig { direction_samples: 0, disc_samples: 6, seed, ..Default::default() };
        let sample = sample_wedge(&d, &dg, &KGraph::flat(&m), &n, &cfg, &BishopOptions::default()).unwrap();
        let f = HoloFn::Poly {
            poly: ComplexPoly {
                nvars: 2,
                terms: vec![
                    ComplexMonomial { coef: [c0, 0.0], powers: vec![2, 0] },
                    ComplexMonomial { coef: [0.0, c1], powers: vec![1, 1] },
                ],
            },
        };
        let rep = cauchy_extension(&f, &sample).unwrap();
        for (pt, v) in sample.points.iter().zip(&rep.values) {
            let z: Vec<Complex64> = pt.z.iter().map(|c| Complex64::new(c[0], c[1])).collect();
            prop_assert!((v.unwrap() - f.eval(&z).unwrap()).norm() < 1e-10);
        }
    }
}
