//! Defect of an attached disc.
//!
//! With m(ζ) = r_z(A(ζ))·D, the real matrix ν with ν(1) = I for which ν·m
//! extends holomorphically turns the defect into a finite linear-algebra
//! problem: b ∈ R^q is admissible when b·ν·r_z(A) has no negative modes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bishop::{disc_jacobian, AnalyticDisc, DiscFamily, Observable, JACOBIAN_STEP};
use crate::circle::{self, CircleFunction, CircleGrid, CircleMatrix};
use crate::error::{Error, Result};
use crate::linalg;
use crate::manifold::{DefiningData, GenericManifold};

/// Largest sup |m − I| accepted by the factorization.
pub const CONTRACTION_RADIUS: f64 = 0.5;
pub const RANK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NuOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub damping: f64,
}

impl Default for NuOptions {
    fn default() -> Self {
        NuOptions {
            max_iter: 200,
            tol: 1e-10,
            damping: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NuFactorization {
    nu: Vec<DMatrix<f64>>,
    m: Vec<DMatrix<Complex64>>,
    grid: CircleGrid,
    pub residual: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

impl NuFactorization {
    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn q(&self) -> usize {
        self.nu[0].nrows()
    }

    pub fn nu_at(&self, j: usize) -> &DMatrix<f64> {
        &self.nu[j]
    }

    pub fn m_at(&self, j: usize) -> &DMatrix<Complex64> {
        &self.m[j]
    }

    pub fn nu(&self) -> Result<CircleMatrix> {
        CircleMatrix::from_real_nodes(self.grid, &self.nu)
    }

    pub fn m(&self) -> Result<CircleMatrix> {
        CircleMatrix::from_nodes(self.grid, &self.m)
    }

    /// Smallest singular value of ν over all nodes.
    pub fn min_singular_value(&self) -> f64 {
        self.nu
            .iter()
            .map(|n| linalg::singular_values(n).last().copied().unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_distance(&self, other: &NuFactorization) -> f64 {
        self.nu
            .iter()
            .zip(&other.nu)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max)
    }
}

/// ℓ² norm of the strictly negative modes (Nyquist excluded) of every entry
/// of a matrix function given by node values; the maximum over entries.
pub fn negative_mode_residual(grid: CircleGrid, nodes: &[DMatrix<Complex64>]) -> f64 {
    let (r, c) = nodes[0].shape();
    let n = grid.size();
    let mut worst: f64 = 0.0;
    for e in 0..r * c {
        let vals = nodes.iter().map(|m| m[(e / c, e % c)]).collect();
        let f = CircleFunction::from_complex(grid, vals).expect("grid-sized");
        let coeffs = f.fourier();
        let s: f64 = (1..n / 2).map(|k| coeffs.get(-(k as i64)).norm_sqr()).sum();
        worst = worst.max(s.sqrt());
    }
    worst
}

/// m(ζ_j) = r_z(A(ζ_j))·D at every node.
pub fn m_nodes(m: &GenericManifold, disc: &AnalyticDisc, dd: &DefiningData) -> Vec<DMatrix<Complex64>> {
    (0..disc.grid().size())
        .map(|j| m.r_z(&disc.boundary_point(j)) * &dd.d)
        .collect()
}

/// Solves for ν by fixed-point iteration on μ = ν − I: the negative modes of
/// μ are set to minus those of (I + μ)(m − I), the positive modes mirror
/// them, and the constant term enforces μ(1) = 0.
pub fn factor_nu(
    m: &GenericManifold,
    disc: &AnalyticDisc,
    dd: &DefiningData,
    opts: &NuOptions,
) -> Result<NuFactorization> {
    let grid = disc.grid();
    let n = grid.size();
    let q = m.q();
    let mv = m_nodes(m, disc, dd);
    let id = DMatrix::<Complex64>::identity(q, q);
    let distance = mv.iter().map(|x| (x - &id).map(|z| z.norm()).max()).fold(0.0, f64::max);
    if distance >= CONTRACTION_RADIUS {
        return Err(Error::OutOfContraction { distance });
    }
    let e: Vec<DMatrix<Complex64>> = mv.iter().map(|x| x - &id).collect();
    let mut mu: Vec<DMatrix<f64>> = vec![DMatrix::zeros(q, q); n];
    let mut trace = Vec::new();
    let mut residual;
    let mut iterations = 0;
    loop {
        let nu_m: Vec<DMatrix<Complex64>> = mu
            .iter()
            .zip(&mv)
            .map(|(u, x)| (u.map(|v| Complex64::new(v, 0.0)) + &id) * x)
            .collect();
        residual = negative_mode_residual(grid, &nu_m);
        trace.push(residual);
        if residual <= opts.tol {
            break;
        }
        if iterations >= opts.max_iter || !residual.is_finite() {
            return Err(Error::FactorizationFailure { trace });
        }
        iterations += 1;
        let mut new_mu = vec![DMatrix::zeros(q, q); n];
        for a in 0..q {
            for b in 0..q {
                // (μ e + e)_{ab}
                let vals = (0..n)
                    .map(|j| {
                        let mut s = e[j][(a, b)];
                        for k in 0..q {
                            s += mu[j][(a, k)] * e[j][(k, b)];
                        }
                        s
                    })
                    .collect();
                let prod = CircleFunction::from_complex(grid, vals)?.fourier();
                let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
                let mut sum = Complex64::new(0.0, 0.0);
                for k in 1..n / 2 {
                    let neg = -prod.get(-(k as i64));
                    coeffs[grid.index(-(k as i64))] = neg;
                    coeffs[grid.index(k as i64)] = neg.conj();
                    sum += neg + neg.conj();
                }
                coeffs[0] = -sum;
                let f = circle::ifft(&circle::FourierCoefficients::from_raw(grid, coeffs)?);
                for j in 0..n {
                    new_mu[j][(a, b)] = f.value(j).re;
                }
                new_mu[0][(a, b)] = 0.0;
            }
        }
        for (u, v) in mu.iter_mut().zip(&new_mu) {
            *u += opts.damping * (v - &*u);
        }
    }
    let nu: Vec<DMatrix<f64>> = mu
        .into_iter()
        .enumerate()
        .map(|(j, u)| if j == 0 { DMatrix::identity(q, q) } else { u + DMatrix::identity(q, q) })
        .collect();
    let fac = NuFactorization {
        nu,
        m: mv,
        grid,
        residual,
        iterations,
        trace,
    };
    let smin = fac.min_singular_value();
    if smin <= 1e-6 {
        return Err(Error::Geometry(format!(
            "ν is singular on the circle (smallest singular value {smin:.3e})"
        )));
    }
    Ok(fac)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefectOptions {
    pub rel_tol: f64,
    /// Number of negative modes kept; a quarter of the grid when absent.
    pub truncation: Option<usize>,
    /// Number of equispaced ζ₀ for the consistency table.
    pub samples: usize,
}

impl Default for DefectOptions {
    fn default() -> Self {
        DefectOptions {
            rel_tol: RANK_TOL,
            truncation: None,
            samples: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaDefect {
    pub node: usize,
    pub theta: f64,
    pub defect: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub defect: usize,
    pub q: usize,
    /// Admissible covectors b, one row each.
    pub basis_b: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub truncation: usize,
    /// The defect is unchanged when the truncation doubles.
    pub truncation_stable: bool,
    pub per_zeta: Vec<ZetaDefect>,
    pub consistent: bool,
    pub warnings: Vec<String>,
}

/// ν·r_z(A) at every node, q × n.
fn nu_rz(m: &GenericManifold, disc: &AnalyticDisc, fac: &NuFactorization) -> Vec<DMatrix<Complex64>> {
    (0..disc.grid().size())
        .map(|j| fac.nu_at(j).map(|v| Complex64::new(v, 0.0)) * m.r_z(&disc.boundary_point(j)))
        .collect()
}

/// Column k maps b = e_k to the first `trunc` negative Fourier coefficients
/// of row k of ν·r_z(A), flattened to reals.
fn admissibility_map(grid: CircleGrid, f: &[DMatrix<Complex64>], trunc: usize) -> DMatrix<f64> {
    let (q, n) = f[0].shape();
    let mut l = DMatrix::zeros(2 * n * trunc, q);
    for k in 0..q {
        for c in 0..n {
            let vals = f.iter().map(|x| x[(k, c)]).collect();
            let coeffs = CircleFunction::from_complex(grid, vals).expect("grid-sized").fourier();
            for t in 0..trunc {
                let z = coeffs.get(-(t as i64) - 1);
                l[(2 * (c * trunc + t), k)] = z.re;
                l[(2 * (c * trunc + t) + 1, k)] = z.im;
            }
        }
    }
    l
}

pub fn compute_defect(
    m: &GenericManifold,
    disc: &AnalyticDisc,
    fac: &NuFactorization,
    opts: &DefectOptions,
) -> Result<DefectReport> {
    let grid = disc.grid();
    let n = grid.size();
    let q = m.q();
    let max_trunc = n / 2 - 1;
    let trunc = opts.truncation.unwrap_or(n / 4).clamp(1, max_trunc);
    let f = nu_rz(m, disc, fac);
    let scale = f
        .iter()
        .map(|x| x.map(|z| z.norm()).max())
        .fold(0.0, f64::max);

    let decide = |trunc: usize| {
        let l = admissibility_map(grid, &f, trunc);
        let smax = linalg::singular_values(&l).first().copied().unwrap_or(0.0);
        let s = scale.max(smax);
        (linalg::rank_decision(&l, opts.rel_tol, Some(s)), l, s)
    };
    let (decision, l, s) = decide(trunc);
    let defect = q - decision.rank;
    let mut warnings = Vec::new();
    if decision.ambiguous {
        let msg = format!(
            "indeterminate rank: a singular value lies within 10x of the threshold {:.3e}",
            decision.threshold
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let truncation_stable = if 2 * trunc <= max_trunc {
        q - decide(2 * trunc).0.rank == defect
    } else {
        true
    };
    let null = linalg::null_space(&l, opts.rel_tol, Some(s));
    let basis_b: Vec<Vec<f64>> = (0..null.ncols())
        .map(|j| null.column(j).iter().copied().collect())
        .collect();

    let samples = opts.samples.max(1);
    let per_zeta: Vec<ZetaDefect> = (0..samples)
        .map(|k| {
            let node = k * n / samples;
            let rows: Vec<_> = basis_b
                .iter()
                .map(|b| {
                    let bv = DMatrix::from_row_slice(1, q, b).map(|v| Complex64::new(v, 0.0));
                    let xi = (bv * &f[node]) * Complex64::i();
                    linalg::to_real(&xi.iter().copied().collect::<Vec<_>>()).transpose()
                })
                .collect();
            let defect = if rows.is_empty() {
                0
            } else {
                linalg::numerical_rank(&DMatrix::from_rows(&rows), opts.rel_tol)
            };
            ZetaDefect {
                node,
                theta: grid.theta(node),
                defect,
            }
        })
        .collect();
    let consistent = per_zeta.iter().all(|z| z.defect == defect);
    if !consistent {
        warnings.push("defect varies with ζ".into());
    }
    Ok(DefectReport {
        defect,
        q,
        basis_b,
        singular_values: decision.singular_values,
        threshold: decision.threshold,
        truncation: trunc,
        truncation_stable,
        per_zeta,
        consistent,
        warnings,
    })
}

/// Factorization and defect in one call, with D taken at A(1).
pub fn defect_of(
    m: &GenericManifold,
    disc: &AnalyticDisc,
    nu_opts: &NuOptions,
    opts: &DefectOptions,
) -> Result<(NuFactorization, DefectReport)> {
    let dd = DefiningData::at(m, &disc.base_point())?;
    let fac = factor_nu(m, disc, &dd, nu_opts)?;
    let report = compute_defect(m, disc, &fac, opts)?;
    Ok((fac, report))
}

/// The covectors ξ_b = i·b·ν(ζ_j)·r_z(A(ζ_j)) of V_A(ζ_j).
pub fn conormal_vectors(
    m: &GenericManifold,
    disc: &AnalyticDisc,
    fac: &NuFactorization,
    report: &DefectReport,
    node: usize,
) -> Vec<Vec<Complex64>> {
    let rz = m.r_z(&disc.boundary_point(node));
    let nu = fac.nu_at(node).map(|v| Complex64::new(v, 0.0));
    report
        .basis_b
        .iter()
        .map(|b| {
            let bv = DMatrix::from_row_slice(1, b.len(), b).map(|v| Complex64::new(v, 0.0));
            ((bv * &nu * &rz) * Complex64::i()).iter().copied().collect()
        })
        .collect()
}

/// max |Re⟨ξ, v⟩| / (|ξ||v|) over ξ ∈ V_A(ζ_j) and columns v of `image`.
pub fn orthogonality_residual(xis: &[Vec<Complex64>], image: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for xi in xis {
        let xn = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for col in image.column_iter() {
            let v = linalg::to_complex(&col.into_owned());
            let vn = col.norm();
            if xn == 0.0 || vn == 0.0 {
                continue;
            }
            let pairing: Complex64 = xi.iter().zip(&v).map(|(a, b)| a * b).sum();
            worst = worst.max(pairing.re.abs() / (xn * vn));
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeVerdict {
    pub node: usize,
    pub theta: f64,
    /// codim of F'_ζ₀(T_A𝒜) in T_{A(ζ₀)}M.
    pub codim: usize,
    pub singular_values: Vec<f64>,
    /// Containment gap of T^c_{A(ζ₀)}M in the image.
    pub tc_inclusion_residual: f64,
    pub orthogonality_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankVerdict {
    pub defect: usize,
    pub nodes: Vec<NodeVerdict>,
    /// codim of G'(T_A𝒜) in T_{z₀}M.
    pub codim_g: usize,
    pub codims_equal_defect: bool,
    pub tc_inclusion: bool,
    pub orthogonal: bool,
}

/// Compares the image ranks of A ↦ A(ζ₀) and A ↦ A_θ(1) over a slice of
/// attached discs with the defect.
pub fn verify_rank_law(
    m: &GenericManifold,
    family: &dyn DiscFamily,
    disc: &AnalyticDisc,
    fac: &NuFactorization,
    report: &DefectReport,
    nodes: &[usize],
) -> Result<RankVerdict> {
    let need = m.dim();
    if family.dim() < need {
        return Err(Error::InsufficientSlice {
            have: family.dim(),
            need,
        });
    }
    let at = vec![0.0; family.dim()];
    let grid = disc.grid();
    let mut out = Vec::new();
    for &node in nodes {
        let jac = disc_jacobian(family, &at, Observable::Evaluation { node }, JACOBIAN_STEP)?;
        let dec = linalg::rank_decision(&jac, RANK_TOL, None);
        let z = disc.boundary_point(node);
        let tc = m.complex_tangent_basis(&z)?;
        let image = linalg::column_basis(&jac, RANK_TOL);
        let tc_gap = linalg::containment_gap(&image, &tc);
        let xis = conormal_vectors(m, disc, fac, report, node);
        out.push(NodeVerdict {
            node,
            theta: grid.theta(node),
            codim: need.saturating_sub(dec.rank),
            singular_values: dec.singular_values,
            tc_inclusion_residual: tc_gap,
            orthogonality_residual: orthogonality_residual(&xis, &jac),
        });
    }
    let jac_g = disc_jacobian(family, &at, Observable::TangentAtOne, JACOBIAN_STEP)?;
    let codim_g = need.saturating_sub(linalg::numerical_rank(&jac_g, RANK_TOL));
    let codims_equal_defect =
        codim_g == report.defect && out.iter().all(|v| v.codim == report.defect);
    let tc_inclusion = out.iter().all(|v| v.tc_inclusion_residual < RANK_TOL);
    let orthogonal = out.iter().all(|v| v.orthogonality_residual < RANK_TOL);
    Ok(RankVerdict {
        defect: report.defect,
        nodes: out,
        codim_g,
        codims_equal_defect,
        tc_inclusion,
        orthogonal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bishop::{seed_disc_w, solve_bishop, BishopOptions, WPerturbationFamily};
    use crate::poly::RealPoly;

    fn coupled() -> GenericManifold {
        let h = RealPoly::monomial(3, 1.0, &[(0, 2)])
            .add(&RealPoly::monomial(3, 1.0, &[(1, 2)]))
            .add(&RealPoly::monomial(3, 1.0, &[(0, 1), (2, 1)]));
        GenericManifold::new(1, 1, vec![h]).unwrap()
    }

    fn seed(m: &GenericManifold, c: f64) -> AnalyticDisc {
        let grid = CircleGrid::default();
        let z0 = m.base_point();
        let w = seed_disc_w(grid, &z0[..m.p()], c, None);
        let x0 = vec![0.0; m.q()];
        solve_bishop(m, &w, &x0, &BishopOptions::default(), None).unwrap()
    }

    fn defect(m: &GenericManifold, d: &AnalyticDisc) -> (NuFactorization, DefectReport) {
        defect_of(m, d, &NuOptions::default(), &DefectOptions::default()).unwrap()
    }

    #[test]
    fn trivial_factorizations() {
        let m = GenericManifold::sphere_quadric(1, 1);
        let grid = CircleGrid::default();
        let z0 = vec![Complex64::new(0.0, 0.0); 2];
        let constant = AnalyticDisc::constant(grid, &z0, 1);
        let (fac, rep) = defect(&m, &constant);
        assert_eq!(fac.max_distance(&defect(&m, &constant).0), 0.0);
        assert!(fac.nu.iter().all(|n| *n == DMatrix::identity(1, 1)));
        assert_eq!(rep.defect, 1);

        let flat = GenericManifold::flat(2, 2);
        let d = seed(&flat, 0.05);
        let (fac, rep) = defect(&flat, &d);
        assert!(fac.nu.iter().all(|n| *n == DMatrix::identity(2, 2)));
        assert_eq!(rep.defect, 2);
        assert_eq!(rep.basis_b.len(), 2);
        assert!(rep.consistent);
    }

    #[test]
    fn coupled_quadric_has_nontrivial_nu() {
        let m = coupled();
        let d = seed(&m, 0.05);
        let (fac, rep) = defect(&m, &d);
        assert!(fac.residual < 1e-10);
        assert_eq!(*fac.nu_at(0), DMatrix::identity(1, 1));
        let nu = fac.nu().unwrap();
        assert!(nu.entry(0, 0).sub(&CircleFunction::constant(d.grid(), 1.0.into())).sup_norm() > 1e-4);
        // independent residual: FFT of the product ν·m assembled here
        let prod: Vec<Complex64> = (0..d.grid().size())
            .map(|j| fac.nu_at(j)[(0, 0)] * fac.m_at(j)[(0, 0)])
            .collect();
        let f = CircleFunction::from_complex(d.grid(), prod).unwrap().fourier();
        let neg: f64 = (1..256).map(|k| f.get(-k).norm()).sum();
        assert!(neg < 1e-9, "{neg}");
        assert_eq!(rep.defect, 0);
        assert!(rep.truncation_stable);
        assert!(rep.per_zeta.iter().all(|z| z.defect == 0));
    }

    #[test]
    fn factorization_is_unique() {
        let m = coupled();
        let d = seed(&m, 0.05);
        let dd = DefiningData::at(&m, &d.base_point()).unwrap();
        let a = factor_nu(&m, &d, &dd, &NuOptions::default()).unwrap();
        let b = factor_nu(&m, &d, &dd, &NuOptions { damping: 0.6, ..Default::default() }).unwrap();
        assert!(a.max_distance(&b) < 1e-8);
        assert!(b.iterations > a.iterations);
    }

    #[test]
    fn out_of_contraction() {
        let m = coupled();
        let d = seed(&m, 0.05);
        // D from a distant point makes m far from I
        let far = m.point_of(&[0.0, 0.0, 3.0]);
        let dd = DefiningData::at(&m, &far).unwrap();
        assert!(matches!(
            factor_nu(&m, &d, &dd, &NuOptions::default()),
            Err(Error::OutOfContraction { .. })
        ));
    }

    #[test]
    fn pseudoconvex_defect_zero() {
        for (p, q) in [(1, 1), (2, 1)] {
            let m = GenericManifold::sphere_quadric(p, q);
            let d = seed(&m, 0.05);
            let (_, rep) = defect(&m, &d);
            assert_eq!(rep.defect, 0);
            assert_eq!(rep.per_zeta.len(), 8);
            assert!(rep.consistent);
        }
    }

    #[test]
    fn rank_law() {
        let opts = BishopOptions::default();
        let nodes = [64, 128, 200, 320];
        for (m, expected) in [(GenericManifold::flat(1, 1), 1), (coupled(), 0)] {
            let d = seed(&m, 0.05);
            let (fac, rep) = defect(&m, &d);
            assert_eq!(rep.defect, expected);
            let fam = WPerturbationFamily::new(&m, &d, 2, opts);
            let v = verify_rank_law(&m, &fam, &d, &fac, &rep, &nodes).unwrap();
            assert!(v.codims_equal_defect, "{v:?}");
            assert!(v.tc_inclusion, "{v:?}");
            assert!(v.orthogonal, "{v:?}");
        }
        let m = coupled();
        let d = seed(&m, 0.05);
        let (fac, rep) = defect(&m, &d);
        let small = WPerturbationFamily::new(&m, &d, 2, opts).truncated(2);
        assert!(matches!(
            verify_rank_law(&m, &small, &d, &fac, &rep, &nodes),
            Err(Error::InsufficientSlice { have: 2, need: 3 })
        ));
    }
}
