//! Continuity principle: extension along chains of polydiscs covering a disc.
//!
//! Distances are max-norm, so polydiscs are balls. A germ at a boundary
//! center is `f` itself; a germ at an interior center A(ζ) is evaluated at
//! A(ζ) + δ by the Cauchy integral of f over the translated disc A + δ.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::max_dist;
use crate::bishop::AnalyticDisc;
use crate::circle::{power_series_eval, CircleGrid};
use crate::error::{Error, Result};
use crate::holo::HoloFn;

pub const NON_EMBEDDED_TOL: f64 = 1e-8;
/// Relative germ disagreement on an overlap that counts as monodromy.
pub const MONODROMY_TOL: f64 = 1e-6;
const MAX_CENTERS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BiLipschitz {
    pub c: f64,
    pub big_c: f64,
}

/// Extremes of |A(ζ) − A(ζ′)|∞ / |ζ − ζ′| over boundary node pairs, with
/// |A′| at the nodes standing in for coincident pairs.
pub fn bilipschitz_constants(disc: &AnalyticDisc) -> Result<BiLipschitz> {
    let grid = disc.grid();
    let n = grid.size();
    let pts: Vec<Vec<Complex64>> = (0..n).map(|j| disc.boundary_point(j)).collect();
    let derivs: Vec<_> = disc.components().iter().map(|c| c.derivative_theta()).collect();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for j in 0..n {
        let d = derivs.iter().map(|f| f.value(j).norm()).fold(0.0, f64::max);
        lo = lo.min(d);
        hi = hi.max(d);
        for k in j + 1..n {
            let r = max_dist(&pts[j], &pts[k]) / (grid.zeta(j) - grid.zeta(k)).norm();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    if lo < NON_EMBEDDED_TOL {
        return Err(Error::NonEmbedded { c: lo });
    }
    Ok(BiLipschitz { c: lo, big_c: hi })
}

/// σ = r·c / (2C).
pub fn chain_radius(r: f64, lip: &BiLipschitz) -> f64 {
    r * lip.c / (2.0 * lip.big_c)
}

#[derive(Clone, Debug, Serialize)]
pub struct PolydiscChain {
    /// min over bΔ of the distance from A(ζ) to bω.
    pub r: f64,
    pub lipschitz: Option<BiLipschitz>,
    pub sigma: f64,
    pub rings: usize,
    pub angular: usize,
    pub centers: Vec<Vec<Complex64>>,
    pub zetas: Vec<Complex64>,
    pub germ_values: Vec<Complex64>,
    pub edges: Vec<(usize, usize)>,
    pub max_disagreement: f64,
    /// r = 0: nothing to extend.
    pub degenerate: bool,
}

impl PolydiscChain {
    pub fn is_boundary(&self, i: usize) -> bool {
        self.zetas[i].norm() == 1.0
    }

    /// Index of the center nearest to `z` and its distance.
    pub fn nearest(&self, z: &[Complex64]) -> Option<(usize, f64)> {
        self.centers
            .iter()
            .enumerate()
            .map(|(i, c)| (i, max_dist(c, z)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

struct Germs<'a> {
    f: &'a HoloFn,
    disc: &'a AnalyticDisc,
}

impl Germs<'_> {
    fn eval(&self, center: &[Complex64], zeta: Complex64, z: &[Complex64]) -> Result<Complex64> {
        if zeta.norm() == 1.0 {
            return self.f.eval(z);
        }
        let delta: Vec<Complex64> = z.iter().zip(center).map(|(a, b)| a - b).collect();
        let g = self.f.compose_shifted(self.disc, &delta)?;
        Ok(power_series_eval(&g.fourier(), zeta))
    }
}

/// Smallest power of two M ≥ 8 whose angular spacing C·2π/M is at most σ.
fn smallest_angular(big_c: f64, sigma: f64) -> usize {
    let mut m = 8usize;
    while big_c * 2.0 * PI / m as f64 > sigma {
        m *= 2;
    }
    m
}

/// Extends `f` from a neighborhood ω of A(bΔ) along a polydisc chain over
/// A(Δ̄). `omega` returns the distance from a point to bω (negative outside).
pub fn continuity_extend(
    f: &HoloFn,
    disc: &AnalyticDisc,
    omega: &dyn Fn(&[Complex64]) -> f64,
) -> Result<PolydiscChain> {
    let grid = disc.grid();
    let r = (0..grid.size())
        .map(|j| omega(&disc.boundary_point(j)))
        .fold(f64::INFINITY, f64::min);
    if r < 0.0 {
        return Err(Error::Precondition(format!(
            "disc boundary leaves ω (distance {r:.3e})"
        )));
    }
    if r == 0.0 {
        return Ok(PolydiscChain {
            r,
            lipschitz: None,
            sigma: 0.0,
            rings: 0,
            angular: 0,
            centers: Vec::new(),
            zetas: Vec::new(),
            germ_values: Vec::new(),
            edges: Vec::new(),
            max_disagreement: 0.0,
            degenerate: true,
        });
    }
    let lip = bilipschitz_constants(disc)?;
    let sigma = chain_radius(r, &lip);
    // neighboring centers are at most σ apart, so their polydiscs overlap
    let rings = (lip.big_c / sigma).ceil() as usize;
    let angular = smallest_angular(lip.big_c, sigma);
    if rings * angular > MAX_CENTERS {
        return Err(Error::Precondition(format!(
            "chain needs {rings} x {angular} centers; σ = {sigma:.3e} is too small"
        )));
    }

    // ring k carries enough nodes for spacing σ at radius k/rings
    let mut zetas = vec![Complex64::new(0.0, 0.0)];
    let mut centers = vec![disc.eval_interior(zetas[0])?];
    for k in 1..rings {
        let rho = k as f64 / rings as f64;
        let m = smallest_angular(lip.big_c * rho, sigma);
        for a in 0..m {
            let z = Complex64::from_polar(rho, 2.0 * PI * a as f64 / m as f64);
            centers.push(disc.eval_interior(z)?);
            zetas.push(z);
        }
    }
    for a in 0..angular {
        zetas.push(boundary_zeta(grid, angular, a));
        centers.push(boundary_center(disc, angular, a));
    }

    let germs = Germs { f, disc };
    let germ_values = zetas
        .iter()
        .zip(&centers)
        .map(|(&z, c)| germs.eval(c, z, c))
        .collect::<Result<Vec<_>>>()?;

    let mut edges = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, j) in overlaps(&centers, sigma) {
        edges.push((i, j));
        let mid: Vec<Complex64> = centers[i]
            .iter()
            .zip(&centers[j])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let gi = germs.eval(&centers[i], zetas[i], &mid)?;
        let gj = germs.eval(&centers[j], zetas[j], &mid)?;
        let d = (gi - gj).norm() / gi.norm().max(gj.norm()).max(1.0);
        worst = worst.max(d);
        if d > MONODROMY_TOL {
            return Err(Error::Monodromy {
                disagreement: d,
                a: i,
                b: j,
            });
        }
    }
    if !connected(centers.len(), &edges) {
        return Err(Error::Geometry("polydisc chain is not connected".into()));
    }
    Ok(PolydiscChain {
        r,
        lipschitz: Some(lip),
        sigma,
        rings,
        angular,
        centers,
        zetas,
        germ_values,
        edges,
        max_disagreement: worst,
        degenerate: false,
    })
}

fn boundary_zeta(grid: CircleGrid, angular: usize, a: usize) -> Complex64 {
    if angular <= grid.size() {
        grid.zeta(a * grid.size() / angular)
    } else {
        Complex64::from_polar(1.0, 2.0 * PI * a as f64 / angular as f64)
    }
}

fn boundary_center(disc: &AnalyticDisc, angular: usize, a: usize) -> Vec<Complex64> {
    let grid = disc.grid();
    if angular <= grid.size() {
        disc.boundary_point(a * grid.size() / angular)
    } else {
        disc.boundary_at(2.0 * PI * a as f64 / angular as f64)
    }
}

/// Pairs i < j with |c_i − c_j|∞ < 2σ, bucketed on the first coordinate.
fn overlaps(centers: &[Vec<Complex64>], sigma: f64) -> Vec<(usize, usize)> {
    let cell = 2.0 * sigma;
    let key = |z: Complex64| ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, c) in centers.iter().enumerate() {
        buckets.entry(key(c[0])).or_default().push(i);
    }
    let mut out = Vec::new();
    for (i, c) in centers.iter().enumerate() {
        let (a, b) = key(c[0]);
        for da in -1..=1 {
            for db in -1..=1 {
                let Some(list) = buckets.get(&(a + da, b + db)) else {
                    continue;
                };
                out.extend(
                    list.iter()
                        .filter(|&&j| j > i && max_dist(c, &centers[j]) < cell)
                        .map(|&j| (i, j)),
                );
            }
        }
    }
    out.sort_unstable();
    out
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyExtension {
    pub chains: Vec<PolydiscChain>,
    /// Distance from the closure of the first disc to bω.
    pub seed_margin: f64,
    /// seed_margin < 2σ₀.
    pub thin: bool,
    /// Largest disagreement between a chain's germs and those of the previous chain.
    pub max_seed_disagreement: f64,
}

/// Runs the chain along a family A_s. Each disc must lie within σ of the
/// previous chain, and the first disc must lie in ω together with its interior.
pub fn continuity_family(
    f: &HoloFn,
    discs: &[AnalyticDisc],
    omega: &dyn Fn(&[Complex64]) -> f64,
) -> Result<FamilyExtension> {
    let mut chains: Vec<PolydiscChain> = Vec::with_capacity(discs.len());
    let mut worst: f64 = 0.0;
    for (k, disc) in discs.iter().enumerate() {
        let chain = continuity_extend(f, disc, omega)?;
        if chain.degenerate {
            return Err(Error::Precondition(format!("disc {k} touches bω")));
        }
        if let Some(prev) = chains.last() {
            let germs = Germs {
                f,
                disc: &discs[k - 1],
            };
            for (z, v) in chain.centers.iter().zip(&chain.germ_values) {
                let (i, d) = prev.nearest(z).expect("chain has centers");
                if d >= prev.sigma {
                    return Err(Error::Geometry(format!(
                        "disc {k} leaves the σ-neighborhood of disc {} by {:.3e}",
                        k - 1,
                        d - prev.sigma
                    )));
                }
                let g = germs.eval(&prev.centers[i], prev.zetas[i], z)?;
                let dis = (g - v).norm() / g.norm().max(v.norm()).max(1.0);
                worst = worst.max(dis);
                if dis > MONODROMY_TOL {
                    return Err(Error::Monodromy {
                        disagreement: dis,
                        a: i,
                        b: k,
                    });
                }
            }
        }
        chains.push(chain);
    }
    let seed_margin = chains
        .first()
        .map(|c| c.centers.iter().map(|z| omega(z)).fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::INFINITY);
    if seed_margin <= 0.0 {
        return Err(Error::Precondition(
            "the first disc of the family is not contained in ω".into(),
        ));
    }
    let thin = chains.first().is_some_and(|c| seed_margin < 2.0 * c.sigma);
    Ok(FamilyExtension {
        chains,
        seed_margin,
        thin,
        max_seed_disagreement: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::CircleFunction;
    use crate::poly::{ComplexMonomial, ComplexPoly};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn affine(z0: &[Complex64], dir: &[Complex64]) -> AnalyticDisc {
        let grid = CircleGrid::default();
        AnalyticDisc::from_components(
            z0.iter()
                .zip(dir)
                .map(|(&a, &d)| CircleFunction::sample_zeta(grid, |z| a + d * z))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn bilipschitz_oracles() {
        let round = affine(&[c(1.0, 2.0)], &[c(0.3, 0.0)]);
        let l = bilipschitz_constants(&round).unwrap();
        assert!((l.c - 0.3).abs() < 1e-12 && (l.big_c - 0.3).abs() < 1e-12);

        // quadric disc (c₀(1−ζ), 2ic₀²(1−ζ)): brute force over a coarse grid
        let c0 = 0.05;
        let grid = CircleGrid::default();
        let d = AnalyticDisc::from_components(vec![
            CircleFunction::sample_zeta(grid, |z| c0 * (1.0 - z)),
            CircleFunction::sample_zeta(grid, |z| c(0.0, 2.0 * c0 * c0) * (1.0 - z)),
        ])
        .unwrap();
        let l = bilipschitz_constants(&d).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for j in 0..64 {
            for k in j + 1..64 {
                let (a, b) = (grid.zeta(8 * j), grid.zeta(8 * k));
                let num = (c0 * (a - b)).norm().max((2.0 * c0 * c0 * (a - b)).norm());
                lo = lo.min(num / (a - b).norm());
                hi = hi.max(num / (a - b).norm());
            }
        }
        assert!((l.c - lo).abs() < 1e-12 && (l.big_c - hi).abs() < 1e-12);

        let flat = AnalyticDisc::constant(grid, &[c(1.0, 0.0)], 1);
        assert!(matches!(bilipschitz_constants(&flat), Err(Error::NonEmbedded { .. })));
    }

    #[test]
    fn sigma_formula_and_entire_functions() {
        let d = affine(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.5, 0.0), c(0.0, 0.2)]);
        let f = HoloFn::Poly {
            poly: ComplexPoly {
                nvars: 2,
                terms: vec![
                    ComplexMonomial { coef: [1.0, 0.5], powers: vec![3, 1] },
                    ComplexMonomial { coef: [-2.0, 0.0], powers: vec![0, 2] },
                ],
            },
        };
        let omega = |_: &[Complex64]| 0.1;
        let chain = continuity_extend(&f, &d, &omega).unwrap();
        let l = chain.lipschitz.unwrap();
        assert_eq!(chain.sigma, 0.1 * l.c / (2.0 * l.big_c));
        for (z, g) in chain.centers.iter().zip(&chain.germ_values) {
            assert!((f.eval(z).unwrap() - g).norm() < 1e-10);
        }
        assert!(chain.max_disagreement < 1e-9);

        let wider = continuity_extend(&f, &d, &|_: &[Complex64]| 0.2).unwrap();
        assert!(wider.sigma >= chain.sigma);

        let touching = continuity_extend(&f, &d, &|_: &[Complex64]| 0.0).unwrap();
        assert!(touching.degenerate && touching.centers.is_empty());
    }

    #[test]
    fn monodromy_detector() {
        let f = HoloFn::pole(1, 0, c(0.0, 0.0));
        let omega = |z: &[Complex64]| z[0].norm();
        for k in 0..3 {
            let phi = 2.0 * PI * k as f64 / 3.0;
            let inside = affine(&[Complex64::from_polar(0.3, phi)], &[c(0.5, 0.0)]);
            assert!(matches!(
                continuity_extend(&f, &inside, &omega),
                Err(Error::Monodromy { .. })
            ));
            let outside = affine(&[Complex64::from_polar(1.0, phi)], &[c(0.5, 0.0)]);
            let chain = continuity_extend(&f, &outside, &omega).unwrap();
            assert!(chain.max_disagreement < 1e-9);
        }
    }

    #[test]
    fn family_seeding() {
        // A_s(ζ) = (0.2 + s·0.5ζ, 0.3·s·ζ²), ω a thin tube around the boundaries
        let eps = 0.1;
        let grid = CircleGrid::new(128).unwrap();
        let discs: Vec<AnalyticDisc> = (1..=40)
            .map(|k| {
                let s = k as f64 / 40.0;
                AnalyticDisc::from_components(vec![
                    CircleFunction::sample_zeta(grid, |z| 0.2 + s * 0.5 * z),
                    CircleFunction::sample_zeta(grid, |z| 0.3 * s * z * z),
                ])
                .unwrap()
            })
            .collect();
        let rims: Vec<Vec<Complex64>> = discs
            .iter()
            .flat_map(|d| (0..grid.size()).map(|j| d.boundary_point(j)).collect::<Vec<_>>())
            .collect();
        let omega = |z: &[Complex64]| {
            eps - rims.iter().map(|p| max_dist(p, z)).fold(f64::INFINITY, f64::min)
        };
        let f = HoloFn::pole(2, 0, c(2.0, 0.0));
        let fam = continuity_family(&f, &discs, &omega).unwrap();
        assert!(fam.max_seed_disagreement < 1e-9);
        let last = fam.chains.last().unwrap();
        for (z, g) in last.centers.iter().zip(&last.germ_values) {
            assert!((f.eval(z).unwrap() - g).norm() < 1e-8);
        }
    }
}
