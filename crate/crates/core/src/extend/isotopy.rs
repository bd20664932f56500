//! Isotopies of attached discs to constant discs avoiding a singular set Φ.
//!
//! Recipes:
//! - `shrink-w`: w_s = (1 − s)(w − w(1)) + w(1), base point fixed.
//! - `move-base`: shrink while the base point moves along a straight curve in M.
//! - `combined`: move the base point first, then shrink.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bishop::{solve_bishop, AnalyticDisc, BishopOptions, ATTACHMENT_TOL};
use crate::circle::CircleFunction;
use crate::error::{Error, Result};
use crate::manifold::{GenericManifold, Submanifold};

pub const TERMINAL_DIAMETER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    ShrinkW,
    MoveBase,
    Combined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsotopyConfig {
    pub recipe: Recipe,
    pub steps: usize,
    /// Displacement of the base point in the parameters (u, v, x) of M;
    /// empty means 0.1 along u₁.
    pub shift: Vec<f64>,
    /// Boundary clearances at or below this count as collisions with Φ.
    pub clearance_floor: f64,
}

impl Default for IsotopyConfig {
    fn default() -> Self {
        IsotopyConfig {
            recipe: Recipe::ShrinkW,
            steps: 32,
            shift: Vec::new(),
            clearance_floor: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IsotopyPath {
    pub recipe: Recipe,
    pub s: Vec<f64>,
    pub discs: Vec<AnalyticDisc>,
    /// min over bΔ of the distance from A_s to Φ; infinite when Φ = ∅.
    pub clearances: Vec<f64>,
    pub residuals: Vec<f64>,
    pub terminal_diameter: f64,
    pub terminal: bool,
    /// Smallest clearance on the 2× refined s-grid.
    pub refined_min_clearance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsotopySummary {
    pub recipe: Recipe,
    pub steps: usize,
    pub min_clearance: f64,
    pub refined_min_clearance: f64,
    pub max_residual: f64,
    pub terminal_diameter: f64,
    pub terminal: bool,
    pub base_start: Vec<f64>,
    pub base_end: Vec<f64>,
}

impl IsotopyPath {
    pub fn min_clearance(&self) -> f64 {
        self.clearances.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> IsotopySummary {
        IsotopySummary {
            recipe: self.recipe,
            steps: self.s.len() - 1,
            min_clearance: self.min_clearance(),
            refined_min_clearance: self.refined_min_clearance,
            max_residual: self.residuals.iter().copied().fold(0.0, f64::max),
            terminal_diameter: self.terminal_diameter,
            terminal: self.terminal,
            base_start: self.discs[0].boundary_params(0),
            base_end: self.discs.last().expect("path has discs").boundary_params(0),
        }
    }
}

/// (shrink, move) fractions at time s.
fn schedule(recipe: Recipe, s: f64) -> (f64, f64) {
    match recipe {
        Recipe::ShrinkW => (s, 0.0),
        Recipe::MoveBase => (s, s),
        Recipe::Combined if s <= 0.5 => (0.0, 2.0 * s),
        Recipe::Combined => (2.0 * s - 1.0, 1.0),
    }
}

fn disc_at(
    m: &GenericManifold,
    disc: &AnalyticDisc,
    recipe: Recipe,
    shift: &[f64],
    s: f64,
    opts: &BishopOptions,
    init: Option<&AnalyticDisc>,
) -> Result<AnalyticDisc> {
    let (p, q) = (m.p(), m.q());
    let (shrink, mv) = schedule(recipe, s);
    let grid = disc.grid();
    let w: Vec<CircleFunction> = disc
        .w()
        .iter()
        .enumerate()
        .map(|(l, f)| {
            let w1 = f.at_one();
            let d = mv * Complex64::new(shift[l], shift[p + l]);
            let vals = f.values().iter().map(|&v| (1.0 - shrink) * (v - w1) + w1 + d).collect();
            CircleFunction::from_complex(grid, vals)
        })
        .collect::<Result<_>>()?;
    let x0: Vec<f64> = (0..q)
        .map(|k| disc.z()[k].at_one().re + mv * shift[2 * p + k])
        .collect();
    let seed: Option<Vec<Vec<f64>>> =
        init.map(|a| (0..q).map(|k| a.x(k).real_values()).collect());
    solve_bishop(m, &w, &x0, opts, seed.as_deref())
}

#[derive(Clone, Debug, PartialEq)]
enum Signature {
    None,
    Signs(Vec<bool>),
    Winding(i64),
}

fn signature(m: &GenericManifold, phi: &Submanifold, disc: &AnalyticDisc) -> Signature {
    let n = disc.grid().size();
    let g: Vec<Vec<f64>> = (0..n).map(|j| phi.eval_point(m, &disc.boundary_point(j))).collect();
    match phi.codim() {
        1 => Signature::Signs(g.iter().map(|v| v[0] > 0.0).collect()),
        2 => {
            let mut total = 0.0;
            for j in 0..n {
                let a = Complex64::new(g[j][0], g[j][1]);
                let b = Complex64::new(g[(j + 1) % n][0], g[(j + 1) % n][1]);
                total += (b / a).arg();
            }
            Signature::Winding((total / (2.0 * PI)).round() as i64)
        }
        _ => Signature::None,
    }
}

fn clearance(m: &GenericManifold, phi: Option<&Submanifold>, disc: &AnalyticDisc) -> (f64, usize) {
    let Some(phi) = phi else {
        return (f64::INFINITY, 0);
    };
    (0..disc.grid().size())
        .map(|j| (phi.distance(m, &disc.boundary_point(j)), j))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("grid is nonempty")
}

/// One Gauss–Newton step from the boundary point nearest to Φ.
fn nearest_phi_point(phi: &Submanifold, disc: &AnalyticDisc, node: usize) -> Vec<f64> {
    let params = disc.boundary_params(node);
    let g = DVector::from_vec(phi.eval_params(&params));
    match phi.gradient(&params).pseudo_inverse(1e-12) {
        Ok(pinv) => {
            let step = pinv * g;
            params.iter().zip(step.iter()).map(|(a, b)| a - b).collect()
        }
        Err(_) => params,
    }
}

fn diameter(disc: &AnalyticDisc) -> f64 {
    let z0 = disc.base_point();
    (0..disc.grid().size())
        .map(|j| {
            let d: f64 = disc.boundary_point(j).iter().zip(&z0).map(|(a, b)| (a - b).norm_sqr()).sum();
            d.sqrt()
        })
        .fold(0.0, f64::max)
}

/// Deforms `disc` to a constant disc along the chosen recipe, checking that
/// boundaries stay off Φ. With `m1`, the base point must move within M₁.
pub fn isotopy_to_point(
    m: &GenericManifold,
    disc: &AnalyticDisc,
    phi: Option<&Submanifold>,
    m1: Option<&Submanifold>,
    cfg: &IsotopyConfig,
    opts: &BishopOptions,
) -> Result<IsotopyPath> {
    if cfg.steps == 0 {
        return Err(Error::Config("isotopy needs at least one step".into()));
    }
    let shift = if cfg.shift.is_empty() {
        let mut v = vec![0.0; m.dim()];
        v[0] = 0.1;
        v
    } else if cfg.shift.len() == m.dim() {
        cfg.shift.clone()
    } else {
        return Err(Error::Config(format!(
            "isotopy shift has length {}, expected {}",
            cfg.shift.len(),
            m.dim()
        )));
    };
    let (c0, _) = clearance(m, phi, disc);
    if c0 <= cfg.clearance_floor {
        return Err(Error::Precondition(format!(
            "disc boundary meets Φ (clearance {c0:.3e})"
        )));
    }

    let blocked = |s: f64, a: &AnalyticDisc, node: usize| Error::IsotopyBlocked {
        s,
        nearest: phi.map(|p| nearest_phi_point(p, a, node)).unwrap_or_default(),
    };
    let check = |s: f64, a: &AnalyticDisc, prev: &Signature| -> Result<(f64, Signature)> {
        if a.attachment_residual(m) > ATTACHMENT_TOL && s < 1.0 {
            return Err(Error::Geometry(format!("disc at s = {s} is not attached")));
        }
        if let Some(m1) = m1 {
            let off = crate::manifold::norm(&m1.eval_point(m, &a.base_point()));
            if off > ATTACHMENT_TOL {
                return Err(Error::Precondition(format!(
                    "base point leaves M1 by {off:.3e} at s = {s}"
                )));
            }
        }
        let (cl, node) = clearance(m, phi, a);
        let sig = phi.map_or(Signature::None, |p| signature(m, p, a));
        if cl <= cfg.clearance_floor || (sig != *prev) {
            return Err(blocked(s, a, node));
        }
        Ok((cl, sig))
    };

    let mut sig = phi.map_or(Signature::None, |p| signature(m, p, disc));
    let mut s_grid = Vec::new();
    let mut discs: Vec<AnalyticDisc> = Vec::new();
    let mut clearances = Vec::new();
    let mut residuals = Vec::new();
    for k in 0..=cfg.steps {
        let s = k as f64 / cfg.steps as f64;
        let a = disc_at(m, disc, cfg.recipe, &shift, s, opts, discs.last())?;
        let (cl, next) = check(s, &a, &sig)?;
        sig = next;
        s_grid.push(s);
        clearances.push(cl);
        residuals.push(a.attachment_residual(m));
        discs.push(a);
    }

    // re-validate on the midpoints
    let mut refined = f64::INFINITY;
    for k in 0..cfg.steps {
        let s = (k as f64 + 0.5) / cfg.steps as f64;
        let a = disc_at(m, disc, cfg.recipe, &shift, s, opts, Some(&discs[k]))?;
        let prev = phi.map_or(Signature::None, |p| signature(m, p, &discs[k]));
        let (cl, _) = check(s, &a, &prev)?;
        refined = refined.min(cl);
    }
    refined = refined.min(clearances.iter().copied().fold(f64::INFINITY, f64::min));

    let terminal_diameter = diameter(discs.last().expect("path has discs"));
    Ok(IsotopyPath {
        recipe: cfg.recipe,
        s: s_grid,
        discs,
        clearances,
        residuals,
        terminal: terminal_diameter < TERMINAL_DIAMETER_TOL,
        terminal_diameter,
        refined_min_clearance: refined,
    })
}

/// Test geometry in C²: M = {y = |w|²}, N = {w = 0}, the disc
/// w = δ + c(1 − ζ) based at w = δ.
pub fn transversal_geometry(delta: f64, c: f64, opts: &BishopOptions) -> Result<(GenericManifold, Submanifold, AnalyticDisc)> {
    let m = GenericManifold::sphere_quadric(1, 1);
    let n = Submanifold::coordinate(&m, &[0, 1])?;
    let grid = crate::circle::CircleGrid::default();
    let w = vec![CircleFunction::sample_zeta(grid, |z| delta + c * (1.0 - z))];
    let disc = solve_bishop(&m, &w, &[0.0], opts, None)?;
    Ok((m, n, disc))
}

/// Φ = {(u₁ − c)² + v₁² = (c/2)²}: a cylinder inside the disc w = c(1 − ζ)
/// that every shrinking must cross.
pub fn blocking_ring(m: &GenericManifold, c: f64) -> Result<Submanifold> {
    use crate::poly::RealPoly;
    let d = m.dim();
    let g = RealPoly::monomial(d, 1.0, &[(0, 2)])
        .add(&RealPoly::monomial(d, -2.0 * c, &[(0, 1)]))
        .add(&RealPoly::monomial(d, 1.0, &[(m.p(), 2)]))
        .add(&RealPoly::monomial(d, 0.75 * c * c, &[]));
    Submanifold::new(m, vec![g])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> BishopOptions {
        BishopOptions::default()
    }

    #[test]
    fn empty_phi_always_shrinks() {
        let (m, _, d) = transversal_geometry(-0.03, 0.05, &opts()).unwrap();
        let path = isotopy_to_point(&m, &d, None, None, &IsotopyConfig::default(), &opts()).unwrap();
        assert!(path.terminal && path.terminal_diameter < 1e-9);
        assert!(path.residuals.iter().all(|&r| r <= 1e-9));
    }

    #[test]
    fn transversal_recipes_succeed() {
        let (m, n, d) = transversal_geometry(0.02, 0.05, &opts()).unwrap();
        let m1 = Submanifold::coordinate(&m, &[1]).unwrap();
        for recipe in [Recipe::ShrinkW, Recipe::MoveBase, Recipe::Combined] {
            let cfg = IsotopyConfig { recipe, ..Default::default() };
            let path = isotopy_to_point(&m, &d, Some(&n), Some(&m1), &cfg, &opts()).unwrap();
            assert!(path.terminal, "{recipe:?}");
            assert!(path.min_clearance() > 0.0 && path.refined_min_clearance > 0.0);
            // |w| ≥ δ along the whole path, and N is {w = 0}
            assert!(path.min_clearance() >= 0.02 - 1e-12, "{}", path.min_clearance());
        }
    }

    #[test]
    fn encircling_disc_is_blocked() {
        // the boundary winds around N, so shrinking must cross it
        let (m, n, d) = transversal_geometry(-0.03, 0.05, &opts()).unwrap();
        let err = isotopy_to_point(&m, &d, Some(&n), None, &IsotopyConfig::default(), &opts()).unwrap_err();
        assert!(matches!(err, Error::IsotopyBlocked { .. }), "{err}");
    }

    #[test]
    fn ring_blocks_every_recipe() {
        let c = 0.05;
        let (m, _, d) = transversal_geometry(0.0, c, &opts()).unwrap();
        let phi = blocking_ring(&m, c).unwrap();
        for recipe in [Recipe::ShrinkW, Recipe::MoveBase, Recipe::Combined] {
            let cfg = IsotopyConfig { recipe, ..Default::default() };
            match isotopy_to_point(&m, &d, Some(&phi), None, &cfg, &opts()) {
                Err(Error::IsotopyBlocked { s, nearest }) => {
                    assert!(s > 0.0 && s < 1.0);
                    let g = phi.eval_params(&nearest)[0];
                    assert!(g.abs() < 1e-4, "{g}");
                }
                other => panic!("{recipe:?}: {other:?}"),
            }
        }
    }
}
