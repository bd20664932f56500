//! Bishop's equation and discs attached to M.
//!
//! Given the holomorphic w-component of a disc, the x-component solves
//! x = −T₁[H(ζ, w, x)] + x⁰ on bΔ and y = H(ζ, w, x); the z-component
//! x + iy is then holomorphic. H is h itself or one of the deformed graphs
//! built in [`crate::deform`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::{self, interior_eval, CircleFunction, CircleGrid, FourierCoefficients};
use crate::error::{Error, Result};
use crate::linalg;
use crate::manifold::{tangency_check, GenericManifold, Submanifold};

/// Relative negative-mode content tolerated in a prescribed w-component.
pub const W_HOLOMORPHIC_TOL: f64 = 1e-10;
pub const ATTACHMENT_TOL: f64 = 1e-9;

/// A graph y = H(ζ, u, v, x) over the boundary nodes.
pub trait BoundaryGraph {
    fn p(&self) -> usize;
    fn q(&self) -> usize;
    /// H at boundary node `node` over P = (u, v, x), written into `out`.
    fn value(&self, node: usize, params: &[f64], out: &mut [f64]);
    /// ∂H/∂x at boundary node `node`, q × q.
    fn h_x(&self, node: usize, params: &[f64]) -> DMatrix<f64>;
}

impl BoundaryGraph for GenericManifold {
    fn p(&self) -> usize {
        GenericManifold::p(self)
    }

    fn q(&self) -> usize {
        GenericManifold::q(self)
    }

    fn value(&self, _node: usize, params: &[f64], out: &mut [f64]) {
        for (o, hj) in out.iter_mut().zip(self.h()) {
            *o = hj.eval(params);
        }
    }

    fn h_x(&self, _node: usize, params: &[f64]) -> DMatrix<f64> {
        self.h_x_at(params)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BishopOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Initial Picard damping, halved whenever the residual grows.
    pub damping: f64,
    /// Trust region for ‖x‖∞.
    pub trust_radius: f64,
}

impl Default for BishopOptions {
    fn default() -> Self {
        BishopOptions {
            max_iter: 200,
            tol: 1e-11,
            damping: 1.0,
            trust_radius: 1.0,
        }
    }
}

/// Boundary values of an analytic disc in C^n = C^p_w × C^q_z.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticDisc {
    p: usize,
    q: usize,
    components: Vec<CircleFunction>,
    residual: f64,
    iterations: usize,
}

impl AnalyticDisc {
    /// A disc given directly by its boundary values, e.g. one not attached
    /// to any manifold. All components are treated as w-components.
    pub fn from_components(components: Vec<CircleFunction>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("a disc needs at least one component".into()));
        }
        let grid = components[0].grid();
        if components.iter().any(|c| c.grid() != grid) {
            return Err(Error::Domain("disc components live on different grids".into()));
        }
        Ok(AnalyticDisc {
            p: components.len(),
            q: 0,
            components,
            residual: 0.0,
            iterations: 0,
        })
    }

    /// The constant disc at z.
    pub fn constant(grid: CircleGrid, z: &[Complex64], p: usize) -> Self {
        AnalyticDisc {
            p,
            q: z.len() - p,
            components: z.iter().map(|&c| CircleFunction::constant(grid, c)).collect(),
            residual: 0.0,
            iterations: 0,
        }
    }

    pub fn grid(&self) -> CircleGrid {
        self.components[0].grid()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[CircleFunction] {
        &self.components
    }

    pub fn w(&self) -> &[CircleFunction] {
        &self.components[..self.p]
    }

    pub fn z(&self) -> &[CircleFunction] {
        &self.components[self.p..]
    }

    pub fn x(&self, k: usize) -> CircleFunction {
        self.components[self.p + k].re()
    }

    pub fn y(&self, k: usize) -> CircleFunction {
        self.components[self.p + k].im()
    }

    /// Bishop residual ‖x + T₁H(w, x) − x⁰‖∞ at solve time.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// A(1), read exactly at node 0.
    pub fn base_point(&self) -> Vec<Complex64> {
        self.boundary_point(0)
    }

    pub fn boundary_point(&self, j: usize) -> Vec<Complex64> {
        self.components.iter().map(|c| c.value(j)).collect()
    }

    /// (Re w, Im w, Re z) at node j.
    pub fn boundary_params(&self, j: usize) -> Vec<f64> {
        params_from_point(self.p, &self.boundary_point(j))
    }

    /// Boundary value at an arbitrary angle by trigonometric interpolation.
    pub fn boundary_at(&self, theta: f64) -> Vec<Complex64> {
        self.components.iter().map(|c| c.eval_at(theta)).collect()
    }

    pub fn eval_interior(&self, zeta: Complex64) -> Result<Vec<Complex64>> {
        self.components.iter().map(|c| interior_eval(c, zeta)).collect()
    }

    /// (d/dθ) A at ζ = 1.
    pub fn tangent_at_one(&self) -> Vec<Complex64> {
        self.components.iter().map(|c| c.d_theta_at_one()).collect()
    }

    /// Largest relative negative-mode content over the components.
    pub fn holomorphy_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.negative_mode_content())
            .fold(0.0, f64::max)
    }

    /// sup over nodes of |r(A(ζ_j))|.
    pub fn attachment_residual(&self, m: &GenericManifold) -> f64 {
        (0..self.grid().size())
            .map(|j| crate::manifold::norm(&m.eval_r(&self.boundary_point(j))))
            .fold(0.0, f64::max)
    }

    /// sup over nodes of |y − H(ζ, u, v, x)| for an arbitrary boundary graph.
    pub fn graph_residual(&self, graph: &dyn BoundaryGraph) -> f64 {
        let mut buf = vec![0.0; self.q];
        let mut worst: f64 = 0.0;
        for j in 0..self.grid().size() {
            graph.value(j, &self.boundary_params(j), &mut buf);
            for k in 0..self.q {
                worst = worst.max((self.components[self.p + k].value(j).im - buf[k]).abs());
            }
        }
        worst
    }

    /// sup |A − B| + sup |A_θ − B_θ| over all components.
    pub fn c1_distance(&self, other: &AnalyticDisc) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b).c1_norm())
            .fold(0.0, f64::max)
    }

    pub fn to_record(&self) -> DiscRecord {
        DiscRecord {
            grid: self.grid().size(),
            p: self.p,
            q: self.q,
            residual: self.residual,
            iterations: self.iterations,
            base_point: self.base_point().iter().map(|z| [z.re, z.im]).collect(),
            components: self
                .components
                .iter()
                .map(|c| {
                    let f = c.fourier();
                    FourierRecord {
                        re: f.raw().iter().map(|z| z.re).collect(),
                        im: f.raw().iter().map(|z| z.im).collect(),
                    }
                })
                .collect(),
        }
    }

    pub fn from_record(rec: &DiscRecord) -> Result<Self> {
        let grid = CircleGrid::new(rec.grid)?;
        let components = rec
            .components
            .iter()
            .map(|f| {
                let coeffs = f.re.iter().zip(&f.im).map(|(&a, &b)| Complex64::new(a, b)).collect();
                Ok(circle::ifft(&FourierCoefficients::from_raw(grid, coeffs)?))
            })
            .collect::<Result<Vec<_>>>()?;
        if components.len() != rec.p + rec.q {
            return Err(Error::Config("disc record has the wrong number of components".into()));
        }
        Ok(AnalyticDisc {
            p: rec.p,
            q: rec.q,
            components,
            residual: rec.residual,
            iterations: rec.iterations,
        })
    }
}

pub(crate) fn params_from_point(p: usize, z: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(z.len() + p);
    out.extend(z[..p].iter().map(|c| c.re));
    out.extend(z[..p].iter().map(|c| c.im));
    out.extend(z[p..].iter().map(|c| c.re));
    out
}

/// Serialized disc: normalized Fourier coefficients (FFT order) of each
/// component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscRecord {
    pub grid: usize,
    pub p: usize,
    pub q: usize,
    pub residual: f64,
    pub iterations: usize,
    pub base_point: Vec<[f64; 2]>,
    pub components: Vec<FourierRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierRecord {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Solves Bishop's equation for the prescribed w-component.
///
/// `init` optionally seeds the Picard iteration with x-samples (q rows of
/// length N); node 0 is always reset to x⁰.
pub fn solve_bishop(
    graph: &dyn BoundaryGraph,
    w: &[CircleFunction],
    x0: &[f64],
    opts: &BishopOptions,
    init: Option<&[Vec<f64>]>,
) -> Result<AnalyticDisc> {
    let (p, q) = (graph.p(), graph.q());
    if w.len() != p || x0.len() != q {
        return Err(Error::Domain(format!(
            "Bishop data has {} w-components and {} offsets, expected {p} and {q}",
            w.len(),
            x0.len()
        )));
    }
    let grid = w[0].grid();
    if w.iter().any(|f| f.grid() != grid) {
        return Err(Error::Domain("w-components live on different grids".into()));
    }
    for f in w {
        let content = f.negative_mode_content();
        if content > W_HOLOMORPHIC_TOL {
            return Err(Error::NotHolomorphic { content });
        }
    }
    let n = grid.size();
    let nv = 2 * p + q;
    // parameter vectors per node; the x slots are rewritten every sweep
    let mut params: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut v = vec![0.0; nv];
            for l in 0..p {
                v[l] = w[l].value(j).re;
                v[p + l] = w[l].value(j).im;
            }
            v
        })
        .collect();
    let mut x: Vec<Vec<f64>> = match init {
        Some(x_init) => {
            if x_init.len() != q || x_init.iter().any(|r| r.len() != n) {
                return Err(Error::Domain("initial guess has the wrong shape".into()));
            }
            x_init.to_vec()
        }
        None => (0..q).map(|k| vec![x0[k]; n]).collect(),
    };
    for k in 0..q {
        x[k][0] = x0[k];
    }

    let mut y = vec![vec![0.0; n]; q];
    let mut hbuf = vec![0.0; q];
    let mut eval_h = |x: &[Vec<f64>], y: &mut [Vec<f64>], params: &mut [Vec<f64>]| {
        for j in 0..n {
            for k in 0..q {
                params[j][2 * p + k] = x[k][j];
            }
            graph.value(j, &params[j], &mut hbuf);
            for k in 0..q {
                y[k][j] = hbuf[k];
            }
        }
    };

    let mut damping = opts.damping;
    let mut prev = f64::INFINITY;
    let mut converged = None;
    for iter in 0..opts.max_iter {
        eval_h(&x, &mut y, &mut params);
        let x_new: Vec<Vec<f64>> = (0..q)
            .map(|k| {
                circle::t1_real(grid, &y[k])
                    .into_iter()
                    .map(|t| x0[k] - t)
                    .collect()
            })
            .collect();
        let mut residual: f64 = 0.0;
        let mut sup: f64 = 0.0;
        for k in 0..q {
            for j in 0..n {
                residual = residual.max((x_new[k][j] - x[k][j]).abs());
                sup = sup.max(x_new[k][j].abs());
            }
        }
        if !residual.is_finite() || !sup.is_finite() || sup > opts.trust_radius {
            return Err(Error::TrustRegion {
                norm: sup,
                radius: opts.trust_radius,
            });
        }
        if residual <= opts.tol {
            converged = Some((residual, iter));
            break;
        }
        if residual > prev {
            damping *= 0.5;
            if damping < 1e-6 {
                return Err(Error::Contraction {
                    residual,
                    iterations: iter,
                });
            }
        }
        prev = residual;
        for k in 0..q {
            for j in 0..n {
                x[k][j] += damping * (x_new[k][j] - x[k][j]);
            }
        }
    }
    let Some((residual, iterations)) = converged else {
        return Err(Error::Contraction {
            residual: prev,
            iterations: opts.max_iter,
        });
    };
    // y is already H(w, x) for the accepted iterate
    let mut components: Vec<CircleFunction> = w.to_vec();
    for k in 0..q {
        let vals = (0..n).map(|j| Complex64::new(x[k][j], y[k][j])).collect();
        components.push(CircleFunction::from_complex(grid, vals)?);
    }
    Ok(AnalyticDisc {
        p,
        q,
        components,
        residual,
        iterations,
    })
}

/// w-component w⁰ + c(1 − ζ)·dir; `dir` defaults to e₁.
pub fn seed_disc_w(
    grid: CircleGrid,
    w0: &[Complex64],
    c: f64,
    dir: Option<&[Complex64]>,
) -> Vec<CircleFunction> {
    let p = w0.len();
    (0..p)
        .map(|l| {
            let d = match dir {
                Some(d) => d[l],
                None if l == 0 => Complex64::new(1.0, 0.0),
                None => Complex64::new(0.0, 0.0),
            };
            CircleFunction::sample_zeta(grid, |z| w0[l] + d * c * (1.0 - z))
        })
        .collect()
}

/// Boundary angles where a disc meets a hypersurface of M.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub thetas: Vec<f64>,
}

const CROSSING_THETA_TOL: f64 = 1e-10;

/// Roots in [0, 2π) of θ ↦ g(A(e^{iθ})) for a scalar equation g, found by
/// exact zeros at nodes and sign-change bisection on the interpolant.
pub fn boundary_crossings(disc: &AnalyticDisc, g: &crate::poly::RealPoly) -> Vec<f64> {
    let grid = disc.grid();
    let n = grid.size();
    let p = disc.p();
    let vals: Vec<f64> = (0..n).map(|j| g.eval(&disc.boundary_params(j))).collect();
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let zero_tol = 1e-13 * scale;
    let coeffs: Vec<FourierCoefficients> = disc.components().iter().map(|c| c.fourier()).collect();
    let eval = |theta: f64| {
        let z: Vec<Complex64> = coeffs.iter().map(|c| c.evaluate(theta)).collect();
        g.eval(&params_from_point(p, &z))
    };
    let mut roots = Vec::new();
    for j in 0..n {
        let a = vals[j];
        let b = vals[(j + 1) % n];
        if a.abs() <= zero_tol {
            roots.push(grid.theta(j));
            continue;
        }
        if b.abs() <= zero_tol || a.signum() == b.signum() {
            continue;
        }
        let (mut lo, mut hi) = (grid.theta(j), grid.theta(j) + 2.0 * PI / n as f64);
        let mut flo = a;
        while hi - lo > CROSSING_THETA_TOL {
            let mid = 0.5 * (lo + hi);
            let fm = eval(mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

/// The disc with w = w⁰ + c(1−ζ)e₁ through the base point of M, and its
/// crossings with the hypersurface M₁ ⊂ M.
pub fn build_seed_disc(
    m: &GenericManifold,
    m1: &Submanifold,
    c: f64,
    grid: CircleGrid,
    opts: &BishopOptions,
) -> Result<(AnalyticDisc, CrossingReport)> {
    if m1.codim() != 1 {
        return Err(Error::Precondition(format!(
            "M1 must be a hypersurface of M, got codimension {}",
            m1.codim()
        )));
    }
    if c <= 0.0 {
        return Err(Error::Config(format!("disc size c must be positive, got {c}")));
    }
    let z0 = m.base_point();
    let w = seed_disc_w(grid, &z0[..m.p()], c, None);
    let x0: Vec<f64> = z0[m.p()..].iter().map(|z| z.re).collect();
    let disc = solve_bishop(m, &w, &x0, opts, None).map_err(|e| match e {
        Error::TrustRegion { .. } | Error::Contraction { .. } => {
            Error::Geometry(format!("disc size c = {c} is outside the solvable region: {e}"))
        }
        other => other,
    })?;
    let thetas = boundary_crossings(&disc, &m1.equations()[0]);
    if thetas.len() != 2 || thetas[0] != 0.0 {
        return Err(Error::Geometry(format!(
            "expected exactly two crossings with M1 (one at θ = 0), found {thetas:?}"
        )));
    }
    Ok((disc, CrossingReport { thetas }))
}

/// Family of attached discs through a fixed base point, parameterized by
/// real coordinates s ∈ R^dim.
pub trait DiscFamily {
    fn n(&self) -> usize;
    fn dim(&self) -> usize;
    fn disc(&self, params: &[f64]) -> Result<AnalyticDisc>;
}

/// Discs with w = w_base + Σ s_m φ_m where φ_m runs over (ζ^k − 1)e_l and
/// i(ζ^k − 1)e_l, k = 1..=degree. Every φ_m vanishes at 1, so A(1) is fixed.
pub struct WPerturbationFamily<'a> {
    graph: &'a dyn BoundaryGraph,
    base_w: Vec<CircleFunction>,
    x0: Vec<f64>,
    basis: Vec<(usize, CircleFunction)>,
    opts: BishopOptions,
    init: Option<Vec<Vec<f64>>>,
}

impl<'a> WPerturbationFamily<'a> {
    pub fn new(
        graph: &'a dyn BoundaryGraph,
        base: &AnalyticDisc,
        degree: usize,
        opts: BishopOptions,
    ) -> Self {
        let grid = base.grid();
        let mut basis = Vec::new();
        for l in 0..graph.p() {
            for k in 1..=degree {
                for coef in [Complex64::new(1.0, 0.0), Complex64::i()] {
                    let phi = CircleFunction::sample_zeta(grid, |z| coef * (z.powu(k as u32) - 1.0));
                    basis.push((l, phi));
                }
            }
        }
        let x0 = (0..graph.q()).map(|k| base.z()[k].at_one().re).collect();
        let init = Some((0..graph.q()).map(|k| base.x(k).real_values()).collect());
        WPerturbationFamily {
            graph,
            base_w: base.w().to_vec(),
            x0,
            basis,
            opts,
            init,
        }
    }

    /// Keeps only the first `dim` basis directions.
    pub fn truncated(mut self, dim: usize) -> Self {
        self.basis.truncate(dim);
        self
    }

    pub fn w_at(&self, params: &[f64]) -> Vec<CircleFunction> {
        let mut w = self.base_w.clone();
        for ((l, phi), &s) in self.basis.iter().zip(params) {
            if s != 0.0 {
                w[*l] = w[*l].add(&phi.scale(Complex64::new(s, 0.0)));
            }
        }
        w
    }
}

impl DiscFamily for WPerturbationFamily<'_> {
    fn n(&self) -> usize {
        self.graph.p() + self.graph.q()
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn disc(&self, params: &[f64]) -> Result<AnalyticDisc> {
        solve_bishop(
            self.graph,
            &self.w_at(params),
            &self.x0,
            &self.opts,
            self.init.as_deref(),
        )
    }
}

/// Observable of a disc read off after solving.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    /// A(ζ_j) at grid node j.
    Evaluation { node: usize },
    /// (d/dθ) A at ζ = 1.
    TangentAtOne,
}

impl Observable {
    pub fn read(&self, disc: &AnalyticDisc) -> Vec<Complex64> {
        match *self {
            Observable::Evaluation { node } => disc.boundary_point(node),
            Observable::TangentAtOne => disc.tangent_at_one(),
        }
    }
}

pub const JACOBIAN_STEP: f64 = 1e-5;

/// Central-difference Jacobian of an observable over the family parameters,
/// as a 2n × dim real matrix in interleaved coordinates.
pub fn disc_jacobian(
    family: &dyn DiscFamily,
    at: &[f64],
    observable: Observable,
    step: f64,
) -> Result<DMatrix<f64>> {
    let dim = family.dim();
    let n = family.n();
    let mut jac = DMatrix::zeros(2 * n, dim);
    for i in 0..dim {
        let mut plus = at.to_vec();
        let mut minus = at.to_vec();
        plus[i] += step;
        minus[i] -= step;
        let op = linalg::to_real(&observable.read(&family.disc(&plus)?));
        let om = linalg::to_real(&observable.read(&family.disc(&minus)?));
        jac.set_column(i, &((op - om) / (2.0 * step)));
    }
    Ok(jac)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GoodDiscConfig {
    /// Radius of the allowed C¹ ball around the seed disc.
    pub delta: f64,
    /// Required distance from N at the second crossing and along the boundary
    /// outside the exclusion arc around ζ = 1.
    pub clearance: f64,
    /// Half-width of the arc around ζ = 1 excluded from the boundary check.
    pub exclusion_arc: f64,
    /// Maximum number of search steps.
    pub budget: usize,
    /// Highest power of ζ in the perturbation slice.
    pub degree: usize,
}

impl Default for GoodDiscConfig {
    fn default() -> Self {
        GoodDiscConfig {
            delta: 0.01,
            clearance: 1e-3,
            exclusion_arc: PI / 8.0,
            budget: 12,
            degree: 2,
        }
    }
}

/// Disc through z₀ whose boundary avoids N away from ζ = 1.
#[derive(Clone, Debug)]
pub struct GoodDisc {
    pub disc: AnalyticDisc,
    pub seed: AnalyticDisc,
    pub perturbation: Vec<f64>,
    pub crossings: CrossingReport,
    pub crossing_clearance: f64,
    pub boundary_clearance: f64,
    pub distance_to_seed: f64,
    pub v0: Vec<Complex64>,
    /// Relative distance of v₀ from T^c_{z₀}M.
    pub v0_tc_residual: f64,
    /// Relative distance of v₀ from T_{z₀}N.
    pub v0_tn_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodDiscSummary {
    pub perturbed: bool,
    pub perturbation: Vec<f64>,
    pub crossings: Vec<f64>,
    pub crossing_clearance: f64,
    pub boundary_clearance: f64,
    pub distance_to_seed: f64,
    pub v0: Vec<[f64; 2]>,
    pub v0_tc_residual: f64,
    pub v0_tn_residual: f64,
}

impl GoodDisc {
    pub fn summary(&self) -> GoodDiscSummary {
        GoodDiscSummary {
            perturbed: self.perturbation.iter().any(|&s| s != 0.0),
            perturbation: self.perturbation.clone(),
            crossings: self.crossings.thetas.clone(),
            crossing_clearance: self.crossing_clearance,
            boundary_clearance: self.boundary_clearance,
            distance_to_seed: self.distance_to_seed,
            v0: self.v0.iter().map(|z| [z.re, z.im]).collect(),
            v0_tc_residual: self.v0_tc_residual,
            v0_tn_residual: self.v0_tn_residual,
        }
    }
}

/// Non-tangency threshold for v₀.
const V0_TOL: f64 = 1e-8;

struct Candidate {
    disc: AnalyticDisc,
    crossings: Vec<f64>,
    crossing_clearance: f64,
    boundary_clearance: f64,
    distance: f64,
}

fn evaluate_candidate(
    m: &GenericManifold,
    n: &Submanifold,
    m1: &Submanifold,
    base: &AnalyticDisc,
    disc: AnalyticDisc,
    cfg: &GoodDiscConfig,
) -> Option<Candidate> {
    let crossings = boundary_crossings(&disc, &m1.equations()[0]);
    if crossings.len() != 2 || crossings[0] != 0.0 {
        return None;
    }
    let at = disc.boundary_at(crossings[1]);
    let crossing_clearance = n.distance(m, &at);
    let grid = disc.grid();
    let boundary_clearance = (0..grid.size())
        .filter(|&j| {
            let t = grid.theta(j);
            t.min(2.0 * PI - t) >= cfg.exclusion_arc
        })
        .map(|j| n.distance(m, &disc.boundary_point(j)))
        .fold(crossing_clearance, f64::min);
    let distance = disc.c1_distance(base);
    Some(Candidate {
        disc,
        crossings,
        crossing_clearance,
        boundary_clearance,
        distance,
    })
}

/// Searches the slice of w-perturbations vanishing at 1 for a disc whose
/// second crossing with M₁ stays away from N.
pub fn find_good_disc(
    m: &GenericManifold,
    n: &Submanifold,
    m1: &Submanifold,
    c: f64,
    grid: CircleGrid,
    cfg: &GoodDiscConfig,
    opts: &BishopOptions,
) -> Result<GoodDisc> {
    if n.codim() < 2 {
        return Err(Error::Precondition(format!(
            "N must have codimension at least 2 in M, got {}",
            n.codim()
        )));
    }
    let z0 = m.base_point().to_vec();
    if tangency_check(n, m, &z0)?.contains_tc {
        return Err(Error::Precondition(
            "T_{z0}N contains the complex tangent space of M".into(),
        ));
    }
    let (seed, _) = build_seed_disc(m, m1, c, grid, opts)?;
    let family = WPerturbationFamily::new(m, &seed, cfg.degree, *opts);
    let dim = family.dim();

    let observe = |cand: &Candidate| -> DVector<f64> {
        let at = cand.disc.boundary_at(cand.crossings[1]);
        DVector::from_vec(n.eval_point(m, &at))
    };

    let mut s = vec![0.0; dim];
    let mut current = evaluate_candidate(m, n, m1, &seed, seed.clone(), cfg)
        .ok_or_else(|| Error::Geometry("seed disc lost its crossings".into()))?;
    let mut closest = current.boundary_clearance;
    let mut steps = 0;
    while current.boundary_clearance < cfg.clearance && steps < cfg.budget {
        steps += 1;
        // Jacobian of N's equations at the moving crossing
        let h = JACOBIAN_STEP;
        let o = observe(&current);
        let mut jac = DMatrix::zeros(o.len(), dim);
        for i in 0..dim {
            let mut sp = s.clone();
            let mut sm = s.clone();
            sp[i] += h;
            sm[i] -= h;
            let cp = evaluate_candidate(m, n, m1, &seed, family.disc(&sp)?, cfg);
            let cm = evaluate_candidate(m, n, m1, &seed, family.disc(&sm)?, cfg);
            let (Some(cp), Some(cm)) = (cp, cm) else { continue };
            jac.set_column(i, &((observe(&cp) - observe(&cm)) / (2.0 * h)));
        }
        let target = 2.0 * cfg.clearance;
        let dir = if o.norm() > 1e-3 * cfg.clearance {
            o.clone() / o.norm()
        } else {
            let svd = jac.clone().svd(true, false);
            let u = svd.u.expect("requested U");
            let k = svd
                .singular_values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            u.column(k).into_owned()
        };
        let want = dir * target - &o;
        let Ok(pinv) = jac.clone().pseudo_inverse(1e-10) else { break };
        let ds = pinv * want;
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-3 {
            let trial: Vec<f64> = s.iter().zip(ds.iter()).map(|(a, b)| a + alpha * b).collect();
            if let Ok(disc) = family.disc(&trial) {
                if let Some(cand) = evaluate_candidate(m, n, m1, &seed, disc, cfg) {
                    if cand.distance <= cfg.delta
                        && cand.boundary_clearance > current.boundary_clearance
                    {
                        s = trial;
                        current = cand;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        closest = closest.max(current.boundary_clearance);
        if !accepted {
            break;
        }
    }
    if current.boundary_clearance < cfg.clearance {
        return Err(Error::NoGoodDisc { closest });
    }

    let v0 = current.disc.tangent_at_one();
    let v0r = linalg::to_real(&v0);
    let tc = linalg::column_basis(&m.complex_tangent_basis(&z0)?, 1e-12);
    let tn = n.tangent_basis(m, &z0);
    let v0_tc_residual = linalg::projection_residual(&tc, &v0r);
    let v0_tn_residual = linalg::projection_residual(&tn, &v0r);
    if v0_tc_residual <= V0_TOL || v0_tn_residual <= V0_TOL {
        return Err(Error::Geometry(format!(
            "v0 is tangent to T^cM or T_N (residuals {v0_tc_residual:.3e}, {v0_tn_residual:.3e})"
        )));
    }
    Ok(GoodDisc {
        disc: current.disc,
        seed,
        perturbation: s,
        crossings: CrossingReport {
            thetas: current.crossings,
        },
        crossing_clearance: current.crossing_clearance,
        boundary_clearance: current.boundary_clearance,
        distance_to_seed: current.distance,
        v0,
        v0_tc_residual,
        v0_tn_residual,
    })
}
