//! Normal deformations of an attached disc and the wedge they sweep out.
//!
//! The deformed graphs are y = h(w, x) + κ(tχ(ζ))·μ(w, x) over the boundary,
//! where χ is a bump near ζ = −1 with J(χ) = 1 and μ is a bump around
//! (w(−1), x(−1)). Varying t moves the normal part of the tangent vector at
//! ζ = 1; rotating w₁, shifting w₂..w_p and moving the base point along a
//! hypersurface K supply the remaining directions.

use std::f64::consts::PI;
use std::fmt::Write as _;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bishop::{solve_bishop, AnalyticDisc, BishopOptions, BoundaryGraph};
use crate::circle::{self, j_functional, CircleFunction, CircleGrid};
use crate::error::{Error, Result};
use crate::linalg::{self, RankDecision};
use crate::manifold::{GenericManifold, Submanifold};
use crate::poly::RealPoly;

pub const CROSS_CHECK_TOL: f64 = 1e-6;
pub const CONE_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeformProfile {
    /// κ(s) = s / (1 + |s|⁴/ρ⁴)^¼ saturates at this radius.
    pub kappa_radius: f64,
    pub mu_radius: f64,
    /// χ is supported in |θ − π| < this half-width.
    pub chi_halfwidth: f64,
}

impl Default for DeformProfile {
    fn default() -> Self {
        DeformProfile {
            kappa_radius: 0.1,
            mu_radius: 0.2,
            chi_halfwidth: PI / 4.0,
        }
    }
}

/// exp(1 − 1/(1 − s²)) on [0, 1), zero beyond; equals 1 at 0.
fn bump(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Bump on the circle supported near ζ = −1, scaled so that J(χ) = 1.
pub fn normalized_chi(grid: CircleGrid, halfwidth: f64) -> Result<CircleFunction> {
    if !(halfwidth > 0.0 && halfwidth < PI / 2.0) {
        return Err(Error::Config(format!(
            "chi half-width must lie in (0, π/2), got {halfwidth}"
        )));
    }
    let raw = CircleFunction::sample_real(grid, |t| {
        let d = t - PI;
        if d.abs() >= halfwidth {
            0.0
        } else {
            (-halfwidth * halfwidth / (halfwidth * halfwidth - d * d)).exp()
        }
    });
    let j = j_functional(&raw)?;
    Ok(raw.scale(Complex64::new(1.0 / j, 0.0)))
}

/// The family of graphs y = H(w, x, tχ) around a disc.
#[derive(Clone, Debug)]
pub struct DeformedGraph {
    base: GenericManifold,
    chi: Vec<f64>,
    chi_fn: CircleFunction,
    center: Vec<f64>,
    profile: DeformProfile,
}

impl DeformedGraph {
    /// Centers μ at the parameters of A(−1).
    pub fn new(base: &GenericManifold, disc: &AnalyticDisc, profile: DeformProfile) -> Result<Self> {
        if profile.kappa_radius <= 0.0 || profile.mu_radius <= 0.0 {
            return Err(Error::Config("deformation radii must be positive".into()));
        }
        let grid = disc.grid();
        let chi_fn = normalized_chi(grid, profile.chi_halfwidth)?;
        Ok(DeformedGraph {
            base: base.clone(),
            chi: chi_fn.real_values(),
            chi_fn,
            center: disc.boundary_params(grid.size() / 2),
            profile,
        })
    }

    pub fn base(&self) -> &GenericManifold {
        &self.base
    }

    pub fn chi(&self) -> &CircleFunction {
        &self.chi_fn
    }

    pub fn profile(&self) -> &DeformProfile {
        &self.profile
    }

    pub fn kappa(&self, s: &[f64]) -> Vec<f64> {
        let rho = self.profile.kappa_radius;
        let n2: f64 = s.iter().map(|v| v * v).sum::<f64>() / (rho * rho);
        let f = (1.0 + n2 * n2).powf(-0.25);
        s.iter().map(|v| v * f).collect()
    }

    pub fn mu(&self, params: &[f64]) -> f64 {
        let r = self.profile.mu_radius;
        let d2: f64 = params.iter().zip(&self.center).map(|(a, b)| (a - b).powi(2)).sum();
        bump(d2.sqrt() / r)
    }

    /// ∂μ/∂x.
    pub fn mu_x(&self, params: &[f64]) -> Vec<f64> {
        let r = self.profile.mu_radius;
        let d2: f64 = params.iter().zip(&self.center).map(|(a, b)| (a - b).powi(2)).sum();
        let s2 = d2 / (r * r);
        let off = 2 * self.base.p();
        if s2 >= 1.0 {
            return vec![0.0; self.base.q()];
        }
        let f = bump(s2.sqrt()) * (-2.0 / (1.0 - s2).powi(2)) / (r * r);
        (0..self.base.q())
            .map(|k| f * (params[off + k] - self.center[off + k]))
            .collect()
    }

    /// The graph at a fixed deformation parameter t.
    pub fn at(&self, t: &[f64]) -> DeformedSlice<'_> {
        DeformedSlice {
            dg: self,
            t: t.to_vec(),
        }
    }
}

pub struct DeformedSlice<'a> {
    dg: &'a DeformedGraph,
    t: Vec<f64>,
}

impl DeformedSlice<'_> {
    fn kappa_at(&self, node: usize) -> Vec<f64> {
        let c = self.dg.chi[node];
        let s: Vec<f64> = self.t.iter().map(|v| v * c).collect();
        self.dg.kappa(&s)
    }
}

impl BoundaryGraph for DeformedSlice<'_> {
    fn p(&self) -> usize {
        self.dg.base.p()
    }

    fn q(&self) -> usize {
        self.dg.base.q()
    }

    fn value(&self, node: usize, params: &[f64], out: &mut [f64]) {
        self.dg.base.value(node, params, out);
        if self.t.iter().all(|&v| v == 0.0) {
            return;
        }
        let k = self.kappa_at(node);
        let mu = self.dg.mu(params);
        for (o, kj) in out.iter_mut().zip(k) {
            *o += kj * mu;
        }
    }

    fn h_x(&self, node: usize, params: &[f64]) -> DMatrix<f64> {
        let mut hx = self.dg.base.h_x_at(params);
        if self.t.iter().any(|&v| v != 0.0) {
            let k = self.kappa_at(node);
            let mx = self.dg.mu_x(params);
            for j in 0..k.len() {
                for l in 0..mx.len() {
                    hx[(j, l)] += k[j] * mx[l];
                }
            }
        }
        hx
    }
}

/// Solution of G = I + T₁(G·H_x∘A), node by node.
#[derive(Clone, Debug)]
pub struct GMatrix {
    grid: CircleGrid,
    g: Vec<DMatrix<f64>>,
    pub residual: f64,
    pub iterations: usize,
}

impl GMatrix {
    pub fn at(&self, j: usize) -> &DMatrix<f64> {
        &self.g[j]
    }

    pub fn to_circle(&self) -> Result<circle::CircleMatrix> {
        circle::CircleMatrix::from_real_nodes(self.grid, &self.g)
    }
}

fn t1_matrix(grid: CircleGrid, m: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    let (r, c) = m[0].shape();
    let mut out = vec![DMatrix::zeros(r, c); m.len()];
    for a in 0..r {
        for b in 0..c {
            let vals: Vec<f64> = m.iter().map(|x| x[(a, b)]).collect();
            for (j, v) in circle::t1_real(grid, &vals).into_iter().enumerate() {
                out[j][(a, b)] = v;
            }
        }
    }
    out
}

fn hx_nodes(disc: &AnalyticDisc, graph: &dyn BoundaryGraph) -> Vec<DMatrix<f64>> {
    (0..disc.grid().size())
        .map(|j| graph.h_x(j, &disc.boundary_params(j)))
        .collect()
}

pub fn solve_g_matrix(
    disc: &AnalyticDisc,
    graph: &dyn BoundaryGraph,
    opts: &BishopOptions,
) -> Result<GMatrix> {
    let grid = disc.grid();
    let q = graph.q();
    let hx = hx_nodes(disc, graph);
    let id = DMatrix::<f64>::identity(q, q);
    let mut g = vec![id.clone(); grid.size()];
    let mut last = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let prod: Vec<DMatrix<f64>> = g.iter().zip(&hx).map(|(a, b)| a * b).collect();
        let next: Vec<DMatrix<f64>> = t1_matrix(grid, &prod).into_iter().map(|t| t + &id).collect();
        let diff = next.iter().zip(&g).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        if !diff.is_finite() || diff > opts.trust_radius {
            return Err(Error::TrustRegion {
                norm: diff,
                radius: opts.trust_radius,
            });
        }
        g = next;
        last = diff;
        if diff <= opts.tol {
            let out = GMatrix {
                grid,
                residual: g_residual(grid, &g, &hx),
                g,
                iterations: iter + 1,
            };
            return Ok(out);
        }
    }
    Err(Error::Contraction {
        residual: last,
        iterations: opts.max_iter,
    })
}

/// ‖G − I − T₁(G·H_x∘A)‖∞.
fn g_residual(grid: CircleGrid, g: &[DMatrix<f64>], hx: &[DMatrix<f64>]) -> f64 {
    let q = g[0].nrows();
    let id = DMatrix::<f64>::identity(q, q);
    let prod: Vec<DMatrix<f64>> = g.iter().zip(hx).map(|(a, b)| a * b).collect();
    t1_matrix(grid, &prod)
        .iter()
        .zip(g)
        .map(|(t, gj)| (gj - &id - t).amax())
        .fold(0.0, f64::max)
}

/// ‖T₁G + G·H_x∘A − H_x∘A(1)‖∞.
pub fn g_identity_residual(disc: &AnalyticDisc, graph: &dyn BoundaryGraph, g: &GMatrix) -> f64 {
    let hx = hx_nodes(disc, graph);
    let t1g = t1_matrix(disc.grid(), &g.g);
    t1g.iter()
        .zip(&g.g)
        .zip(&hx)
        .map(|((t, gj), h)| (t + gj * h - &hx[0]).amax())
        .fold(0.0, f64::max)
}

/// Options for solves whose results are differenced.
pub fn tight_options(opts: &BishopOptions) -> BishopOptions {
    BishopOptions {
        tol: opts.tol.min(1e-14),
        max_iter: opts.max_iter.max(400),
        ..*opts
    }
}

fn x0_of(disc: &AnalyticDisc) -> Vec<f64> {
    disc.z().iter().map(|z| z.at_one().re).collect()
}

fn x_init(disc: &AnalyticDisc) -> Vec<Vec<f64>> {
    (0..disc.q()).map(|k| disc.x(k).real_values()).collect()
}

/// The disc A_t with the w-component of `disc`, attached to the deformed graph.
pub fn deformed_disc(
    disc: &AnalyticDisc,
    dg: &DeformedGraph,
    t: &[f64],
    opts: &BishopOptions,
) -> Result<AnalyticDisc> {
    solve_bishop(&dg.at(t), disc.w(), &x0_of(disc), opts, Some(&x_init(disc)))
}

/// D(t) = Π(−∂A_t/∂ζ(1)) in the coordinates y, i.e. (d/dθ)x_t at θ = 0.
pub fn d_value(disc: &AnalyticDisc) -> Vec<f64> {
    disc.z().iter().map(|z| z.d_theta_at_one().re).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalDerivative {
    pub d0: Vec<f64>,
    /// q × q, column j is ∂D/∂t_j(0) by central differences.
    pub d_prime: Vec<Vec<f64>>,
    /// J(G·χ·H_{t_j}∘A), column j.
    pub j_columns: Vec<Vec<f64>>,
    pub cross_check_error: f64,
    pub rank: RankDecision,
    /// max_j |J(G·χ·H_{t_j}∘A) − J(Ẏ_j)|.
    pub ydot_identity_error: f64,
    /// max_j |(d/dθ)Ẏ_j(0)|.
    pub ydot_derivative_at_one: f64,
    pub j_chi: f64,
    pub g_residual: f64,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub const T_STEP: f64 = 1e-5;

pub fn normal_derivative_map(
    disc: &AnalyticDisc,
    dg: &DeformedGraph,
    step: f64,
    opts: &BishopOptions,
) -> Result<NormalDerivative> {
    let q = disc.q();
    let grid = disc.grid();
    let tight = tight_options(opts);
    let zero = vec![0.0; q];
    let a0 = deformed_disc(disc, dg, &zero, &tight)?;
    let d0 = d_value(&a0);

    let g = solve_g_matrix(&a0, &dg.at(&zero), &tight)?;
    let mu_a: Vec<f64> = (0..grid.size()).map(|j| dg.mu(&a0.boundary_params(j))).collect();
    let chi = &dg.chi;

    let mut d_prime = DMatrix::zeros(q, q);
    let mut j_cols = DMatrix::zeros(q, q);
    let mut eq18: f64 = 0.0;
    let mut eq20: f64 = 0.0;
    for j in 0..q {
        let mut tp = zero.clone();
        let mut tm = zero.clone();
        tp[j] = step;
        tm[j] = -step;
        let ap = deformed_disc(&a0, dg, &tp, &tight)?;
        let am = deformed_disc(&a0, dg, &tm, &tight)?;
        let (dp, dm) = (d_value(&ap), d_value(&am));
        for i in 0..q {
            d_prime[(i, j)] = (dp[i] - dm[i]) / (2.0 * step);
            // i-th component of G·χ·e_j·μ(A)
            let vals: Vec<f64> = (0..grid.size())
                .map(|n| g.at(n)[(i, j)] * chi[n] * mu_a[n])
                .collect();
            let jg = j_functional(&CircleFunction::from_real(grid, &vals)?)?;
            j_cols[(i, j)] = jg;
            let ydot = ap.y(i).sub(&am.y(i)).scale(Complex64::new(0.5 / step, 0.0)).re();
            eq18 = eq18.max((jg - j_functional(&ydot)?).abs());
            eq20 = eq20.max(ydot.d_theta_at_one().norm());
        }
    }
    let cross = (&d_prime - &j_cols).amax();
    Ok(NormalDerivative {
        d0,
        d_prime: rows(&d_prime),
        j_columns: rows(&j_cols),
        cross_check_error: cross,
        rank: linalg::rank_decision(&d_prime, CROSS_CHECK_TOL, None),
        ydot_identity_error: eq18,
        ydot_derivative_at_one: eq20,
        j_chi: j_functional(dg.chi())?,
        g_residual: g.residual,
    })
}

/// Parameters (t, τ, a, p₀) of a family disc. Empty vectors mean zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyParams {
    pub t: Vec<f64>,
    pub tau: f64,
    /// a₂..a_p as `[re, im]`.
    pub a: Vec<[f64; 2]>,
    /// Coordinates of the base point on K: (u₁, u₂..u_p, v₂..v_p, x).
    pub p0: Vec<f64>,
}

impl FamilyParams {
    pub fn is_zero(&self) -> bool {
        self.t.iter().all(|&v| v == 0.0)
            && self.tau == 0.0
            && self.a.iter().all(|v| v[0] == 0.0 && v[1] == 0.0)
            && self.p0.iter().all(|&v| v == 0.0)
    }
}

/// The hypersurface K = {v₁ = k(u₁, u₂..u_p, v₂..v_p, x)} of M.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGraph {
    /// Polynomial in the variables (u, v, x) of M; must not involve v₁.
    pub k: RealPoly,
}

impl KGraph {
    pub fn flat(m: &GenericManifold) -> Self {
        KGraph {
            k: RealPoly::zero(m.dim()),
        }
    }

    pub fn validate(&self, m: &GenericManifold) -> Result<()> {
        if self.k.nvars != m.dim() {
            return Err(Error::Config(format!(
                "K-graph has {} variables, expected {}",
                self.k.nvars,
                m.dim()
            )));
        }
        if self.k.depends_on(m.p()) {
            return Err(Error::Config("K-graph must not depend on v1".into()));
        }
        if self.k.has_affine_part() {
            return Err(Error::Config("K-graph must vanish to second order at 0".into()));
        }
        Ok(())
    }

    /// Full (u, v, x) parameters of the point of K with coordinates `p0`.
    pub fn lift(&self, m: &GenericManifold, p0: &[f64]) -> Vec<f64> {
        let p = m.p();
        let mut full = vec![0.0; m.dim()];
        for (i, &v) in p0.iter().enumerate() {
            let slot = if i < p { i } else { i + 1 };
            full[slot] = v;
        }
        full[p] = self.k.eval(&full);
        full
    }
}

/// The disc A_{t,τ,a,p₀}.
pub fn build_family(
    disc: &AnalyticDisc,
    dg: &DeformedGraph,
    kgraph: &KGraph,
    params: &FamilyParams,
    opts: &BishopOptions,
) -> Result<AnalyticDisc> {
    let m = dg.base();
    let (p, q) = (m.p(), m.q());
    let check = |name: &str, len: usize, want: usize| {
        if len != 0 && len != want {
            return Err(Error::Config(format!(
                "family parameter {name} has length {len}, expected {want}"
            )));
        }
        Ok(())
    };
    check("t", params.t.len(), q)?;
    check("a", params.a.len(), p - 1)?;
    check("p0", params.p0.len(), m.dim() - 1)?;
    let grid = disc.grid();
    let lifted = if params.p0.is_empty() {
        vec![0.0; m.dim()]
    } else {
        kgraph.lift(m, &params.p0)
    };
    let rot = Complex64::from_polar(1.0, params.tau);
    let mut w = Vec::with_capacity(p);
    for l in 0..p {
        let shift = Complex64::new(lifted[l], lifted[p + l]);
        let mut f = disc.w()[l].clone();
        if l == 0 {
            f = f.scale(rot);
        } else if let Some(a) = params.a.get(l - 1) {
            let a = Complex64::new(a[0], a[1]);
            f = f.add(&CircleFunction::sample_zeta(grid, |z| a * (z - 1.0)));
        }
        if shift != Complex64::new(0.0, 0.0) {
            f = f.add(&CircleFunction::constant(grid, shift));
        }
        w.push(f);
    }
    let x0: Vec<f64> = x0_of(disc)
        .iter()
        .enumerate()
        .map(|(k, v)| v + lifted[2 * p + k])
        .collect();
    let t = if params.t.is_empty() {
        vec![0.0; q]
    } else {
        params.t.clone()
    };
    solve_bishop(&dg.at(&t), &w, &x0, opts, Some(&x_init(disc)))
}

/// min over boundary nodes of the first-order distance to N.
pub fn boundary_clearance(m: &GenericManifold, n: &Submanifold, disc: &AnalyticDisc) -> f64 {
    (0..disc.grid().size())
        .map(|j| n.distance(m, &disc.boundary_point(j)))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WedgeConfig {
    pub t_radius: f64,
    pub tau_radius: f64,
    pub a_radius: f64,
    pub p0_radius: f64,
    pub direction_samples: usize,
    pub disc_samples: usize,
    /// Points ζ = (1 − ρ)e^{iφ} of the arc Δ₁ near 1.
    pub zeta_radii: Vec<f64>,
    pub zeta_angles: Vec<f64>,
    pub seed: u64,
}

impl Default for WedgeConfig {
    fn default() -> Self {
        WedgeConfig {
            t_radius: 2e-3,
            tau_radius: 0.1,
            a_radius: 5e-3,
            p0_radius: 5e-3,
            direction_samples: 48,
            disc_samples: 100,
            zeta_radii: vec![0.05, 0.15],
            zeta_angles: vec![-0.3, 0.0, 0.3],
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubBox {
    /// τ < 0.
    Gamma2,
    /// τ > 0.
    Gamma2Prime,
}

impl SubBox {
    fn of(tau: f64) -> Option<Self> {
        if tau < 0.0 {
            Some(SubBox::Gamma2)
        } else if tau > 0.0 {
            Some(SubBox::Gamma2Prime)
        } else {
            None
        }
    }

    fn label(s: Option<Self>) -> &'static str {
        match s {
            Some(SubBox::Gamma2) => "gamma2",
            Some(SubBox::Gamma2Prime) => "gamma2-prime",
            None => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FamilyDisc {
    pub params: FamilyParams,
    pub disc: AnalyticDisc,
    /// p₀ ∈ N: the disc contributes to the unattainable set.
    pub base_in_n: bool,
    pub subbox: Option<SubBox>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WedgePoint {
    pub disc: usize,
    pub zeta: [f64; 2],
    pub z: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeFit {
    pub dimension: usize,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Largest η on the test ladder with v̂₀ ± η e_k inside the cone for all k.
    pub margin: f64,
    pub v0_inside: bool,
    /// The cones over the two sub-boxes meet only at the vertex; `None`
    /// when one of them has no directions.
    pub subcones_disjoint: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct WedgeSample {
    pub v0: Vec<f64>,
    /// Tangent vectors d/dθ A_{t,τ,a}(1) in the coordinates (u, v, x) of T₀M.
    pub directions: Vec<Vec<f64>>,
    pub direction_params: Vec<FamilyParams>,
    pub cone: Option<ConeFit>,
    pub discs: Vec<FamilyDisc>,
    pub points: Vec<WedgePoint>,
}

impl WedgeSample {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.directions.is_empty()
    }

    /// One row per point: parameters, ζ, coordinates, labels.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let Some(first) = self.discs.first() else {
            return "disc\n".into();
        };
        let q = first.disc.q();
        let p = first.disc.p();
        let n = p + q;
        let mut header = vec!["disc".to_string()];
        header.extend((1..=q).map(|j| format!("t{j}")));
        header.push("tau".into());
        for l in 2..=p {
            header.push(format!("a{l}_re"));
            header.push(format!("a{l}_im"));
        }
        header.extend((1..=2 * p + q - 1).map(|i| format!("p0_{i}")));
        header.extend(["zeta_re".into(), "zeta_im".into()]);
        for i in 1..=n {
            header.push(format!("Z{i}_re"));
            header.push(format!("Z{i}_im"));
        }
        header.extend(["base_in_n".into(), "subbox".into()]);
        out.push_str(&header.join(","));
        out.push('\n');
        for pt in &self.points {
            let d = &self.discs[pt.disc];
            let mut row = vec![pt.disc.to_string()];
            let pad = |v: &[f64], len: usize| -> Vec<String> {
                (0..len).map(|i| v.get(i).copied().unwrap_or(0.0).to_string()).collect()
            };
            row.extend(pad(&d.params.t, q));
            row.push(d.params.tau.to_string());
            for l in 0..p - 1 {
                let a = d.params.a.get(l).copied().unwrap_or([0.0, 0.0]);
                row.push(a[0].to_string());
                row.push(a[1].to_string());
            }
            row.extend(pad(&d.params.p0, 2 * p + q - 1));
            row.push(pt.zeta[0].to_string());
            row.push(pt.zeta[1].to_string());
            for z in &pt.z {
                row.push(z[0].to_string());
                row.push(z[1].to_string());
            }
            row.push(d.base_in_n.to_string());
            row.push(SubBox::label(d.subbox).into());
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

fn param_coords(p: usize, v: &[Complex64]) -> Vec<f64> {
    crate::bishop::params_from_point(p, v)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Is `target` a nonnegative combination of the columns `dirs`?
fn in_cone(dirs: &[Vec<f64>], target: &[f64]) -> bool {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = dirs.iter().map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for (k, &rhs) in target.iter().enumerate() {
        let expr: Vec<_> = vars.iter().zip(dirs).map(|(&v, d)| (v, d[k])).collect();
        lp.add_constraint(expr, ComparisonOp::Eq, rhs);
    }
    lp.solve().is_ok()
}

/// Do the cones over `a` and `b` share a direction other than the vertex?
fn cones_meet(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let va: Vec<_> = a.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let vb: Vec<_> = b.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    lp.add_constraint(va.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
    for k in 0..a[0].len() {
        let mut expr: Vec<_> = va.iter().zip(a).map(|(&v, d)| (v, d[k])).collect();
        expr.extend(vb.iter().zip(b).map(|(&v, d)| (v, -d[k])));
        lp.add_constraint(expr, ComparisonOp::Eq, 0.0);
    }
    lp.solve().is_ok()
}

const MARGIN_LADDER: [f64; 11] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6];

fn fit_cone(dirs: &[Vec<f64>], v0: &[f64], subboxes: &[Option<SubBox>]) -> ConeFit {
    let dim = v0.len();
    let mat = DMatrix::from_fn(dim, dirs.len(), |i, j| dirs[j][i]);
    let dec = linalg::rank_decision(&mat, CROSS_CHECK_TOL, None);
    let normalized: Vec<Vec<f64>> = dirs.iter().map(|d| unit(d)).collect();
    let v = unit(v0);
    let mut margin = 0.0;
    for &eta in &MARGIN_LADDER {
        let ok = (0..dim).all(|k| {
            [eta, -eta].iter().all(|&s| {
                let mut target = v.clone();
                target[k] += s;
                in_cone(&normalized, &target)
            })
        });
        if ok {
            margin = eta;
            break;
        }
    }
    let pick = |which: SubBox| -> Vec<Vec<f64>> {
        normalized
            .iter()
            .zip(subboxes)
            .filter(|(_, s)| **s == Some(which))
            .map(|(d, _)| d.clone())
            .collect()
    };
    let (g2, g2p) = (pick(SubBox::Gamma2), pick(SubBox::Gamma2Prime));
    let subcones_disjoint = if g2.is_empty() || g2p.is_empty() {
        None
    } else {
        Some(!cones_meet(&g2, &g2p))
    };
    ConeFit {
        dimension: dim,
        rank: dec.rank,
        singular_values: dec.singular_values,
        margin,
        v0_inside: margin >= CONE_MARGIN,
        subcones_disjoint,
    }
}

fn random_params(rng: &mut ChaCha8Rng, m: &GenericManifold, cfg: &WedgeConfig, with_p0: bool) -> FamilyParams {
    let mut u = |r: f64| if r > 0.0 { rng.gen_range(-r..=r) } else { 0.0 };
    FamilyParams {
        t: (0..m.q()).map(|_| u(cfg.t_radius)).collect(),
        tau: u(cfg.tau_radius),
        a: (1..m.p()).map(|_| [u(cfg.a_radius), u(cfg.a_radius)]).collect(),
        p0: if with_p0 {
            (0..m.dim() - 1).map(|_| u(cfg.p0_radius)).collect()
        } else {
            Vec::new()
        },
    }
}

/// Samples the directions and the point cloud swept by A_{t,τ,a,p₀}.
/// The first direction and the first disc use zero parameters.
pub fn sample_wedge(
    disc: &AnalyticDisc,
    dg: &DeformedGraph,
    kgraph: &KGraph,
    n: &Submanifold,
    cfg: &WedgeConfig,
    opts: &BishopOptions,
) -> Result<WedgeSample> {
    let m = dg.base();
    kgraph.validate(m)?;
    let p = m.p();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let v0 = param_coords(p, &disc.tangent_at_one());

    let mut directions = Vec::new();
    let mut direction_params = Vec::new();
    for i in 0..cfg.direction_samples {
        let params = if i == 0 {
            FamilyParams::default()
        } else {
            random_params(&mut rng, m, cfg, false)
        };
        let a = build_family(disc, dg, kgraph, &params, opts)?;
        directions.push(param_coords(p, &a.tangent_at_one()));
        direction_params.push(params);
    }
    let cone = if directions.is_empty() {
        None
    } else {
        let subboxes: Vec<_> = direction_params.iter().map(|d| SubBox::of(d.tau)).collect();
        let fit = fit_cone(&directions, &v0, &subboxes);
        if fit.rank < m.dim() {
            return Err(Error::ERank {
                rank: fit.rank,
                expected: m.dim(),
            });
        }
        Some(fit)
    };

    let mut discs = Vec::new();
    let mut points = Vec::new();
    for i in 0..cfg.disc_samples {
        let params = if i == 0 {
            FamilyParams::default()
        } else {
            random_params(&mut rng, m, cfg, true)
        };
        let a = build_family(disc, dg, kgraph, &params, opts)?;
        let base = a.base_point();
        let g = n.eval_point(m, &base);
        let base_in_n = crate::manifold::norm(&g) <= 1e-12;
        let idx = discs.len();
        for &rho in &cfg.zeta_radii {
            for &phi in &cfg.zeta_angles {
                let zeta = Complex64::from_polar(1.0 - rho, phi);
                let z = a.eval_interior(zeta)?;
                points.push(WedgePoint {
                    disc: idx,
                    zeta: [zeta.re, zeta.im],
                    z: z.iter().map(|c| [c.re, c.im]).collect(),
                });
            }
        }
        discs.push(FamilyDisc {
            subbox: SubBox::of(params.tau),
            params,
            disc: a,
            base_in_n,
        });
    }
    Ok(WedgeSample {
        v0,
        directions,
        direction_params,
        cone,
        discs,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bishop::seed_disc_w;

    fn seed(m: &GenericManifold, c: f64) -> AnalyticDisc {
        let grid = CircleGrid::default();
        let w = seed_disc_w(grid, &m.base_point()[..m.p()], c, None);
        solve_bishop(m, &w, &vec![0.0; m.q()], &BishopOptions::default(), None).unwrap()
    }

    /// h = x₁|w₁|².
    fn toy() -> GenericManifold {
        let h = RealPoly::monomial(3, 1.0, &[(2, 1), (0, 2)])
            .add(&RealPoly::monomial(3, 1.0, &[(2, 1), (1, 2)]));
        GenericManifold::new(1, 1, vec![h]).unwrap()
    }

    #[test]
    fn chi_is_normalized() {
        let chi = normalized_chi(CircleGrid::default(), PI / 4.0).unwrap();
        assert!((j_functional(&chi).unwrap() - 1.0).abs() < 1e-8);
        assert_eq!(chi.value(0).re, 0.0);
        assert_eq!(chi.value(10).re, 0.0);
    }

    #[test]
    fn zero_deformation_is_the_base_graph() {
        let m = GenericManifold::sphere_quadric(1, 1);
        let d = seed(&m, 0.05);
        let dg = DeformedGraph::new(&m, &d, DeformProfile::default()).unwrap();
        let mut a = [0.0];
        let mut b = [0.0];
        let params = [0.1, -0.04, 0.02];
        dg.at(&[0.0]).value(200, &params, &mut a);
        m.value(200, &params, &mut b);
        assert_eq!(a, b);
        assert_eq!(dg.mu(&d.boundary_params(256)), 1.0);
    }

    #[test]
    fn g_matrix_cases() {
        let opts = BishopOptions::default();
        for m in [GenericManifold::flat(1, 1), GenericManifold::sphere_quadric(1, 1)] {
            let d = seed(&m, 0.05);
            let g = solve_g_matrix(&d, &m, &opts).unwrap();
            assert!((0..512).all(|j| *g.at(j) == DMatrix::identity(1, 1)));
        }
        let m = toy();
        let d = seed(&m, 0.05);
        let g = solve_g_matrix(&d, &m, &tight_options(&opts)).unwrap();
        assert!(g.residual < 1e-10);
        assert!((g.at(128)[(0, 0)] - 1.0).abs() > 1e-3);
        assert_eq!(*g.at(0), DMatrix::identity(1, 1));
        assert!(g_identity_residual(&d, &m, &g) < 1e-9);
    }

    #[test]
    fn rank_on_quadrics() {
        let opts = BishopOptions::default();
        for (p, q) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let m = GenericManifold::sphere_quadric(p, q);
            let d = seed(&m, 0.05);
            let dg = DeformedGraph::new(&m, &d, DeformProfile::default()).unwrap();
            let nd = normal_derivative_map(&d, &dg, T_STEP, &opts).unwrap();
            assert_eq!(nd.rank.rank, q, "{nd:?}");
            assert!(nd.cross_check_error < 1e-6, "{}", nd.cross_check_error);
            assert!(nd.ydot_identity_error < 1e-6);
            assert!(nd.ydot_derivative_at_one < 1e-6);
            assert!((nd.j_chi - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn cross_check_with_nontrivial_g() {
        let m = toy();
        let d = seed(&m, 0.05);
        let dg = DeformedGraph::new(&m, &d, DeformProfile::default()).unwrap();
        let nd = normal_derivative_map(&d, &dg, T_STEP, &BishopOptions::default()).unwrap();
        assert!(nd.cross_check_error < 1e-6, "{nd:?}");
        assert!(nd.ydot_identity_error < 1e-6, "{nd:?}");
    }

    #[test]
    fn family_identity_and_first_order() {
        let m = GenericManifold::sphere_quadric(2, 1);
        let d = seed(&m, 0.05);
        let opts = BishopOptions::default();
        let dg = DeformedGraph::new(&m, &d, DeformProfile::default()).unwrap();
        let k = KGraph::flat(&m);
        let same = build_family(&d, &dg, &k, &FamilyParams::default(), &opts).unwrap();
        assert!(same.c1_distance(&d) <= 1e-12);

        // ‖A_τ − A‖ is linear in τ
        let dist = |tau: f64| {
            let params = FamilyParams { tau, ..Default::default() };
            build_family(&d, &dg, &k, &params, &opts).unwrap().c1_distance(&d)
        };
        let (d1, d2) = (dist(1e-3), dist(2e-3));
        assert!((d2 / d1 - 2.0).abs() < 1e-2, "{d1} {d2}");
        let rotated = build_family(&d, &dg, &k, &FamilyParams { tau: 1e-3, ..Default::default() }, &opts).unwrap();
        assert!(rotated.attachment_residual(&m) < 1e-9);

        // base point off N keeps the whole boundary off N
        let n = Submanifold::coordinate(&m, &[2, 3]).unwrap();
        let params = FamilyParams {
            p0: vec![0.0, 0.0, 2e-3, 0.0],
            ..Default::default()
        };
        let a = build_family(&d, &dg, &k, &params, &opts).unwrap();
        assert!(boundary_clearance(&m, &n, &a) > 1e-3);
        assert_eq!(a.base_point()[1].im, 2e-3);
    }

    #[test]
    fn wedge_on_quadric() {
        let m = GenericManifold::sphere_quadric(1, 1);
        let d = seed(&m, 0.05);
        let dg = DeformedGraph::new(&m, &d, DeformProfile::default()).unwrap();
        let n = Submanifold::coordinate(&m, &[0, 1]).unwrap();
        let cfg = WedgeConfig {
            disc_samples: 10,
            ..Default::default()
        };
        let w = sample_wedge(&d, &dg, &KGraph::flat(&m), &n, &cfg, &BishopOptions::default()).unwrap();
        let cone = w.cone.as_ref().unwrap();
        assert_eq!(cone.rank, 3);
        assert!(cone.v0_inside, "{cone:?}");
        assert_eq!(cone.subcones_disjoint, Some(true));
        assert_eq!(w.points.len(), 60);
        assert!(w.discs[0].base_in_n);
        assert!(w.discs[1..].iter().all(|d| !d.base_in_n));
        let csv = w.to_csv();
        assert_eq!(csv.lines().count(), 61);
        assert!(csv.starts_with("disc,t1,tau,p0_1,p0_2,zeta_re"));
    }

    #[test]
    fn flat_directions_are_degenerate() {
        let m = GenericManifold::flat(1, 1);
        let d = seed(&m, 0.05);
        let dg = DeformedGraph::new(&m, &d, DeformProfile::default()).unwrap();
        let n = Submanifold::coordinate(&m, &[0, 1]).unwrap();
        let cfg = WedgeConfig {
            t_radius: 0.0,
            disc_samples: 0,
            ..Default::default()
        };
        let err = sample_wedge(&d, &dg, &KGraph::flat(&m), &n, &cfg, &BishopOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ERank { rank: 2, expected: 3 }));

        let empty = WedgeConfig {
            direction_samples: 0,
            disc_samples: 0,
            ..Default::default()
        };
        let w = sample_wedge(&d, &dg, &KGraph::flat(&m), &n, &empty, &BishopOptions::default()).unwrap();
        assert!(w.is_empty());
    }
}
