//! Graphed generic manifolds M = {y = h(w, x)} ⊂ C^n and submanifolds of M.
//!
//! Coordinates on C^n are Z = (w₁, …, w_p, z₁, …, z_q) with w = u + iv and
//! z = x + iy. Points of M are parameterized by P = (u, v, x) ∈ R^{2p+q}.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, realify};
use crate::poly::RealPoly;

pub const MAX_DEGREE: u32 = 4;
/// Subspace comparisons treat singular values below this as zero.
pub const SUBSPACE_TOL: f64 = 1e-8;
pub const ON_MANIFOLD_TOL: f64 = 1e-8;

/// File representation of a manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldDef {
    pub p: usize,
    pub q: usize,
    /// One polynomial per normal coordinate, in the variables (u, v, x).
    pub h: Vec<RealPoly>,
    /// Base point as `[re, im]` pairs; the origin when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug)]
pub struct GenericManifold {
    p: usize,
    q: usize,
    h: Vec<RealPoly>,
    /// dh[j][i] = ∂h_j/∂P_i
    dh: Vec<Vec<RealPoly>>,
    base_point: Vec<Complex64>,
}

impl GenericManifold {
    pub fn new(p: usize, q: usize, h: Vec<RealPoly>) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config(
                "CR dimension p must be at least 1 (totally real manifolds are not supported)"
                    .into(),
            ));
        }
        if q == 0 {
            return Err(Error::Config("codimension q must be at least 1".into()));
        }
        if h.len() != q {
            return Err(Error::Config(format!(
                "h has {} components, expected q = {q}",
                h.len()
            )));
        }
        let nvars = 2 * p + q;
        for (j, hj) in h.iter().enumerate() {
            if hj.nvars != nvars {
                return Err(Error::Config(format!(
                    "h[{j}] has {} variables, expected 2p + q = {nvars}",
                    hj.nvars
                )));
            }
            hj.validate()?;
            if hj.degree() > MAX_DEGREE {
                return Err(Error::Config(format!(
                    "h[{j}] has degree {}, the maximum is {MAX_DEGREE}",
                    hj.degree()
                )));
            }
            if hj.has_affine_part() {
                return Err(Error::Config(format!(
                    "h[{j}] must satisfy h(0) = 0 and dh(0) = 0 (no constant or linear terms)"
                )));
            }
        }
        let dh = h
            .iter()
            .map(|hj| (0..nvars).map(|i| hj.derivative(i)).collect())
            .collect();
        Ok(GenericManifold {
            p,
            q,
            h,
            dh,
            base_point: vec![Complex64::new(0.0, 0.0); p + q],
        })
    }

    /// M = C^p × R^q.
    pub fn flat(p: usize, q: usize) -> Self {
        Self::new(p, q, vec![RealPoly::zero(2 * p + q); q]).expect("flat manifold is valid")
    }

    /// h_j = Σ_l |w_l|² in every component, the strictly pseudoconvex quadric
    /// when q = 1.
    pub fn sphere_quadric(p: usize, q: usize) -> Self {
        let nv = 2 * p + q;
        let mut hj = RealPoly::zero(nv);
        for l in 0..p {
            hj = hj
                .add(&RealPoly::monomial(nv, 1.0, &[(l, 2)]))
                .add(&RealPoly::monomial(nv, 1.0, &[(p + l, 2)]));
        }
        Self::new(p, q, vec![hj; q]).expect("quadric is valid")
    }

    pub fn from_def(def: &ManifoldDef) -> Result<Self> {
        let m = Self::new(def.p, def.q, def.h.clone())?;
        match &def.base_point {
            None => Ok(m),
            Some(bp) => m.with_base_point(bp.iter().map(|c| Complex64::new(c[0], c[1])).collect()),
        }
    }

    pub fn to_def(&self) -> ManifoldDef {
        let zero = self.base_point.iter().all(|z| z.norm() == 0.0);
        ManifoldDef {
            p: self.p,
            q: self.q,
            h: self.h.clone(),
            base_point: (!zero).then(|| self.base_point.iter().map(|z| [z.re, z.im]).collect()),
        }
    }

    pub fn with_base_point(mut self, z0: Vec<Complex64>) -> Result<Self> {
        if z0.len() != self.n() {
            return Err(Error::Config(format!(
                "base point has {} coordinates, expected n = {}",
                z0.len(),
                self.n()
            )));
        }
        let residual = norm(&self.eval_r(&z0));
        if residual > ON_MANIFOLD_TOL {
            return Err(Error::OffManifold { residual });
        }
        self.base_point = z0;
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    /// Real dimension 2p + q of M.
    pub fn dim(&self) -> usize {
        2 * self.p + self.q
    }

    pub fn h(&self) -> &[RealPoly] {
        &self.h
    }

    pub fn base_point(&self) -> &[Complex64] {
        &self.base_point
    }

    pub fn depends_on_x(&self) -> bool {
        self.h
            .iter()
            .any(|hj| (0..self.q).any(|k| hj.depends_on(2 * self.p + k)))
    }

    /// (u, v, x) of a point of C^n.
    pub fn params_of(&self, z: &[Complex64]) -> Vec<f64> {
        let p = self.p;
        let mut out = vec![0.0; self.dim()];
        for l in 0..p {
            out[l] = z[l].re;
            out[p + l] = z[l].im;
        }
        for k in 0..self.q {
            out[2 * p + k] = z[p + k].re;
        }
        out
    }

    /// The point of M over the parameters (u, v, x).
    pub fn point_of(&self, params: &[f64]) -> Vec<Complex64> {
        let p = self.p;
        let mut z: Vec<Complex64> = (0..p)
            .map(|l| Complex64::new(params[l], params[p + l]))
            .collect();
        for (k, hk) in self.h.iter().enumerate() {
            z.push(Complex64::new(params[2 * p + k], hk.eval(params)));
        }
        z
    }

    pub fn h_at(&self, params: &[f64]) -> Vec<f64> {
        self.h.iter().map(|hj| hj.eval(params)).collect()
    }

    /// ∂h_j/∂P_i as a q × (2p+q) matrix.
    pub fn dh_at(&self, params: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.q, self.dim(), |j, i| self.dh[j][i].eval(params))
    }

    /// ∂h_j/∂x_k as a q × q matrix.
    pub fn h_x_at(&self, params: &[f64]) -> DMatrix<f64> {
        let off = 2 * self.p;
        DMatrix::from_fn(self.q, self.q, |j, k| self.dh[j][off + k].eval(params))
    }

    /// r(Z) = y − h(u, v, x).
    pub fn eval_r(&self, z: &[Complex64]) -> Vec<f64> {
        let params = self.params_of(z);
        (0..self.q)
            .map(|j| z[self.p + j].im - self.h[j].eval(&params))
            .collect()
    }

    /// Holomorphic gradient of r, a q × n complex matrix, with the convention
    /// dr(Â) = 2 Re(r_z Â):
    /// ∂r_j/∂w_l = ½(−h_{j,u_l} + i h_{j,v_l}),
    /// ∂r_j/∂z_k = −½ h_{j,x_k} − (i/2) δ_{jk}.
    pub fn r_z(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let params = self.params_of(z);
        self.r_z_params(&params)
    }

    pub fn r_z_params(&self, params: &[f64]) -> DMatrix<Complex64> {
        let (p, q) = (self.p, self.q);
        let dh = self.dh_at(params);
        DMatrix::from_fn(q, p + q, |j, c| {
            if c < p {
                Complex64::new(-0.5 * dh[(j, c)], 0.5 * dh[(j, p + c)])
            } else {
                let k = c - p;
                let delta = if j == k { 0.5 } else { 0.0 };
                Complex64::new(-0.5 * dh[(j, 2 * p + k)], -delta)
            }
        })
    }

    pub fn defining_data(&self) -> Result<DefiningData> {
        DefiningData::at(self, &self.base_point)
    }

    /// Real tangent space of M at z as the image of the parameter
    /// differential, a 2n × (2p+q) matrix.
    pub fn tangent_map(&self, z: &[Complex64]) -> DMatrix<f64> {
        let (p, q) = (self.p, self.q);
        let params = self.params_of(z);
        let dh = self.dh_at(&params);
        let mut t = DMatrix::zeros(2 * self.n(), self.dim());
        for i in 0..self.dim() {
            if i < p {
                t[(2 * i, i)] = 1.0;
            } else if i < 2 * p {
                t[(2 * (i - p) + 1, i)] = 1.0;
            } else {
                t[(2 * (p + i - 2 * p), i)] = 1.0;
            }
            for j in 0..q {
                t[(2 * (p + j) + 1, i)] += dh[(j, i)];
            }
        }
        t
    }

    /// The complex tangent space T^c_zM as real vectors V_l, iV_l where
    /// V_l = e_{w_l} − D_z r_z e_{w_l}.
    pub fn complex_tangent_basis(&self, z: &[Complex64]) -> Result<DMatrix<f64>> {
        let dd = DefiningData::at(self, z)?;
        let n = self.n();
        let mut cols = Vec::with_capacity(2 * self.p);
        for l in 0..self.p {
            let mut e = DVector::<Complex64>::zeros(n);
            e[l] = Complex64::new(1.0, 0.0);
            let v = &e - &dd.d * (&dd.r_z * &e);
            let v: Vec<Complex64> = v.iter().copied().collect();
            let iv: Vec<Complex64> = v.iter().map(|c| c * Complex64::i()).collect();
            cols.push(linalg::to_real(&v));
            cols.push(linalg::to_real(&iv));
        }
        Ok(DMatrix::from_columns(&cols))
    }

    /// ‖r(z)‖, error when larger than the on-manifold tolerance.
    pub fn check_on(&self, z: &[Complex64]) -> Result<()> {
        let residual = norm(&self.eval_r(z));
        if residual > ON_MANIFOLD_TOL {
            return Err(Error::OffManifold { residual });
        }
        Ok(())
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// r_z at a point together with its right inverse D.
#[derive(Clone, Debug)]
pub struct DefiningData {
    pub r_z: DMatrix<Complex64>,
    /// n × q with r_z·D = I.
    pub d: DMatrix<Complex64>,
}

impl DefiningData {
    pub fn at(m: &GenericManifold, z: &[Complex64]) -> Result<Self> {
        let r_z = m.r_z(z);
        let rank = linalg::numerical_rank(&realify(&r_z), 1e-12) / 2;
        if rank != m.q() {
            return Err(Error::NotGeneric {
                rank,
                expected: m.q(),
            });
        }
        let rh = r_z.adjoint();
        let gram = &r_z * &rh;
        let inv = gram.try_inverse().ok_or(Error::NotGeneric {
            rank: 0,
            expected: m.q(),
        })?;
        let d = rh * inv;
        Ok(DefiningData { r_z, d })
    }

    /// ‖r_z D − I‖_max.
    pub fn identity_residual(&self) -> f64 {
        let prod = &self.r_z * &self.d;
        let q = prod.nrows();
        let mut e: f64 = 0.0;
        for i in 0..q {
            for j in 0..q {
                let id = if i == j { 1.0 } else { 0.0 };
                e = e.max((prod[(i, j)] - id).norm());
            }
        }
        e
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmanifoldDef {
    /// Extra equations g = 0 in the parameters (u, v, x) of M.
    pub equations: Vec<RealPoly>,
}

/// N = {g = 0} ∩ M for polynomial g in the parameters of M.
#[derive(Clone, Debug)]
pub struct Submanifold {
    equations: Vec<RealPoly>,
    grads: Vec<Vec<RealPoly>>,
}

impl Submanifold {
    pub fn new(m: &GenericManifold, equations: Vec<RealPoly>) -> Result<Self> {
        let codim = equations.len();
        if !(1..=3).contains(&codim) {
            return Err(Error::Config(format!(
                "submanifold codimension in M must be 1, 2 or 3, got {codim}"
            )));
        }
        for g in &equations {
            if g.nvars != m.dim() {
                return Err(Error::Config(format!(
                    "submanifold equation has {} variables, expected {}",
                    g.nvars,
                    m.dim()
                )));
            }
            g.validate()?;
        }
        let grads = equations
            .iter()
            .map(|g| (0..m.dim()).map(|i| g.derivative(i)).collect())
            .collect();
        let s = Submanifold { equations, grads };
        let p0 = m.params_of(m.base_point());
        if norm(&s.eval_params(&p0)) <= 1e-12 {
            let rank = linalg::numerical_rank(&s.gradient(&p0), SUBSPACE_TOL);
            if rank != codim {
                return Err(Error::Geometry(format!(
                    "submanifold gradients are dependent at the base point (rank {rank} < {codim})"
                )));
            }
        }
        Ok(s)
    }

    pub fn from_def(m: &GenericManifold, def: &SubmanifoldDef) -> Result<Self> {
        Self::new(m, def.equations.clone())
    }

    /// {P_i = 0 for i in `vars`}, the coordinate submanifold.
    pub fn coordinate(m: &GenericManifold, vars: &[usize]) -> Result<Self> {
        Self::new(m, vars.iter().map(|&i| RealPoly::var(m.dim(), i)).collect())
    }

    pub fn codim(&self) -> usize {
        self.equations.len()
    }

    pub fn equations(&self) -> &[RealPoly] {
        &self.equations
    }

    pub fn eval_params(&self, params: &[f64]) -> Vec<f64> {
        self.equations.iter().map(|g| g.eval(params)).collect()
    }

    pub fn eval_point(&self, m: &GenericManifold, z: &[Complex64]) -> Vec<f64> {
        self.eval_params(&m.params_of(z))
    }

    /// codim × (2p+q) matrix of gradients.
    pub fn gradient(&self, params: &[f64]) -> DMatrix<f64> {
        let nv = params.len();
        DMatrix::from_fn(self.codim(), nv, |r, c| self.grads[r][c].eval(params))
    }

    /// First-order distance |J⁺ g| from the point to N, in parameter space.
    pub fn distance(&self, m: &GenericManifold, z: &[Complex64]) -> f64 {
        let params = m.params_of(z);
        let g = DVector::from_vec(self.eval_params(&params));
        if g.norm() == 0.0 {
            return 0.0;
        }
        let jac = self.gradient(&params);
        match jac.clone().pseudo_inverse(1e-12) {
            Ok(pinv) if pinv.iter().all(|v| v.is_finite()) => {
                let d = (pinv * &g).norm();
                if d.is_finite() && d > 0.0 {
                    d
                } else {
                    g.norm()
                }
            }
            _ => g.norm(),
        }
    }

    /// Real tangent space of N at z, as an orthonormal 2n × dim basis.
    pub fn tangent_basis(&self, m: &GenericManifold, z: &[Complex64]) -> DMatrix<f64> {
        let params = m.params_of(z);
        let ker = linalg::null_space(&self.gradient(&params), SUBSPACE_TOL, None);
        let t = m.tangent_map(z) * ker;
        linalg::column_basis(&t, SUBSPACE_TOL)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TangencyReport {
    pub contains_tc: bool,
    /// sin of the largest principal angle between T^c_zM and T_zN.
    pub gap: f64,
    /// A vector of T^c_zM outside T_zN (interleaved real coordinates).
    pub witness: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

/// Decides whether T_zN ⊃ T^c_zM.
pub fn tangency_check(
    n: &Submanifold,
    m: &GenericManifold,
    z: &[Complex64],
) -> Result<TangencyReport> {
    m.check_on(z)?;
    let residual = norm(&n.eval_point(m, z));
    if residual > ON_MANIFOLD_TOL {
        return Err(Error::OffManifold { residual });
    }
    let tn = n.tangent_basis(m, z);
    let tc = m.complex_tangent_basis(z)?;
    let gap = linalg::containment_gap(&tn, &tc);
    let mut warnings = Vec::new();
    if gap > SUBSPACE_TOL / 10.0 && gap < SUBSPACE_TOL * 10.0 {
        let msg = format!("degenerate geometry: tangency gap {gap:.3e} is at the decision threshold");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let contains_tc = gap < SUBSPACE_TOL;
    let witness = if contains_tc {
        None
    } else {
        let mut best = (0.0, 0);
        for j in 0..tc.ncols() {
            let v = tc.column(j).into_owned();
            let r = linalg::projection_residual(&tn, &v);
            if r > best.0 + 1e-12 {
                best = (r, j);
            }
        }
        let v = tc.column(best.1).into_owned();
        Some((&v / v.norm()).iter().copied().collect())
    };
    Ok(TangencyReport {
        contains_tc,
        gap,
        witness,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_r_examples() {
        let flat = GenericManifold::flat(1, 1);
        assert_eq!(flat.eval_r(&[c(0.3, -0.2), c(1.5, 0.0)]), vec![0.0]);
        let quad = GenericManifold::sphere_quadric(1, 1);
        assert_eq!(quad.eval_r(&[c(1.0, 0.0), c(0.0, 1.0)]), vec![0.0]);
        assert_eq!(quad.eval_r(&[c(1.0, 0.0), c(0.0, 0.0)]), vec![-1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(GenericManifold::new(0, 1, vec![RealPoly::zero(1)]), Err(Error::Config(_))));
        let linear = RealPoly::var(3, 0);
        assert!(matches!(GenericManifold::new(1, 1, vec![linear]), Err(Error::Config(_))));
        let quintic = RealPoly::monomial(3, 1.0, &[(0, 5)]);
        assert!(matches!(GenericManifold::new(1, 1, vec![quintic]), Err(Error::Config(_))));
    }

    #[test]
    fn points_of_m_satisfy_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_manifold(&mut rng, 2, 2);
        for _ in 0..50 {
            let params: Vec<f64> = (0..m.dim()).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let z = m.point_of(&params);
            assert!(norm(&m.eval_r(&z)) < 1e-15);
            assert_eq!(m.params_of(&z), params);
        }
    }

    /// dr(Â) = 2 Re(r_z Â), checked by central differences.
    #[test]
    fn r_z_convention_matches_differential() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_manifold(&mut rng, 2, 2);
        let z: Vec<Complex64> = (0..m.n()).map(|_| c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))).collect();
        let a: Vec<Complex64> = (0..m.n()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let eps = 1e-6;
        let plus: Vec<Complex64> = z.iter().zip(&a).map(|(z, a)| z + a * eps).collect();
        let minus: Vec<Complex64> = z.iter().zip(&a).map(|(z, a)| z - a * eps).collect();
        let rp = m.eval_r(&plus);
        let rm = m.eval_r(&minus);
        let rz = m.r_z(&z);
        for j in 0..m.q() {
            let fd = (rp[j] - rm[j]) / (2.0 * eps);
            let an: Complex64 = (0..m.n()).map(|i| rz[(j, i)] * a[i]).sum();
            assert!((fd - 2.0 * an.re).abs() < 1e-8, "{fd} vs {}", 2.0 * an.re);
        }
    }

    #[test]
    fn defining_data() {
        let flat = GenericManifold::flat(1, 1).defining_data().unwrap();
        assert!(flat.identity_residual() < 1e-12);
        assert!((flat.d[(1, 0)] - c(0.0, 2.0)).norm() < 1e-15);

        let quad = GenericManifold::sphere_quadric(1, 1).defining_data().unwrap();
        assert!(quad.identity_residual() < 1e-12);
        // SVD oracle: D is the minimum-norm right inverse, so it lies in the
        // row space of r_z and has norm 1/σ_min
        let s = quad.r_z.clone().svd(false, false).singular_values;
        assert!((quad.d.norm() - 1.0 / s[0]).abs() < 1e-14);
        let again = GenericManifold::sphere_quadric(1, 1).defining_data().unwrap();
        assert_eq!(quad.d, again.d);
    }

    #[test]
    fn tangency_examples() {
        let m = GenericManifold::sphere_quadric(2, 1);
        let z0 = m.base_point().to_vec();
        // N = {v1 = v2 = 0}
        let n = Submanifold::coordinate(&m, &[2, 3]).unwrap();
        let r = tangency_check(&n, &m, &z0).unwrap();
        assert!(!r.contains_tc);
        let w = r.witness.unwrap();
        assert!((w[1].abs() - 1.0).abs() < 1e-12, "witness {w:?} is not along Im w1");

        let flat = GenericManifold::flat(2, 2);
        let n = Submanifold::coordinate(&flat, &[4, 5]).unwrap();
        assert!(tangency_check(&n, &flat, &z0_of(&flat)).unwrap().contains_tc);

        let off = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let n = Submanifold::coordinate(&m, &[2, 3]).unwrap();
        assert!(matches!(tangency_check(&n, &m, &off), Err(Error::OffManifold { .. })));
    }

    #[test]
    fn full_manifold_contains_tc() {
        // N = M has codimension 0 and is not a Submanifold; check the same
        // inclusion against T_M directly.
        let m = GenericManifold::sphere_quadric(1, 1);
        let z0 = m.base_point().to_vec();
        let tm = linalg::column_basis(&m.tangent_map(&z0), 1e-12);
        let tc = m.complex_tangent_basis(&z0).unwrap();
        assert!(linalg::containment_gap(&tm, &tc) < 1e-12);
    }

    fn z0_of(m: &GenericManifold) -> Vec<Complex64> {
        m.base_point().to_vec()
    }

    fn random_poly(rng: &mut ChaCha8Rng, nv: usize, min_deg: u32) -> RealPoly {
        let mut p = RealPoly::zero(nv);
        for _ in 0..4 {
            let deg = rng.gen_range(min_deg..=3);
            let mut factors = Vec::new();
            for _ in 0..deg {
                factors.push((rng.gen_range(0..nv), 1));
            }
            p = p.add(&RealPoly::monomial(nv, rng.gen_range(-1.0..1.0), &factors));
        }
        p
    }

    fn random_manifold(rng: &mut ChaCha8Rng, p: usize, q: usize) -> GenericManifold {
        let nv = 2 * p + q;
        let h = (0..q).map(|_| random_poly(rng, nv, 2)).collect();
        GenericManifold::new(p, q, h).unwrap()
    }

    /// Independent oracle: T^c as the kernel of the real map of r_z, T_N as
    /// explicit images, and inclusion as a rank comparison.
    fn oracle_contains(n: &Submanifold, m: &GenericManifold, z: &[Complex64]) -> bool {
        let tc = linalg::null_space(&realify(&m.r_z(z)), 1e-12, None);
        let ker = linalg::null_space(&n.gradient(&m.params_of(z)), 1e-12, None);
        let tn = m.tangent_map(z) * ker;
        let rank_n = linalg::numerical_rank(&tn, 1e-9);
        let both = DMatrix::from_columns(
            &tn.column_iter()
                .chain(tc.column_iter())
                .map(|c| c.into_owned())
                .collect::<Vec<_>>(),
        );
        linalg::numerical_rank(&both, 1e-9) == rank_n
    }

    #[test]
    fn tangency_agrees_with_oracle_on_random_geometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut seen = [0usize; 2];
        for case in 0..100 {
            let p = rng.gen_range(1..=3);
            let q = rng.gen_range(1..=3);
            let m = random_manifold(&mut rng, p, q);
            let codim = rng.gen_range(1..=3usize);
            let (params, eqs) = if case % 2 == 0 {
                // x-only equations through the origin contain T^c_0 M
                let params = vec![0.0; m.dim()];
                let eqs: Vec<RealPoly> = (0..codim.min(q))
                    .map(|k| RealPoly::var(m.dim(), 2 * p + k).add(&random_x_poly(&mut rng, &m)))
                    .collect();
                (params, eqs)
            } else {
                let params: Vec<f64> = (0..m.dim()).map(|_| rng.gen_range(-0.3..0.3)).collect();
                let eqs = (0..codim)
                    .map(|_| {
                        let mut g = random_poly(&mut rng, m.dim(), 1);
                        let c0 = g.eval(&params);
                        g = g.add(&RealPoly::monomial(m.dim(), -c0, &[]));
                        g
                    })
                    .collect();
                (params, eqs)
            };
            let z = m.point_of(&params);
            let Ok(n) = Submanifold::new(&m, eqs) else { continue };
            if linalg::numerical_rank(&n.gradient(&params), 1e-6) != n.codim() {
                continue;
            }
            let r = tangency_check(&n, &m, &z).unwrap();
            assert_eq!(r.contains_tc, oracle_contains(&n, &m, &z), "case {case}");
            seen[r.contains_tc as usize] += 1;
        }
        assert!(seen[0] > 10 && seen[1] > 10, "{seen:?}");
    }

    fn random_x_poly(rng: &mut ChaCha8Rng, m: &GenericManifold) -> RealPoly {
        let nv = m.dim();
        let k = rng.gen_range(0..m.q());
        RealPoly::monomial(nv, rng.gen_range(-1.0..1.0), &[(2 * m.p() + k, 2)])
    }
}
