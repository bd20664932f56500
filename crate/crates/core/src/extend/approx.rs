//! The Gaussian approximation operator
//! G_τ f(ẑ) = (τ/π)^{n/2} ∫_L exp(−τ Σ(z_k − ẑ_k)²) f(z) dz₁∧…∧dz_n
//! over a maximally real patch L, by tensor Gauss–Legendre quadrature.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Richardson disagreement above this is a quadrature failure.
pub const RICHARDSON_TOL: f64 = 1e-6;

/// z_k = c_k + s_k + i·κ·s_k² for s ∈ Π[−w_k, w_k]; κ = 0 gives a box in Rⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Patch {
    pub center: Vec<[f64; 2]>,
    pub half_width: Vec<f64>,
    #[serde(default)]
    pub curvature: f64,
}

impl Patch {
    pub fn real_box(n: usize, half_width: f64) -> Self {
        Patch {
            center: vec![[0.0, 0.0]; n],
            half_width: vec![half_width; n],
            curvature: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_width.len() != self.center.len() || self.center.is_empty() {
            return Err(Error::Config("patch center and half-width lengths differ".into()));
        }
        if self.half_width.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Config("patch half-widths must be positive".into()));
        }
        Ok(())
    }

    pub fn point(&self, s: &[f64]) -> Vec<Complex64> {
        s.iter()
            .zip(&self.center)
            .map(|(&t, c)| Complex64::new(c[0] + t, c[1] + self.curvature * t * t))
            .collect()
    }

    /// det ∂z/∂s; the map is diagonal.
    pub fn jacobian_det(&self, s: &[f64]) -> Complex64 {
        s.iter()
            .map(|&t| Complex64::new(1.0, 2.0 * self.curvature * t))
            .product()
    }

    /// Shifted copy; the translated patches L_h.
    pub fn translated(&self, shift: &[[f64; 2]]) -> Self {
        let mut out = self.clone();
        for (c, d) in out.center.iter_mut().zip(shift) {
            c[0] += d[0];
            c[1] += d[1];
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaussOptions {
    pub order: usize,
    /// Panels per coordinate; `None` picks about one per 8/√τ of width.
    pub panels: Option<usize>,
}

impl Default for GaussOptions {
    fn default() -> Self {
        GaussOptions {
            order: 64,
            panels: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussValue {
    pub value: Complex64,
    pub refined: Complex64,
    pub difference: f64,
    pub panels: usize,
}

fn integrate(
    f: &dyn Fn(&[Complex64]) -> Complex64,
    patch: &Patch,
    zhat: &[Complex64],
    tau: f64,
    rule: &GaussLegendre,
    panels: usize,
) -> Complex64 {
    let n = patch.dim();
    // 1-D nodes and weights per coordinate
    let axes: Vec<Vec<(f64, f64)>> = patch
        .half_width
        .iter()
        .map(|&w| {
            let h = 2.0 * w / panels as f64;
            (0..panels)
                .flat_map(|p| {
                    let mid = -w + (p as f64 + 0.5) * h;
                    rule.as_node_weight_pairs()
                        .iter()
                        .map(move |&(x, wt)| (mid + 0.5 * h * x, 0.5 * h * wt))
                })
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; n];
    let mut s = vec![0.0; n];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let mut wt = 1.0;
        for k in 0..n {
            let (x, w) = axes[k][idx[k]];
            s[k] = x;
            wt *= w;
        }
        let z = patch.point(&s);
        let q: Complex64 = z.iter().zip(zhat).map(|(a, b)| (a - b) * (a - b)).sum();
        total += wt * (-tau * q).exp() * f(&z) * patch.jacobian_det(&s);
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == n {
                return total * (tau / std::f64::consts::PI).powf(n as f64 / 2.0);
            }
        }
    }
}

/// G_τ f(ẑ), checked against the same rule on twice as many panels.
pub fn gauss_approx(
    f: &dyn Fn(&[Complex64]) -> Complex64,
    patch: &Patch,
    zhat: &[Complex64],
    tau: f64,
    opts: &GaussOptions,
) -> Result<GaussValue> {
    patch.validate()?;
    if zhat.len() != patch.dim() {
        return Err(Error::Config(format!(
            "point has {} coordinates, patch has dimension {}",
            zhat.len(),
            patch.dim()
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::Config(format!("τ must be positive, got {tau}")));
    }
    let order = NonZeroUsize::new(opts.order)
        .ok_or_else(|| Error::Config("quadrature order must be positive".into()))?;
    let rule = GaussLegendre::new(order);
    let widest = patch.half_width.iter().copied().fold(0.0, f64::max);
    let panels = opts
        .panels
        .unwrap_or_else(|| ((2.0 * widest * tau.sqrt()) / 8.0).ceil().max(1.0) as usize);
    let value = integrate(f, patch, zhat, tau, &rule, panels);
    let refined = integrate(f, patch, zhat, tau, &rule, 2 * panels);
    let difference = (value - refined).norm() / refined.norm().max(1.0);
    if difference > RICHARDSON_TOL {
        return Err(Error::Quadrature { difference });
    }
    Ok(GaussValue {
        value: refined,
        refined,
        difference,
        panels,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub value: Complex64,
    pub error: f64,
}

/// |G_τ f(ẑ) − f(ẑ)| for each τ.
pub fn convergence_table(
    f: &dyn Fn(&[Complex64]) -> Complex64,
    patch: &Patch,
    zhat: &[Complex64],
    taus: &[f64],
    opts: &GaussOptions,
) -> Result<Vec<ConvergenceRow>> {
    let truth = f(zhat);
    taus.iter()
        .map(|&tau| {
            let v = gauss_approx(f, patch, zhat, tau, opts)?;
            Ok(ConvergenceRow {
                tau,
                value: v.value,
                error: (v.value - truth).norm(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn moments_on_the_real_line() {
        let patch = Patch::real_box(1, 4.0);
        let opts = GaussOptions::default();
        for tau in [10.0, 40.0] {
            for x in [-0.5, 0.0, 0.7] {
                let zh = [c(x, 0.0)];
                let one = gauss_approx(&|_| c(1.0, 0.0), &patch, &zh, tau, &opts).unwrap();
                let lin = gauss_approx(&|z| z[0], &patch, &zh, tau, &opts).unwrap();
                let sq = gauss_approx(&|z| z[0] * z[0], &patch, &zh, tau, &opts).unwrap();
                assert!((one.value - 1.0).norm() < 1e-8);
                assert!((lin.value - x).norm() < 1e-8);
                assert!((sq.value - (x * x + 0.5 / tau)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn two_dimensional_normalization() {
        let patch = Patch::real_box(2, 3.0);
        let v = gauss_approx(&|_| c(1.0, 0.0), &patch, &[c(0.2, 0.0), c(-0.1, 0.0)], 20.0, &GaussOptions::default())
            .unwrap();
        assert!((v.value - 1.0).norm() < 1e-8);
    }

    #[test]
    fn curved_patch_exponential() {
        let patch = Patch {
            center: vec![[0.0, 0.0]],
            half_width: vec![4.0],
            curvature: 0.1,
        };
        let s0: f64 = 0.3;
        let zh = [c(s0, 0.1 * s0 * s0)];
        let f = |z: &[Complex64]| z[0].exp();
        let rows = convergence_table(&f, &patch, &zh, &[10.0, 40.0, 160.0, 640.0], &GaussOptions::default()).unwrap();
        for r in &rows {
            let oracle = (zh[0] + 0.25 / r.tau).exp();
            assert!((r.value - oracle).norm() < 1e-8, "{r:?}");
        }
        assert!(rows.windows(2).all(|w| w[1].error < w[0].error));
    }

    #[test]
    fn under_resolved_quadrature_fails() {
        let patch = Patch::real_box(1, 4.0);
        let opts = GaussOptions { order: 4, panels: Some(8) };
        let err = gauss_approx(&|_| c(1.0, 0.0), &patch, &[c(0.013, 0.0)], 640.0, &opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
