//! Closed-form holomorphic functions used as extension data and truths.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bishop::AnalyticDisc;
use crate::circle::CircleFunction;
use crate::error::{Error, Result};
use crate::poly::ComplexPoly;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HoloFn {
    Poly { poly: ComplexPoly },
    /// num / den, singular on {den = 0}.
    Rational { num: ComplexPoly, den: ComplexPoly },
    Exp { exponent: ComplexPoly },
    /// 1 / (z_var − at).
    Pole { nvars: usize, var: usize, at: [f64; 2] },
}

impl HoloFn {
    /// 1 / (z_i − a).
    pub fn pole(nvars: usize, i: usize, a: Complex64) -> Self {
        HoloFn::Pole {
            nvars,
            var: i,
            at: [a.re, a.im],
        }
    }

    pub fn nvars(&self) -> usize {
        match self {
            HoloFn::Poly { poly } => poly.nvars,
            HoloFn::Rational { num, .. } => num.nvars,
            HoloFn::Exp { exponent } => exponent.nvars,
            HoloFn::Pole { nvars, .. } => *nvars,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let HoloFn::Pole { nvars, var, .. } = self {
            if *nvars != n || *var >= n {
                return Err(Error::Config(format!(
                    "pole in variable {var} of {nvars}, the ambient space has {n}"
                )));
            }
            return Ok(());
        }
        let polys: Vec<&ComplexPoly> = match self {
            HoloFn::Poly { poly } => vec![poly],
            HoloFn::Rational { num, den } => vec![num, den],
            HoloFn::Exp { exponent } => vec![exponent],
            HoloFn::Pole { .. } => Vec::new(),
        };
        for p in polys {
            p.validate()?;
            if p.nvars != n {
                return Err(Error::Config(format!(
                    "function uses {} variables, the ambient space has {n}",
                    p.nvars
                )));
            }
        }
        Ok(())
    }

    pub fn is_entire(&self) -> bool {
        matches!(self, HoloFn::Poly { .. } | HoloFn::Exp { .. })
    }

    /// Errors with `Domain` on the singular set.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            HoloFn::Poly { poly } => Ok(poly.eval(z)),
            HoloFn::Exp { exponent } => Ok(exponent.eval(z).exp()),
            HoloFn::Rational { num, den } => {
                let d = den.eval(z);
                if d.norm() == 0.0 {
                    return Err(Error::Domain(format!("function is singular at {z:?}")));
                }
                Ok(num.eval(z) / d)
            }
            HoloFn::Pole { var, at, .. } => {
                let d = z[*var] - Complex64::new(at[0], at[1]);
                if d.norm() == 0.0 {
                    return Err(Error::Domain(format!("function is singular at {z:?}")));
                }
                Ok(1.0 / d)
            }
        }
    }

    /// Max-norm distance to the singular set when the denominator is affine.
    pub fn singular_distance(&self, z: &[Complex64]) -> Option<f64> {
        match self {
            HoloFn::Rational { den, .. } => {
                if den.terms.iter().any(|t| t.powers.iter().sum::<u32>() > 1) {
                    return None;
                }
                // |ℓ(z)| / ‖∇ℓ‖₁ is the max-norm distance to {ℓ = 0}
                let grad: f64 = den
                    .terms
                    .iter()
                    .filter(|t| t.powers.iter().sum::<u32>() == 1)
                    .map(|t| Complex64::new(t.coef[0], t.coef[1]).norm())
                    .sum();
                if grad == 0.0 {
                    return None;
                }
                Some(den.eval(z).norm() / grad)
            }
            HoloFn::Pole { var, at, .. } => Some((z[*var] - Complex64::new(at[0], at[1])).norm()),
            _ => Some(f64::INFINITY),
        }
    }

    /// f∘A on bΔ.
    pub fn compose(&self, disc: &AnalyticDisc) -> Result<CircleFunction> {
        let grid = disc.grid();
        let vals = (0..grid.size())
            .map(|j| self.eval(&disc.boundary_point(j)))
            .collect::<Result<Vec<_>>>()?;
        CircleFunction::from_complex(grid, vals)
    }

    /// f∘(A + δ) on bΔ.
    pub fn compose_shifted(&self, disc: &AnalyticDisc, delta: &[Complex64]) -> Result<CircleFunction> {
        let grid = disc.grid();
        let vals = (0..grid.size())
            .map(|j| {
                let z: Vec<Complex64> = disc.boundary_point(j).iter().zip(delta).map(|(a, b)| a + b).collect();
                self.eval(&z)
            })
            .collect::<Result<Vec<_>>>()?;
        CircleFunction::from_complex(grid, vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_and_distance() {
        let f = HoloFn::pole(2, 0, c(0.3, 0.0));
        assert!((f.eval(&[c(0.5, 0.0), c(7.0, 1.0)]).unwrap() - c(5.0, 0.0)).norm() < 1e-14);
        assert!(matches!(f.eval(&[c(0.3, 0.0), c(0.0, 0.0)]), Err(Error::Domain(_))));
        assert!((f.singular_distance(&[c(0.3, 0.4), c(1.0, 0.0)]).unwrap() - 0.4).abs() < 1e-15);
        assert!(!f.is_entire());
        assert!(f.validate(2).is_ok());
        assert!(f.validate(3).is_err());
    }

    #[test]
    fn config_round_trip() {
        let src = r#"{"kind":"exp","exponent":{"nvars":1,"terms":[{"coef":[1,0],"powers":[1]}]}}"#;
        let f: HoloFn = serde_json::from_str(src).unwrap();
        assert!((f.eval(&[c(1.0, 0.0)]).unwrap().re - 1f64.exp()).abs() < 1e-14);
        let back: HoloFn = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
        let bad = r#"{"kind":"exp","exponent":{"nvars":1},"extra":1}"#;
        assert!(serde_json::from_str::<HoloFn>(bad).is_err());
    }
}
