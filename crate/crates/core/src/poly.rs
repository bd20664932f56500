//! Sparse multivariate polynomials with exact symbolic differentiation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Real polynomial in `nvars` real variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealPoly {
    pub nvars: usize,
    #[serde(default)]
    pub terms: Vec<Monomial>,
}

impl RealPoly {
    pub fn new(nvars: usize, terms: Vec<Monomial>) -> Result<Self> {
        let p = RealPoly { nvars, terms };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if t.powers.len() != self.nvars {
                return Err(Error::Config(format!(
                    "monomial has {} exponents, polynomial has {} variables",
                    t.powers.len(),
                    self.nvars
                )));
            }
            if !t.coef.is_finite() {
                return Err(Error::Config("non-finite polynomial coefficient".into()));
            }
        }
        Ok(())
    }

    pub fn zero(nvars: usize) -> Self {
        RealPoly {
            nvars,
            terms: Vec::new(),
        }
    }

    /// `coef · Π x_i^{k_i}` for the listed `(i, k_i)` pairs.
    pub fn monomial(nvars: usize, coef: f64, factors: &[(usize, u32)]) -> Self {
        let mut powers = vec![0; nvars];
        for &(i, k) in factors {
            powers[i] += k;
        }
        RealPoly {
            nvars,
            terms: vec![Monomial { coef, powers }],
        }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(nvars, 1.0, &[(i, 1)])
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coef *= s;
        }
        out.terms.retain(|t| t.coef != 0.0);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = RealPoly::zero(self.nvars);
        for a in &self.terms {
            for b in &other.terms {
                let powers = a.powers.iter().zip(&b.powers).map(|(x, y)| x + y).collect();
                out.push(Monomial {
                    coef: a.coef * b.coef,
                    powers,
                });
            }
        }
        out
    }

    fn push(&mut self, t: Monomial) {
        if let Some(existing) = self.terms.iter_mut().find(|e| e.powers == t.powers) {
            existing.coef += t.coef;
        } else {
            self.terms.push(t);
        }
        self.terms.retain(|t| t.coef != 0.0);
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.powers.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.iter().any(|t| t.coef != 0.0 && t.powers[i] > 0)
    }

    /// Coefficients of total degree 0 or 1.
    pub fn has_affine_part(&self) -> bool {
        self.terms
            .iter()
            .any(|t| t.coef != 0.0 && t.powers.iter().sum::<u32>() <= 1)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|t| {
                t.powers
                    .iter()
                    .zip(x)
                    .fold(t.coef, |acc, (&k, &xi)| acc * xi.powi(k as i32))
            })
            .sum()
    }

    pub fn derivative(&self, i: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.powers[i] > 0)
            .map(|t| {
                let mut powers = t.powers.clone();
                let k = powers[i];
                powers[i] -= 1;
                Monomial {
                    coef: t.coef * k as f64,
                    powers,
                }
            })
            .collect();
        RealPoly {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nvars).map(|i| self.derivative(i).eval(x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexMonomial {
    /// `[re, im]`
    pub coef: [f64; 2],
    pub powers: Vec<u32>,
}

/// Holomorphic polynomial in the complex coordinates of C^n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexPoly {
    pub nvars: usize,
    #[serde(default)]
    pub terms: Vec<ComplexMonomial>,
}

impl ComplexPoly {
    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if t.powers.len() != self.nvars {
                return Err(Error::Config(format!(
                    "monomial has {} exponents, polynomial has {} variables",
                    t.powers.len(),
                    self.nvars
                )));
            }
        }
        Ok(())
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        ComplexPoly {
            nvars,
            terms: vec![ComplexMonomial {
                coef: [c.re, c.im],
                powers: vec![0; nvars],
            }],
        }
    }

    /// `z_i − a`.
    pub fn shifted_var(nvars: usize, i: usize, a: Complex64) -> Self {
        let mut powers = vec![0; nvars];
        powers[i] = 1;
        let mut p = Self::constant(nvars, -a);
        p.terms.push(ComplexMonomial {
            coef: [1.0, 0.0],
            powers,
        });
        p
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                t.powers.iter().zip(z).fold(
                    Complex64::new(t.coef[0], t.coef[1]),
                    |acc, (&k, &zi)| acc * zi.powu(k),
                )
            })
            .sum()
    }
}
