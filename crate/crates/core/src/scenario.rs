//! Scenario and config files (JSON or TOML, unknown keys rejected).

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bishop::{BishopOptions, GoodDiscConfig};
use crate::circle::CircleGrid;
use crate::defect::{DefectOptions, NuOptions};
use crate::deform::{DeformProfile, KGraph, WedgeConfig};
use crate::error::{Error, Result};
use crate::holo::HoloFn;
use crate::manifold::{GenericManifold, ManifoldDef, Submanifold};
use crate::poly::RealPoly;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ManifoldChoice {
    /// y = 0.
    Flat { p: usize, q: usize },
    /// y_j = |w|² for every j.
    SphereQuadric { p: usize, q: usize },
    Polynomial {
        p: usize,
        q: usize,
        h: Vec<RealPoly>,
        #[serde(default)]
        base_point: Option<Vec<[f64; 2]>>,
    },
}

impl ManifoldChoice {
    pub fn build(&self) -> Result<GenericManifold> {
        match self {
            ManifoldChoice::Flat { p, q } => {
                check_dims(*p, *q)?;
                Ok(GenericManifold::flat(*p, *q))
            }
            ManifoldChoice::SphereQuadric { p, q } => {
                check_dims(*p, *q)?;
                Ok(GenericManifold::sphere_quadric(*p, *q))
            }
            ManifoldChoice::Polynomial { p, q, h, base_point } => {
                GenericManifold::from_def(&ManifoldDef {
                    p: *p,
                    q: *q,
                    h: h.clone(),
                    base_point: base_point.clone(),
                })
            }
        }
    }
}

fn check_dims(p: usize, q: usize) -> Result<()> {
    if p == 0 || q == 0 {
        return Err(Error::Config(format!("need p, q ≥ 1, got p = {p}, q = {q}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SubmanifoldChoice {
    /// Vanishing of the listed parameters (u₁..u_p, v₁..v_p, x₁..x_q).
    Coordinate { vars: Vec<usize> },
    Equations { equations: Vec<RealPoly> },
}

impl SubmanifoldChoice {
    pub fn build(&self, m: &GenericManifold) -> Result<Submanifold> {
        match self {
            SubmanifoldChoice::Coordinate { vars } => {
                if let Some(&v) = vars.iter().find(|&&v| v >= m.dim()) {
                    return Err(Error::Config(format!(
                        "coordinate {v} out of range for a manifold with {} parameters",
                        m.dim()
                    )));
                }
                Submanifold::coordinate(m, vars)
            }
            SubmanifoldChoice::Equations { equations } => Submanifold::new(m, equations.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Removable,
    NonRemovable,
}

/// Input of the removability pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub manifold: ManifoldChoice,
    pub n: SubmanifoldChoice,
    /// Hypersurface of M through N used to build the seed disc.
    pub m1: SubmanifoldChoice,
    #[serde(default = "default_c")]
    pub c: f64,
    pub f: HoloFn,
    /// Closed-form extension of f; f itself when omitted.
    #[serde(default)]
    pub truth: Option<HoloFn>,
    #[serde(default)]
    pub kgraph: Option<RealPoly>,
    #[serde(default)]
    pub expect: Option<Expectation>,
    #[serde(default)]
    pub grid: CircleGrid,
    #[serde(default)]
    pub bishop: BishopOptions,
    #[serde(default)]
    pub good_disc: GoodDiscConfig,
    #[serde(default)]
    pub nu: NuOptions,
    #[serde(default)]
    pub defect: DefectOptions,
    #[serde(default)]
    pub profile: DeformProfile,
    #[serde(default)]
    pub wedge: WedgeConfig,
}

fn default_c() -> f64 {
    0.05
}

impl Scenario {
    pub fn kgraph(&self, m: &GenericManifold) -> Result<KGraph> {
        let k = match &self.kgraph {
            Some(k) => KGraph { k: k.clone() },
            None => KGraph::flat(m),
        };
        k.validate(m)?;
        Ok(k)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Config(format!("no bundled scenario named `{name}`")))?;
        parse_str(text, Format::Toml, name)
    }
}

/// Scenario files shipped with the crate, as (name, TOML source).
pub const BUNDLED: &[(&str, &str)] = &[
    ("removable-quadric", include_str!("../scenarios/removable-quadric.toml")),
    ("reciprocal-w", include_str!("../scenarios/reciprocal-w.toml")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Toml,
}

impl Format {
    pub fn of(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Ok(Format::Json),
            Some("toml") => Ok(Format::Toml),
            _ => Err(Error::Config(format!(
                "{}: config files must end in .json or .toml",
                path.display()
            ))),
        }
    }
}

/// Parses `text`; errors carry `origin` and the line and column.
pub fn parse_str<T: DeserializeOwned>(text: &str, format: Format, origin: &str) -> Result<T> {
    match format {
        Format::Json => serde_json::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}"))),
        Format::Toml => toml::from_str(text).map_err(|e| {
            let (line, col) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((0, 0));
            Error::Config(format!("{origin}:{line}:{col}: {}", e.message()))
        }),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let format = Format::of(path)?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_str(&text, format, &path.display().to_string())
}
