//! Extension into the wedge swept by a disc family: F(A(ζ)) is the Cauchy
//! integral of f∘A over bΔ, evaluated spectrally.

use num_complex::Complex64;
use serde::Serialize;

use super::max_dist;
use crate::bishop::AnalyticDisc;
use crate::circle::{power_series_eval, FourierCoefficients};
use crate::deform::WedgeSample;
use crate::error::{Error, Result};
use crate::holo::HoloFn;

/// Relative negative-mode content of f∘A, over the resolved band, above which
/// A does not extend f.
pub const EXTENSION_TOL: f64 = 1e-8;
/// Points closer than this (max-norm) from different discs are compared.
pub const NEAR_RADIUS: f64 = 1e-3;

/// Fourier data of f∘A, or `NonExtendible` if it has negative modes.
pub fn extend_along_disc(f: &HoloFn, disc: &AnalyticDisc) -> Result<FourierCoefficients> {
    let c = f.compose(disc)?.fourier();
    let content = c.resolved_negative_content();
    if content > EXTENSION_TOL {
        return Err(Error::NonExtendible { content });
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscStatus {
    Extendible,
    NonExtendible,
    /// The boundary meets the singular set of f.
    Singular,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscExtension {
    pub disc: usize,
    pub content: Option<f64>,
    pub status: DiscStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadCheck {
    pub pairs: usize,
    /// Largest |ΔF| / |Δz|∞ over pairs of points on the same disc.
    pub lipschitz: f64,
    /// max over near pairs of |ΔF| − 2·L·|Δz|∞.
    pub max_excess: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CauchyReport {
    /// F at each sample point; `None` on discs that do not extend f.
    pub values: Vec<Option<Complex64>>,
    pub discs: Vec<DiscExtension>,
    pub non_extendible: Vec<usize>,
    /// Largest negative-mode content among non-extendible discs.
    pub max_flagged_content: f64,
    pub spread: SpreadCheck,
}

/// Evaluates F on every sample point, recording discs that fail to extend f.
pub fn cauchy_extension_report(f: &HoloFn, sample: &WedgeSample) -> Result<CauchyReport> {
    let mut coeffs = Vec::with_capacity(sample.discs.len());
    let mut discs = Vec::with_capacity(sample.discs.len());
    for (i, d) in sample.discs.iter().enumerate() {
        let (c, ext) = match f.compose(&d.disc) {
            Err(Error::Domain(_)) => (
                None,
                DiscExtension {
                    disc: i,
                    content: None,
                    status: DiscStatus::Singular,
                },
            ),
            Err(e) => return Err(e),
            Ok(g) => {
                let c = g.fourier();
                let content = c.resolved_negative_content();
                let ok = content <= EXTENSION_TOL;
                (
                    ok.then_some(c),
                    DiscExtension {
                        disc: i,
                        content: Some(content),
                        status: if ok {
                            DiscStatus::Extendible
                        } else {
                            DiscStatus::NonExtendible
                        },
                    },
                )
            }
        };
        coeffs.push(c);
        discs.push(ext);
    }
    let values: Vec<Option<Complex64>> = sample
        .points
        .iter()
        .map(|pt| {
            coeffs[pt.disc]
                .as_ref()
                .map(|c| power_series_eval(c, Complex64::new(pt.zeta[0], pt.zeta[1])))
        })
        .collect();
    let non_extendible: Vec<usize> = discs
        .iter()
        .filter(|d| d.status == DiscStatus::NonExtendible)
        .map(|d| d.disc)
        .collect();
    let max_flagged_content = discs
        .iter()
        .filter(|d| d.status == DiscStatus::NonExtendible)
        .filter_map(|d| d.content)
        .fold(0.0, f64::max);
    let spread = spread_check(sample, &values);
    Ok(CauchyReport {
        values,
        discs,
        non_extendible,
        max_flagged_content,
        spread,
    })
}

/// As [`cauchy_extension_report`], failing on the first non-extendible disc.
pub fn cauchy_extension(f: &HoloFn, sample: &WedgeSample) -> Result<CauchyReport> {
    let report = cauchy_extension_report(f, sample)?;
    if let Some(d) = report.discs.iter().find(|d| d.status != DiscStatus::Extendible) {
        return Err(Error::NonExtendible {
            content: d.content.unwrap_or(f64::INFINITY),
        });
    }
    Ok(report)
}

fn spread_check(sample: &WedgeSample, values: &[Option<Complex64>]) -> SpreadCheck {
    let pts: Vec<(usize, Vec<Complex64>, Complex64)> = sample
        .points
        .iter()
        .zip(values)
        .filter_map(|(p, v)| {
            v.map(|v| {
                let z = p.z.iter().map(|c| Complex64::new(c[0], c[1])).collect();
                (p.disc, z, v)
            })
        })
        .collect();
    let mut lip: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].0 == pts[j].0 {
                let dz = max_dist(&pts[i].1, &pts[j].1);
                if dz > 0.0 {
                    lip = lip.max((pts[i].2 - pts[j].2).norm() / dz);
                }
            }
        }
    }
    let mut pairs = 0;
    let mut excess = f64::NEG_INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].0 == pts[j].0 {
                continue;
            }
            let dz = max_dist(&pts[i].1, &pts[j].1);
            if dz < NEAR_RADIUS {
                pairs += 1;
                excess = excess.max((pts[i].2 - pts[j].2).norm() - 2.0 * lip * dz);
            }
        }
    }
    let max_excess = if pairs == 0 { 0.0 } else { excess };
    SpreadCheck {
        pairs,
        lipschitz: lip,
        max_excess,
        ok: max_excess < 1e-6 * lip.max(f64::MIN_POSITIVE),
    }
}
