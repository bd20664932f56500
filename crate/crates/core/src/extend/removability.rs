//! End-to-end removability experiment: good disc, defect, deformation
//! family, wedge sample, Cauchy extension, comparison with a known truth.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use super::cauchy::{cauchy_extension_report, CauchyReport, DiscStatus, SpreadCheck};
use crate::bishop::{find_good_disc, GoodDiscSummary};
use crate::defect::{defect_of, DefectReport};
use crate::deform::{sample_wedge, ConeFit, DeformedGraph, WedgeSample};
use crate::error::{Error, Result};
use crate::scenario::{Expectation, Scenario};

/// Largest |F − truth| accepted for a removable verdict.
pub const REMOVABILITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every disc extends f and F matches the truth.
    Removable,
    /// Some disc of the family does not extend f.
    NonRemovable,
    /// All discs extend f but F disagrees with the truth or is multivalued.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct WedgeStats {
    pub discs: usize,
    pub points: usize,
    pub directions: usize,
    pub cone: Option<ConeFit>,
    pub discs_based_in_n: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RemovabilityReport {
    pub scenario: String,
    pub good_disc: GoodDiscSummary,
    pub defect: DefectReport,
    pub wedge: WedgeStats,
    pub extendible: usize,
    pub non_extendible: Vec<usize>,
    pub singular: Vec<usize>,
    pub max_flagged_content: f64,
    pub spread: SpreadCheck,
    /// Points where F was evaluated and compared.
    pub compared: usize,
    pub max_error: f64,
    pub verdict: Verdict,
    pub expected: Option<Expectation>,
    pub matches_expectation: Option<bool>,
}

/// The report plus the data needed to write the point cloud.
pub struct RemovabilityRun {
    pub report: RemovabilityReport,
    pub sample: WedgeSample,
    pub cauchy: CauchyReport,
    pub truth: Vec<Option<Complex64>>,
}

impl RemovabilityRun {
    /// One row per wedge point: disc, ζ, F, truth, |F − truth|, disc status.
    pub fn points_csv(&self) -> String {
        let mut out = String::from("disc,zeta_re,zeta_im,F_re,F_im,truth_re,truth_im,error,status\n");
        let status = |s: DiscStatus| match s {
            DiscStatus::Extendible => "extendible",
            DiscStatus::NonExtendible => "non-extendible",
            DiscStatus::Singular => "singular",
        };
        for ((pt, f), t) in self.sample.points.iter().zip(&self.cauchy.values).zip(&self.truth) {
            let pair = |v: &Option<Complex64>| match v {
                Some(z) => format!("{},{}", z.re, z.im),
                None => ",".into(),
            };
            let err = match (f, t) {
                (Some(a), Some(b)) => (a - b).norm().to_string(),
                _ => String::new(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                pt.disc,
                pt.zeta[0],
                pt.zeta[1],
                pair(f),
                pair(t),
                err,
                status(self.cauchy.discs[pt.disc].status)
            );
        }
        out
    }
}

pub fn removability_experiment(sc: &Scenario) -> Result<RemovabilityRun> {
    let m = sc.manifold.build().map_err(Error::stage("manifold"))?;
    let n = sc.n.build(&m).map_err(Error::stage("manifold"))?;
    let m1 = sc.m1.build(&m).map_err(Error::stage("manifold"))?;
    sc.f.validate(m.n()).map_err(Error::stage("manifold"))?;
    let truth_fn = sc.truth.as_ref().unwrap_or(&sc.f);
    truth_fn.validate(m.n()).map_err(Error::stage("manifold"))?;
    let kgraph = sc.kgraph(&m).map_err(Error::stage("manifold"))?;

    let good = find_good_disc(&m, &n, &m1, sc.c, sc.grid, &sc.good_disc, &sc.bishop)
        .map_err(Error::stage("good-disc"))?;
    let (_, defect) = defect_of(&m, &good.disc, &sc.nu, &sc.defect).map_err(Error::stage("defect"))?;
    let dg = DeformedGraph::new(&m, &good.disc, sc.profile).map_err(Error::stage("deform"))?;
    let sample = sample_wedge(&good.disc, &dg, &kgraph, &n, &sc.wedge, &sc.bishop).map_err(Error::stage("wedge"))?;
    let cauchy = cauchy_extension_report(&sc.f, &sample).map_err(Error::stage("cauchy"))?;

    let truth: Vec<Option<Complex64>> = sample
        .points
        .iter()
        .map(|pt| {
            let z: Vec<Complex64> = pt.z.iter().map(|c| Complex64::new(c[0], c[1])).collect();
            truth_fn.eval(&z).ok()
        })
        .collect();
    let errors: Vec<f64> = cauchy
        .values
        .iter()
        .zip(&truth)
        .filter_map(|(f, t)| Some((f.as_ref()? - t.as_ref()?).norm()))
        .collect();
    let max_error = errors.iter().copied().fold(0.0, f64::max);

    let singular: Vec<usize> = cauchy
        .discs
        .iter()
        .filter(|d| d.status == DiscStatus::Singular)
        .map(|d| d.disc)
        .collect();
    let extendible = cauchy.discs.iter().filter(|d| d.status == DiscStatus::Extendible).count();
    let verdict = if !cauchy.non_extendible.is_empty() || !singular.is_empty() {
        Verdict::NonRemovable
    } else if max_error < REMOVABILITY_TOL && cauchy.spread.ok {
        Verdict::Removable
    } else {
        Verdict::Inconclusive
    };
    let matches_expectation = sc.expect.map(|e| {
        matches!(
            (e, verdict),
            (Expectation::Removable, Verdict::Removable) | (Expectation::NonRemovable, Verdict::NonRemovable)
        )
    });
    let report = RemovabilityReport {
        scenario: sc.name.clone(),
        good_disc: good.summary(),
        defect,
        wedge: WedgeStats {
            discs: sample.discs.len(),
            points: sample.points.len(),
            directions: sample.directions.len(),
            cone: sample.cone.clone(),
            discs_based_in_n: sample.discs.iter().filter(|d| d.base_in_n).count(),
        },
        extendible,
        non_extendible: cauchy.non_extendible.clone(),
        singular,
        max_flagged_content: cauchy.max_flagged_content,
        spread: cauchy.spread.clone(),
        compared: errors.len(),
        max_error,
        verdict,
        expected: sc.expect,
        matches_expectation,
    };
    Ok(RemovabilityRun {
        report,
        sample,
        cauchy,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_reach_their_verdicts() {
        let run = removability_experiment(&Scenario::builtin("removable-quadric").unwrap()).unwrap();
        let r = &run.report;
        assert_eq!(r.verdict, Verdict::Removable, "{r:#?}");
        assert!(r.compared >= 500 && r.max_error < REMOVABILITY_TOL);
        assert_eq!(r.matches_expectation, Some(true));
        assert_eq!(run.points_csv().lines().count(), r.wedge.points + 1);

        let run = removability_experiment(&Scenario::builtin("reciprocal-w").unwrap()).unwrap();
        let r = &run.report;
        assert_eq!(r.verdict, Verdict::NonRemovable);
        assert!(r.max_flagged_content > 1e-3);
        assert_eq!(r.matches_expectation, Some(true));
    }

    #[test]
    fn failing_stage_is_named() {
        let mut sc = Scenario::builtin("removable-quadric").unwrap();
        sc.n = crate::scenario::SubmanifoldChoice::Coordinate { vars: vec![2] };
        let err = removability_experiment(&sc).err().unwrap();
        assert!(err.to_string().starts_with("stage `good-disc` failed"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
}
