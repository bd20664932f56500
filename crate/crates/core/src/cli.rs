//! Config-driven runner behind the `crdisc` binary.
//!
//! Every subcommand reads an optional JSON/TOML config (built-in defaults
//! otherwise), applies the `--grid/--tol/--seed` overrides, and either prints
//! its JSON report or writes it with CSV tables and `manifest.json` to
//! `--out`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bishop::{find_good_disc, seed_disc_w, solve_bishop, AnalyticDisc, BishopOptions};
use crate::circle::{hilbert_t1, CircleFunction, CircleGrid, HOLOMORPHIC_TOL};
use crate::defect::{defect_of, DefectOptions, NuOptions};
use crate::deform::{normal_derivative_map, sample_wedge, DeformProfile, DeformedGraph, CROSS_CHECK_TOL, T_STEP};
use crate::error::{Error, Result};
use crate::extend::approx::{convergence_table, GaussOptions, Patch, RICHARDSON_TOL};
use crate::extend::cauchy::EXTENSION_TOL;
use crate::extend::continuity::{continuity_extend, MONODROMY_TOL};
use crate::extend::isotopy::{
    blocking_ring, isotopy_to_point, transversal_geometry, IsotopyConfig, IsotopySummary, Recipe,
    TERMINAL_DIAMETER_TOL,
};
use crate::extend::removability::{removability_experiment, Verdict, REMOVABILITY_TOL};
use crate::holo::HoloFn;
use crate::manifold::GenericManifold;
use crate::poly::{ComplexMonomial, ComplexPoly};
use crate::scenario::{self, ManifoldChoice, Scenario, BUNDLED};

#[derive(Debug, Parser)]
#[command(name = "crdisc", version, about = "Analytic discs attached to generic CR manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON or TOML config; built-in defaults when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for reports, CSV tables and manifest.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Circle grid size (power of two).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Solver tolerance for Bishop's equation.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve Bishop's equation and write the disc.
    Bishop,
    /// Factor ν and compute the defect of a disc.
    Defect,
    /// D′(0) and its cross-checks for the normal deformation.
    DeformRank,
    /// Sample the wedge swept by the deformation family.
    Wedge,
    /// Deform discs to points avoiding a singular set.
    Isotopy,
    /// Convergence table of the Gaussian approximation operator.
    Approx,
    /// Run a removability scenario end to end.
    Remove,
    /// Run the invariant suite and every bundled scenario.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Bishop => "bishop",
            Command::Defect => "defect",
            Command::DeformRank => "deform-rank",
            Command::Wedge => "wedge",
            Command::Isotopy => "isotopy",
            Command::Approx => "approx",
            Command::Remove => "remove",
            Command::Selftest => "selftest",
        }
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl Overrides {
    fn grid(&self, g: &mut CircleGrid) -> Result<()> {
        if let Some(n) = self.grid {
            *g = CircleGrid::new(n)?;
        }
        Ok(())
    }

    fn tol(&self, opts: &mut BishopOptions) {
        if let Some(t) = self.tol {
            opts.tol = t;
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

fn check_bishop(o: &BishopOptions) -> Result<()> {
    positive("bishop.tol", o.tol)?;
    positive("bishop.damping", o.damping)?;
    positive("bishop.trust_radius", o.trust_radius)
}

fn quadric() -> ManifoldChoice {
    ManifoldChoice::SphereQuadric { p: 1, q: 1 }
}

fn default_c() -> f64 {
    0.05
}

/// Disc with w = w⁰ + c(1 − ζ)e₁ through the base point.
fn seed_disc(m: &GenericManifold, c: f64, grid: CircleGrid, opts: &BishopOptions) -> Result<AnalyticDisc> {
    positive("c", c)?;
    let z0 = m.base_point();
    let w = seed_disc_w(grid, &z0[..m.p()], c, None);
    let x0: Vec<f64> = z0[m.p()..].iter().map(|z| z.re).collect();
    solve_bishop(m, &w, &x0, opts, None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BishopRun {
    pub manifold: ManifoldChoice,
    pub c: f64,
    pub grid: CircleGrid,
    pub bishop: BishopOptions,
}

impl Default for BishopRun {
    fn default() -> Self {
        BishopRun {
            manifold: quadric(),
            c: default_c(),
            grid: CircleGrid::default(),
            bishop: BishopOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscChoice {
    Seed,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefectRun {
    pub manifold: ManifoldChoice,
    pub disc: DiscChoice,
    pub c: f64,
    pub grid: CircleGrid,
    pub bishop: BishopOptions,
    pub nu: NuOptions,
    pub defect: DefectOptions,
}

impl Default for DefectRun {
    fn default() -> Self {
        DefectRun {
            manifold: quadric(),
            disc: DiscChoice::Seed,
            c: default_c(),
            grid: CircleGrid::default(),
            bishop: BishopOptions::default(),
            nu: NuOptions::default(),
            defect: DefectOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeformRankRun {
    pub manifold: ManifoldChoice,
    pub c: f64,
    pub grid: CircleGrid,
    pub bishop: BishopOptions,
    pub profile: DeformProfile,
    pub step: f64,
}

impl Default for DeformRankRun {
    fn default() -> Self {
        DeformRankRun {
            manifold: quadric(),
            c: default_c(),
            grid: CircleGrid::default(),
            bishop: BishopOptions::default(),
            profile: DeformProfile::default(),
            step: T_STEP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum IsotopyGeometry {
    /// C² quadric, N = {w = 0}, disc w = δ + c(1 − ζ).
    Transversal { delta: f64, c: f64 },
    /// The same disc with δ = 0 around a ring Φ that blocks every shrinking.
    BlockingRing { c: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsotopyRun {
    pub geometry: IsotopyGeometry,
    pub recipes: Vec<Recipe>,
    pub isotopy: IsotopyConfig,
    pub bishop: BishopOptions,
}

impl Default for IsotopyRun {
    fn default() -> Self {
        IsotopyRun {
            geometry: IsotopyGeometry::Transversal { delta: 0.02, c: 0.05 },
            recipes: vec![Recipe::ShrinkW, Recipe::MoveBase, Recipe::Combined],
            isotopy: IsotopyConfig::default(),
            bishop: BishopOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproxRun {
    pub f: HoloFn,
    pub patch: Patch,
    pub zhat: Vec<[f64; 2]>,
    pub taus: Vec<f64>,
    pub gauss: GaussOptions,
}

impl Default for ApproxRun {
    fn default() -> Self {
        let s0: f64 = 0.3;
        ApproxRun {
            f: HoloFn::Exp {
                exponent: ComplexPoly {
                    nvars: 1,
                    terms: vec![ComplexMonomial { coef: [1.0, 0.0], powers: vec![1] }],
                },
            },
            patch: Patch {
                center: vec![[0.0, 0.0]],
                half_width: vec![4.0],
                curvature: 0.1,
            },
            zhat: vec![[s0, 0.1 * s0 * s0]],
            taus: vec![10.0, 40.0, 160.0, 640.0],
            gauss: GaussOptions::default(),
        }
    }
}

/// Files produced by one subcommand, in write order.
pub struct Artifacts {
    pub report: serde_json::Value,
    pub tables: Vec<(&'static str, String)>,
    /// Failure to report after the artifacts are written.
    pub failure: Option<Error>,
}

impl Artifacts {
    fn json(report: impl Serialize) -> Result<Self> {
        Ok(Artifacts {
            report: serde_json::to_value(report)?,
            tables: Vec::new(),
            failure: None,
        })
    }

    fn table(mut self, name: &'static str, csv: String) -> Self {
        self.tables.push((name, csv));
        self
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: Option<String>,
    config_sha256: String,
    overrides: Overrides,
    tolerances: Tolerances,
    files: Vec<&'a str>,
}

#[derive(Serialize)]
struct Tolerances {
    holomorphic: f64,
    cross_check: f64,
    extension: f64,
    removability: f64,
    monodromy: f64,
    richardson: f64,
    terminal_diameter: f64,
}

impl Tolerances {
    fn current() -> Self {
        Tolerances {
            holomorphic: HOLOMORPHIC_TOL,
            cross_check: CROSS_CHECK_TOL,
            extension: EXTENSION_TOL,
            removability: REMOVABILITY_TOL,
            monodromy: MONODROMY_TOL,
            richardson: RICHARDSON_TOL,
            terminal_diameter: TERMINAL_DIAMETER_TOL,
        }
    }
}

fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => scenario::load(p),
        None => Ok(T::default()),
    }
}

/// Parses argv and runs the subcommand; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let ov = Overrides {
        grid: cli.grid,
        tol: cli.tol,
        seed: cli.seed,
    };
    if let Some(t) = ov.tol {
        positive("--tol", t)?;
    }
    if let Some(n) = ov.grid {
        CircleGrid::new(n)?;
    }
    let path = cli.config.as_deref();
    if cli.command == Command::Selftest {
        let (text, ok) = selftest(&ov);
        print!("{text}");
        if let Some(dir) = &cli.out {
            write_outputs(dir, cli, &serde_json::Value::Null, &ov, &Artifacts {
                report: serde_json::json!({ "passed": ok }),
                tables: vec![("selftest.txt", text.clone())],
                failure: None,
            })?;
        }
        return if ok {
            Ok(())
        } else {
            Err(Error::Domain("selftest failed".into()))
        };
    }
    let (config, artifacts) = match cli.command {
        Command::Bishop => {
            let mut cfg: BishopRun = load_or_default(path)?;
            ov.grid(&mut cfg.grid)?;
            ov.tol(&mut cfg.bishop);
            (serde_json::to_value(&cfg)?, run_bishop(&cfg)?)
        }
        Command::Defect => {
            let mut cfg: DefectRun = load_or_default(path)?;
            ov.grid(&mut cfg.grid)?;
            ov.tol(&mut cfg.bishop);
            (serde_json::to_value(&cfg)?, run_defect(&cfg)?)
        }
        Command::DeformRank => {
            let mut cfg: DeformRankRun = load_or_default(path)?;
            ov.grid(&mut cfg.grid)?;
            ov.tol(&mut cfg.bishop);
            (serde_json::to_value(&cfg)?, run_deform_rank(&cfg)?)
        }
        Command::Wedge | Command::Remove => {
            let mut sc: Scenario = match path {
                Some(p) => scenario::load(p)?,
                None => Scenario::builtin("removable-quadric")?,
            };
            ov.grid(&mut sc.grid)?;
            ov.tol(&mut sc.bishop);
            if let Some(s) = ov.seed {
                sc.wedge.seed = s;
            }
            let out = if cli.command == Command::Wedge {
                run_wedge(&sc)?
            } else {
                run_remove(&sc)?
            };
            (serde_json::to_value(&sc)?, out)
        }
        Command::Isotopy => {
            let mut cfg: IsotopyRun = load_or_default(path)?;
            ov.tol(&mut cfg.bishop);
            (serde_json::to_value(&cfg)?, run_isotopy(&cfg)?)
        }
        Command::Approx => {
            let cfg: ApproxRun = load_or_default(path)?;
            (serde_json::to_value(&cfg)?, run_approx(&cfg)?)
        }
        Command::Selftest => unreachable!("handled above"),
    };
    match &cli.out {
        Some(dir) => write_outputs(dir, cli, &config, &ov, &artifacts)?,
        None => println!("{}", serde_json::to_string_pretty(&artifacts.report)?),
    }
    match artifacts.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn write_outputs(dir: &Path, cli: &Cli, config: &serde_json::Value, ov: &Overrides, a: &Artifacts) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let name = cli.command.name();
    let report_name = format!("{name}.json");
    let mut files = vec![report_name.as_str()];
    std::fs::write(dir.join(&report_name), serde_json::to_string_pretty(&a.report)? + "\n")?;
    for (file, text) in &a.tables {
        std::fs::write(dir.join(file), text)?;
        files.push(file);
    }
    let hash = Sha256::digest(serde_json::to_string(config)?.as_bytes());
    let manifest = Manifest {
        tool: "crdisc",
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        config: cli.config.as_ref().map(|p| p.display().to_string()),
        config_sha256: hex::encode(hash),
        overrides: *ov,
        tolerances: Tolerances::current(),
        files,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct DiscReport {
    attachment_residual: f64,
    holomorphy_defect: f64,
    disc: crate::bishop::DiscRecord,
}

fn boundary_csv(disc: &AnalyticDisc) -> String {
    let grid = disc.grid();
    let mut header = vec!["node".to_string(), "theta".into()];
    for k in 1..=disc.n() {
        header.push(format!("Z{k}_re"));
        header.push(format!("Z{k}_im"));
    }
    let mut out = header.join(",") + "\n";
    for j in 0..grid.size() {
        let mut row = vec![j.to_string(), grid.theta(j).to_string()];
        for z in disc.boundary_point(j) {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn run_bishop(cfg: &BishopRun) -> Result<Artifacts> {
    check_bishop(&cfg.bishop)?;
    let m = cfg.manifold.build()?;
    let disc = seed_disc(&m, cfg.c, cfg.grid, &cfg.bishop)?;
    let report = DiscReport {
        attachment_residual: disc.attachment_residual(&m),
        holomorphy_defect: disc.holomorphy_defect(),
        disc: disc.to_record(),
    };
    Ok(Artifacts::json(report)?.table("boundary.csv", boundary_csv(&disc)))
}

pub fn run_defect(cfg: &DefectRun) -> Result<Artifacts> {
    check_bishop(&cfg.bishop)?;
    positive("nu.tol", cfg.nu.tol)?;
    positive("defect.rel_tol", cfg.defect.rel_tol)?;
    let m = cfg.manifold.build()?;
    let disc = match cfg.disc {
        DiscChoice::Seed => seed_disc(&m, cfg.c, cfg.grid, &cfg.bishop)?,
        DiscChoice::Constant => AnalyticDisc::constant(cfg.grid, m.base_point(), m.p()),
    };
    let (_, report) = defect_of(&m, &disc, &cfg.nu, &cfg.defect)?;
    let mut csv = String::from("node,theta,defect\n");
    for z in &report.per_zeta {
        let _ = writeln!(csv, "{},{},{}", z.node, z.theta, z.defect);
    }
    Ok(Artifacts::json(&report)?.table("defect_per_zeta.csv", csv))
}

pub fn run_deform_rank(cfg: &DeformRankRun) -> Result<Artifacts> {
    check_bishop(&cfg.bishop)?;
    positive("step", cfg.step)?;
    let m = cfg.manifold.build()?;
    let disc = seed_disc(&m, cfg.c, cfg.grid, &cfg.bishop)?;
    let dg = DeformedGraph::new(&m, &disc, cfg.profile)?;
    let nd = normal_derivative_map(&disc, &dg, cfg.step, &cfg.bishop)?;
    let mut csv = String::from("row,column,d_prime,j_column,difference\n");
    for (i, (dr, jr)) in nd.d_prime.iter().zip(&nd.j_columns).enumerate() {
        for (j, (d, jc)) in dr.iter().zip(jr).enumerate() {
            let _ = writeln!(csv, "{i},{j},{d},{jc},{}", (d - jc).abs());
        }
    }
    Ok(Artifacts::json(&nd)?.table("deform_rank.csv", csv))
}

#[derive(Serialize)]
struct WedgeReport {
    v0: Vec<f64>,
    directions: Vec<Vec<f64>>,
    cone: Option<crate::deform::ConeFit>,
    discs: usize,
    points: usize,
    discs_based_in_n: usize,
}

pub fn run_wedge(sc: &Scenario) -> Result<Artifacts> {
    check_bishop(&sc.bishop)?;
    let m = sc.manifold.build()?;
    let n = sc.n.build(&m)?;
    let m1 = sc.m1.build(&m)?;
    let kgraph = sc.kgraph(&m)?;
    let good = find_good_disc(&m, &n, &m1, sc.c, sc.grid, &sc.good_disc, &sc.bishop).map_err(Error::stage("good-disc"))?;
    let dg = DeformedGraph::new(&m, &good.disc, sc.profile).map_err(Error::stage("deform"))?;
    let sample = sample_wedge(&good.disc, &dg, &kgraph, &n, &sc.wedge, &sc.bishop).map_err(Error::stage("wedge"))?;
    let report = WedgeReport {
        v0: sample.v0.clone(),
        directions: sample.directions.clone(),
        cone: sample.cone.clone(),
        discs: sample.discs.len(),
        points: sample.points.len(),
        discs_based_in_n: sample.discs.iter().filter(|d| d.base_in_n).count(),
    };
    Ok(Artifacts::json(report)?.table("wedge.csv", sample.to_csv()))
}

pub fn run_remove(sc: &Scenario) -> Result<Artifacts> {
    check_bishop(&sc.bishop)?;
    let run = removability_experiment(sc)?;
    let csv = run.points_csv();
    Ok(Artifacts::json(&run.report)?.table("remove_points.csv", csv))
}

#[derive(Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
enum RecipeOutcome {
    Reached(IsotopySummary),
    Blocked { recipe: Recipe, s: f64, nearest: Vec<f64> },
}

pub fn run_isotopy(cfg: &IsotopyRun) -> Result<Artifacts> {
    check_bishop(&cfg.bishop)?;
    let (m, phi, disc) = match cfg.geometry {
        IsotopyGeometry::Transversal { delta, c } => {
            positive("c", c)?;
            transversal_geometry(delta, c, &cfg.bishop)?
        }
        IsotopyGeometry::BlockingRing { c } => {
            positive("c", c)?;
            let (m, _, disc) = transversal_geometry(0.0, c, &cfg.bishop)?;
            let ring = blocking_ring(&m, c)?;
            (m, ring, disc)
        }
    };
    let mut outcomes = Vec::new();
    let mut failure = None;
    for &recipe in &cfg.recipes {
        let c = IsotopyConfig { recipe, ..cfg.isotopy.clone() };
        match isotopy_to_point(&m, &disc, Some(&phi), None, &c, &cfg.bishop) {
            Ok(path) => outcomes.push(RecipeOutcome::Reached(path.summary())),
            Err(Error::IsotopyBlocked { s, nearest }) => {
                failure.get_or_insert(Error::IsotopyBlocked { s, nearest: nearest.clone() });
                outcomes.push(RecipeOutcome::Blocked { recipe, s, nearest });
            }
            Err(e) => return Err(e),
        }
    }
    let mut a = Artifacts::json(&outcomes)?;
    a.failure = failure;
    Ok(a)
}

pub fn run_approx(cfg: &ApproxRun) -> Result<Artifacts> {
    cfg.f.validate(cfg.patch.dim())?;
    for &t in &cfg.taus {
        positive("tau", t)?;
    }
    let zhat: Vec<Complex64> = cfg.zhat.iter().map(|c| Complex64::new(c[0], c[1])).collect();
    let f = |z: &[Complex64]| cfg.f.eval(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let rows = convergence_table(&f, &cfg.patch, &zhat, &cfg.taus, &cfg.gauss)?;
    let mut csv = String::from("tau,value_re,value_im,error\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.tau, r.value.re, r.value.im, r.error);
    }
    Ok(Artifacts::json(&rows)?.table("approx.csv", csv))
}

/// Accumulates PASS/FAIL lines.
struct Suite {
    text: String,
    ok: bool,
}

impl Suite {
    fn check(&mut self, name: &str, outcome: Result<(bool, String)>) {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
        self.ok &= pass;
        let _ = writeln!(self.text, "{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

/// Runs the invariant suite; the text is identical across runs.
pub fn selftest(ov: &Overrides) -> (String, bool) {
    let mut s = Suite {
        text: String::new(),
        ok: true,
    };
    let grid = ov.grid.and_then(|n| CircleGrid::new(n).ok()).unwrap_or_default();
    let mut opts = BishopOptions::default();
    ov.tol(&mut opts);

    s.check("hilbert", (|| {
        let mut err: f64 = 0.0;
        for k in 1..=64 {
            let kf = k as f64;
            let cos = CircleFunction::sample_real(grid, |t| (kf * t).cos());
            let t1 = hilbert_t1(&cos)?;
            let want = CircleFunction::sample_real(grid, |t| (kf * t).sin());
            err = err.max(t1.sub(&want).sup_norm());
            let sin = CircleFunction::sample_real(grid, |t| (kf * t).sin());
            let want = CircleFunction::sample_real(grid, |t| 1.0 - (kf * t).cos());
            err = err.max(hilbert_t1(&sin)?.sub(&want).sup_norm());
        }
        Ok((err < 1e-12, format!("max error {err:.1e}")))
    })());

    s.check("bishop-closed-form", (|| {
        let m = GenericManifold::sphere_quadric(1, 1);
        let c = 0.05;
        let d = seed_disc(&m, c, grid, &opts)?;
        let z = CircleFunction::sample_zeta(grid, |zeta| Complex64::new(0.0, 2.0 * c * c) * (1.0 - zeta));
        let err = d.z()[0].sub(&z).sup_norm();
        Ok((err < 1e-10, format!("max error {err:.1e}")))
    })());

    s.check("defect", (|| {
        let nu = NuOptions::default();
        let dopts = DefectOptions::default();
        let quad = GenericManifold::sphere_quadric(1, 1);
        let (_, dq) = defect_of(&quad, &seed_disc(&quad, 0.05, grid, &opts)?, &nu, &dopts)?;
        let flat = GenericManifold::flat(1, 2);
        let (_, df) = defect_of(&flat, &seed_disc(&flat, 0.05, grid, &opts)?, &nu, &dopts)?;
        let pass = dq.defect == 0 && df.defect == 2 && dq.consistent && df.consistent;
        Ok((pass, format!("quadric {}, flat {} of 2", dq.defect, df.defect)))
    })());

    s.check("deform-rank", (|| {
        let m = GenericManifold::sphere_quadric(1, 1);
        let d = seed_disc(&m, 0.05, grid, &opts)?;
        let dg = DeformedGraph::new(&m, &d, DeformProfile::default())?;
        let nd = normal_derivative_map(&d, &dg, T_STEP, &opts)?;
        let pass = nd.rank.rank == 1 && nd.cross_check_error < CROSS_CHECK_TOL;
        Ok((pass, format!("rank {}, cross-check {:.1e}", nd.rank.rank, nd.cross_check_error)))
    })());

    s.check("continuity", (|| {
        let m = GenericManifold::sphere_quadric(1, 1);
        let d = seed_disc(&m, 0.05, grid, &opts)?;
        let f = HoloFn::pole(2, 0, Complex64::new(0.3, 0.0));
        let chain = continuity_extend(&f, &d, &|_| 0.01)?;
        let mut err: f64 = 0.0;
        for (z, v) in chain.centers.iter().zip(&chain.germ_values) {
            err = err.max((f.eval(z)? - v).norm());
        }
        Ok((err < 1e-10, format!("{} polydiscs, max error {err:.1e}", chain.centers.len())))
    })());

    s.check("isotopy", (|| {
        let (m, n, d) = transversal_geometry(0.02, 0.05, &opts)?;
        let reach = isotopy_to_point(&m, &d, Some(&n), None, &IsotopyConfig::default(), &opts)?;
        let (m, _, d) = transversal_geometry(0.0, 0.05, &opts)?;
        let ring = blocking_ring(&m, 0.05)?;
        let blocked = matches!(
            isotopy_to_point(&m, &d, Some(&ring), None, &IsotopyConfig::default(), &opts),
            Err(Error::IsotopyBlocked { .. })
        );
        Ok((
            reach.terminal && blocked,
            format!("terminal diameter {:.1e}, ring blocks: {blocked}", reach.terminal_diameter),
        ))
    })());

    s.check("approx", (|| {
        let patch = Patch::real_box(1, 4.0);
        let sq = |z: &[Complex64]| z[0] * z[0];
        let x = 0.3;
        let v = crate::extend::approx::gauss_approx(&sq, &patch, &[Complex64::new(x, 0.0)], 40.0, &GaussOptions::default())?;
        let err = (v.value - (x * x + 0.5 / 40.0)).norm();
        Ok((err < 1e-8, format!("second moment error {err:.1e}")))
    })());

    for (name, _) in BUNDLED {
        let sc = match Scenario::builtin(name) {
            Ok(mut sc) => {
                if let Some(s) = ov.seed {
                    sc.wedge.seed = s;
                }
                sc
            }
            Err(e) => {
                s.check(&format!("scenario {name}"), Err(e));
                continue;
            }
        };
        match removability_experiment(&sc) {
            Err(e) => s.check(&format!("scenario {name}"), Err(e)),
            Ok(run) => {
                let r = &run.report;
                s.check(&format!("scenario {name} good-disc"), Ok((
                    r.good_disc.boundary_clearance > 0.0,
                    format!("boundary clearance {:.3e}", r.good_disc.boundary_clearance),
                )));
                s.check(&format!("scenario {name} defect"), Ok((
                    r.defect.consistent && r.defect.defect == 0,
                    format!("defect {}", r.defect.defect),
                )));
                let inside = r.wedge.cone.as_ref().is_some_and(|c| c.v0_inside);
                s.check(&format!("scenario {name} wedge"), Ok((
                    inside,
                    format!("{} discs, {} points, v0 inside cone: {inside}", r.wedge.discs, r.wedge.points),
                )));
                let verdict = match r.verdict {
                    Verdict::Removable => "removable",
                    Verdict::NonRemovable => "non-removable",
                    Verdict::Inconclusive => "inconclusive",
                };
                s.check(&format!("scenario {name} extension"), Ok((
                    r.matches_expectation.unwrap_or(r.verdict != Verdict::Inconclusive),
                    format!("{verdict}, max error {:.1e}, flagged content {:.1e}", r.max_error, r.max_flagged_content),
                )));
            }
        }
    }
    let _ = writeln!(s.text, "{}", if s.ok { "selftest passed" } else { "selftest FAILED" });
    (s.text, s.ok)
}
