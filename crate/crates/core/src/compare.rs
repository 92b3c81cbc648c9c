//! Comparison pipelines: solve on `Ω`, symmetrize, solve on `Ω^♯` and test
//! the inequalities between the two with a discretization margin.
//!
//! Every quantity is computed on a mesh of size `h` and on its uniform
//! refinement. Checks use the fine values; the margin is the change between
//! the two levels (three times the Richardson error estimate of the fine
//! value for a second order method) plus a round-off floor.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{FemField, RobinSystem};
use crate::geometry::{
    isoperimetric_constant, isoperimetric_ratio, symmetrized_disk, weighted_area, SymmetrizedDisk,
    WeightedDomain,
};
use crate::mesh::{refine, triangulate, TriangleMesh};
use crate::radial::{radial_eigen, solve_symmetrized_on, RadialField};
use crate::rearrange::{
    rearrange_field, rearranged_source_on, schwarz_value, LayerCake, RearrangementProfile,
};
use crate::source::Source;

/// Relative round-off floor added to every margin.
pub const MARGIN_FLOOR: f64 = 1e-10;
/// Slack of the isoperimetric check.
pub const ISOPERIMETRIC_TOL: f64 = 1e-6;
/// Slack of the nonnegativity check on `min u_h`.
pub const MIN_TOL: f64 = 1e-8;

/// Direction of an inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `lhs ≥ rhs - margin`
    AtLeast,
    /// `lhs ≤ rhs + margin`
    AtMost,
}

/// One certified inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    #[serde(skip)]
    pub relation: Relation,
}

impl Check {
    pub fn new(name: impl Into<String>, relation: Relation, lhs: f64, rhs: f64, margin: f64) -> Self {
        let pass = match relation {
            Relation::AtLeast => lhs >= rhs - margin,
            Relation::AtMost => lhs <= rhs + margin,
        };
        Self { name: name.into(), lhs, rhs, margin, pass, relation }
    }

    pub fn at_least(name: impl Into<String>, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self::new(name, Relation::AtLeast, lhs, rhs, margin)
    }

    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self::new(name, Relation::AtMost, lhs, rhs, margin)
    }

    /// Signed distance from failing; negative on failure.
    pub fn slack(&self) -> f64 {
        match self.relation {
            Relation::AtLeast => self.lhs - self.rhs + self.margin,
            Relation::AtMost => self.rhs + self.margin - self.lhs,
        }
    }
}

/// Families of checks run by the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Isoperimetric,
    NormComparison,
    Pointwise,
    FaberKrahn,
    Minimum,
    HardyLittlewood,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] = [
        CheckKind::Isoperimetric,
        CheckKind::NormComparison,
        CheckKind::Pointwise,
        CheckKind::FaberKrahn,
        CheckKind::Minimum,
        CheckKind::HardyLittlewood,
    ];
}

/// Derived constants of a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub area_l: f64,
    pub r_sharp: f64,
    #[serde(rename = "C_l")]
    pub c_l: f64,
}

/// Checks for one `(Ω, l, β)` and source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub domain: String,
    pub l: f64,
    pub beta: f64,
    pub h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub checks: Vec<Check>,
    pub constants: Constants,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl ComparisonReport {
    pub fn new(name: &str, domain: &WeightedDomain, h: f64) -> Result<Self> {
        require_constant_beta(domain)?;
        let (l, beta) = (domain.l(), domain.beta());
        let area = weighted_area(domain)?;
        let disk = symmetrized_disk(area, l, beta)?;
        Ok(Self {
            domain: name.to_string(),
            l,
            beta,
            h,
            source: None,
            checks: Vec::new(),
            constants: Constants {
                area_l: area,
                r_sharp: disk.radius,
                c_l: isoperimetric_constant(l),
            },
            errors: Vec::new(),
        })
    }

    /// No failing check and no recorded error.
    pub fn all_pass(&self) -> bool {
        self.errors.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failing(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Parameters of the comparison pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// coarse mesh size; the fine level is its uniform refinement
    pub h: f64,
    /// levels for rearranging the source
    pub n_levels: usize,
    /// radii of the pointwise comparison
    pub n_radii: usize,
    /// cells of the radial table
    pub radial_grid: usize,
    /// fine grid of the radial eigenvalue
    pub eigen_grid: usize,
    /// random triangle subsets for the Hardy-Littlewood check
    pub hl_subsets: usize,
    pub seed: u64,
    pub ls: Vec<f64>,
    pub betas: Vec<f64>,
    pub sources: Vec<Source>,
    /// check families to run; empty gives empty reports
    pub kinds: Vec<CheckKind>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            h: 0.1,
            n_levels: 512,
            n_radii: 256,
            radial_grid: crate::radial::DEFAULT_GRID,
            eigen_grid: crate::radial::DEFAULT_EIGEN_GRID,
            hl_subsets: 100,
            seed: 42,
            ls: vec![0.0, -0.5, -1.0],
            betas: vec![0.5, 1.0, 2.0],
            sources: vec![Source::One, Source::Nonradial],
            kinds: CheckKind::ALL.to_vec(),
        }
    }
}

impl SuiteConfig {
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    fn runs(&self, kind: CheckKind) -> bool {
        self.kinds.contains(&kind)
    }
}

/// Solution of the direct and the symmetrized problem on one mesh level.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub system: RobinSystem,
    pub u: FemField,
    pub fsharp: RearrangementProfile,
    pub v: RadialField,
}

impl LevelSolution {
    pub fn mesh(&self) -> &Arc<TriangleMesh> {
        &self.system.mesh
    }
}

/// Solves on `mesh` and on the symmetrized disk.
pub fn solve_level(
    mesh: Arc<TriangleMesh>,
    domain: &WeightedDomain,
    disk: &SymmetrizedDisk,
    f: Source,
    config: &SuiteConfig,
) -> Result<LevelSolution> {
    let system = RobinSystem::new(mesh, domain)?;
    let u = system.solve(f.as_fn())?;
    let fsharp = rearranged_source_on(
        &system.rules,
        system.mesh.num_triangles(),
        f.as_fn(),
        config.n_levels,
    )?;
    let v = solve_symmetrized_on(&fsharp, disk, config.radial_grid)?;
    Ok(LevelSolution { system, u, fsharp, v })
}

/// Coarse and fine solutions for one source.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub disk: SymmetrizedDisk,
    pub source: Source,
    pub coarse: LevelSolution,
    pub fine: LevelSolution,
}

impl Pipeline {
    pub fn run(domain: &WeightedDomain, f: Source, config: &SuiteConfig) -> Result<Self> {
        let coarse_mesh = triangulate(domain, config.h)?;
        let fine_mesh = refine(&coarse_mesh);
        Self::on_meshes(domain, f, Arc::new(coarse_mesh), Arc::new(fine_mesh), config)
    }

    pub fn on_meshes(
        domain: &WeightedDomain,
        f: Source,
        coarse: Arc<TriangleMesh>,
        fine: Arc<TriangleMesh>,
        config: &SuiteConfig,
    ) -> Result<Self> {
        require_constant_beta(domain)?;
        let disk = symmetrized_disk(weighted_area(domain)?, domain.l(), domain.beta())?;
        let coarse = solve_level(coarse, domain, &disk, f, config)?;
        let fine = solve_level(fine, domain, &disk, f, config)?;
        Ok(Self { disk, source: f, coarse, fine })
    }

    fn norm_pair(level: &LevelSolution, p: f64) -> (f64, f64) {
        (level.v.weighted_lp_norm(p), level.u.weighted_lp_norm(p, &level.system.rules))
    }

    /// `‖v‖_p ≥ ‖u_h‖_p` for `p ∈ {1, 2}`.
    pub fn norm_checks(&self) -> Vec<Check> {
        [(1.0, "L1"), (2.0, "L2")]
            .iter()
            .map(|&(p, tag)| {
                let (vc, uc) = Self::norm_pair(&self.coarse, p);
                let (vf, uf) = Self::norm_pair(&self.fine, p);
                let margin = (vf - vc).abs() + (uf - uc).abs() + floor(vf, uf);
                Check::at_least(format!("norm_{tag}"), vf, uf, margin)
            })
            .collect()
    }

    /// `u^♯(r) ≤ v(r)` at `n_radii` radii graded toward the origin; one
    /// check for the endpoint `r^♯` and one for the tightest interior radius.
    pub fn pointwise_checks(&self, n_radii: usize) -> Result<Vec<Check>> {
        let l = self.disk.l;
        let star_c = rearrange_field(&self.coarse.u, l, crate::rearrange::DEFAULT_LEVELS);
        let star_f = rearrange_field(&self.fine.u, l, crate::rearrange::DEFAULT_LEVELS);
        let radius = self.disk.radius;
        let mut worst: Option<Check> = None;
        let mut failures = 0usize;
        let mut endpoint = None;
        let n = n_radii.max(2);
        for k in 0..n {
            let r = radius * (k as f64 / (n - 1) as f64).powi(2);
            let x = crate::point::Point::new(r, 0.0);
            let uc = schwarz_value(&star_c, x, l)?;
            let uf = schwarz_value(&star_f, x, l)?;
            let vc = self.coarse.v.value_at(r);
            let vf = self.fine.v.value_at(r);
            let margin = (uf - uc).abs() + (vf - vc).abs() + floor(uf, vf);
            let check = Check::at_most(format!("pointwise(r={r:.6})"), uf, vf, margin);
            if !check.pass {
                failures += 1;
            }
            if k == n - 1 {
                endpoint = Some(check.clone());
            }
            if worst.as_ref().is_none_or(|w| check.slack() < w.slack()) {
                worst = Some(check);
            }
        }
        let mut worst = worst.expect("at least two radii");
        worst.name = format!("pointwise_worst_of_{n}");
        worst.pass = failures == 0;
        let mut end = endpoint.expect("endpoint radius");
        end.name = "pointwise_endpoint".into();
        Ok(vec![worst, end])
    }

    /// `0 ≤ min u_h` and `min u_h ≤ v(r^♯)`.
    pub fn min_checks(&self) -> Vec<Check> {
        let (uc, uf) = (self.coarse.u.min(), self.fine.u.min());
        let (vc, vf) = (self.coarse.v.value_at_boundary(), self.fine.v.value_at_boundary());
        let scale = self.fine.u.max().abs().max(1.0);
        vec![
            Check::at_least("min_nonnegative", uf, 0.0, MIN_TOL * scale),
            Check::at_most(
                "min_comparison",
                uf,
                vf,
                (uf - uc).abs() + (vf - vc).abs() + floor(uf, vf),
            ),
        ]
    }

    /// Hardy-Littlewood on random triangle subsets of the fine mesh.
    pub fn hardy_littlewood_checks(&self, subsets: usize, seed: u64) -> Vec<Check> {
        if subsets == 0 {
            return Vec::new();
        }
        let level = &self.fine;
        let cake = LayerCake::new(&level.u, self.disk.l);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nt = level.mesh().num_triangles();
        let mut worst: Option<Check> = None;
        let mut failures = 0usize;
        for _ in 0..subsets {
            let p: f64 = rng.gen_range(0.05..0.95);
            let subset: Vec<usize> = (0..nt).filter(|_| rng.gen_bool(p)).collect();
            let hl = cake.check(&subset);
            let check = Check::at_most(
                "hardy_littlewood",
                hl.lhs,
                hl.rhs,
                crate::rearrange::HARDY_LITTLEWOOD_TOL * hl.rhs.abs(),
            );
            if !check.pass {
                failures += 1;
            }
            if worst.as_ref().is_none_or(|w| check.slack() < w.slack()) {
                worst = Some(check);
            }
        }
        let mut worst = worst.expect("at least one subset");
        worst.name = format!("hardy_littlewood_worst_of_{subsets}");
        worst.pass = failures == 0;
        vec![worst]
    }
}

fn floor(a: f64, b: f64) -> f64 {
    MARGIN_FLOOR * a.abs().max(b.abs()).max(1.0)
}

/// Weighted Faber-Krahn comparison for one `(Ω, l, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaberKrahn {
    pub lambda_coarse: f64,
    pub lambda_fine: f64,
    pub lambda_disk: f64,
    pub margin: f64,
}

impl FaberKrahn {
    pub fn check(&self) -> Check {
        Check::at_least("faber_krahn", self.lambda_fine, self.lambda_disk, self.margin)
    }

    pub fn ratio(&self) -> f64 {
        self.lambda_fine / self.lambda_disk
    }
}

pub fn faber_krahn(domain: &WeightedDomain, h: f64, eigen_grid: usize) -> Result<FaberKrahn> {
    let coarse = Arc::new(triangulate(domain, h)?);
    let fine = Arc::new(refine(&coarse));
    faber_krahn_on(domain, coarse, fine, eigen_grid)
}

pub fn faber_krahn_on(
    domain: &WeightedDomain,
    coarse: Arc<TriangleMesh>,
    fine: Arc<TriangleMesh>,
    eigen_grid: usize,
) -> Result<FaberKrahn> {
    require_constant_beta(domain)?;
    let lc = RobinSystem::new(coarse, domain)?.smallest_eigenpair()?.lambda;
    let lf = RobinSystem::new(fine, domain)?.smallest_eigenpair()?.lambda;
    let disk = symmetrized_disk(weighted_area(domain)?, domain.l(), domain.beta())?;
    let radial = radial_eigen(&disk, eigen_grid)?;
    let margin = (lf - lc).abs()
        + (radial.lambda_fine - radial.lambda_coarse).abs()
        + floor(lf, radial.lambda);
    Ok(FaberKrahn {
        lambda_coarse: lc,
        lambda_fine: lf,
        lambda_disk: radial.lambda,
        margin,
    })
}

/// The symmetrized problem is only defined here for a constant Robin
/// parameter; variable `β(x)` domains can be solved but not compared.
fn require_constant_beta(domain: &WeightedDomain) -> Result<()> {
    if domain.beta_fn().is_some() {
        return Err(Error::Argument("comparisons require a constant Robin parameter".into()));
    }
    Ok(())
}

fn isoperimetric_check(domain: &WeightedDomain) -> Result<Check> {
    Ok(Check::at_least("isoperimetric", isoperimetric_ratio(domain)?, 1.0, ISOPERIMETRIC_TOL))
}

/// Norm comparison `‖v‖ ≥ ‖u‖` in `L¹` and `L²` of the weight.
pub fn theorem1_report(name: &str, domain: &WeightedDomain, f: Source, config: &SuiteConfig) -> Result<ComparisonReport> {
    let mut report = ComparisonReport::new(name, domain, config.h)?;
    report.source = Some(f.to_string());
    let pipeline = Pipeline::run(domain, f, config)?;
    report.checks.extend(pipeline.norm_checks());
    Ok(report)
}

/// Pointwise comparison `u^♯ ≤ v` for the torsion source `f = 1`.
pub fn theorem2_report(name: &str, domain: &WeightedDomain, config: &SuiteConfig) -> Result<ComparisonReport> {
    let mut report = ComparisonReport::new(name, domain, config.h)?;
    report.source = Some(Source::One.to_string());
    let pipeline = Pipeline::run(domain, Source::One, config)?;
    report.checks.extend(pipeline.pointwise_checks(config.n_radii)?);
    Ok(report)
}

/// `λ(Ω) ≥ λ(Ω^♯)`.
pub fn faber_krahn_report(name: &str, domain: &WeightedDomain, config: &SuiteConfig) -> Result<ComparisonReport> {
    let mut report = ComparisonReport::new(name, domain, config.h)?;
    report.checks.push(faber_krahn(domain, config.h, config.eigen_grid)?.check());
    Ok(report)
}

/// `0 ≤ min u_h ≤ v(r^♯)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinComparison {
    pub u_min: f64,
    pub v_min: f64,
    pub margin: f64,
    pub pass: bool,
}

pub fn min_comparison(domain: &WeightedDomain, f: Source, config: &SuiteConfig) -> Result<MinComparison> {
    let pipeline = Pipeline::run(domain, f, config)?;
    let checks = pipeline.min_checks();
    Ok(MinComparison {
        u_min: checks[1].lhs,
        v_min: checks[1].rhs,
        margin: checks[1].margin,
        pass: checks.iter().all(|c| c.pass),
    })
}

/// One report per `(l, β, f)` of `config`, each holding every requested
/// check family that applies. Errors of a run are recorded in its report.
pub fn full_suite(name: &str, domain: &WeightedDomain, config: &SuiteConfig) -> Vec<ComparisonReport> {
    let mut jobs = Vec::new();
    for &l in &config.ls {
        for &beta in &config.betas {
            for &f in &config.sources {
                jobs.push((l, beta, f));
            }
        }
    }
    // eigenvalues do not depend on the source: compute them once per (l, β)
    let mut pairs: Vec<(f64, f64)> = jobs.iter().map(|j| (j.0, j.1)).collect();
    pairs.dedup();
    let eigen: Vec<Option<std::result::Result<FaberKrahn, String>>> = pairs
        .par_iter()
        .map(|&(l, beta)| {
            if !config.runs(CheckKind::FaberKrahn) {
                return None;
            }
            let run = || -> Result<FaberKrahn> {
                let d = parametrized(domain, l, beta)?;
                faber_krahn(&d, config.h, config.eigen_grid)
            };
            Some(run().map_err(|e| e.to_string()))
        })
        .collect();
    jobs.par_iter()
        .enumerate()
        .map(|(k, &(l, beta, f))| {
            let fk = pairs
                .iter()
                .position(|&p| p == (l, beta))
                .and_then(|i| eigen[i].clone());
            suite_report(name, domain, l, beta, f, fk, config, k as u64)
        })
        .collect()
}

fn parametrized(domain: &WeightedDomain, l: f64, beta: f64) -> Result<WeightedDomain> {
    domain.with_l(l)?.with_beta(beta)
}

#[allow(clippy::too_many_arguments)]
fn suite_report(
    name: &str,
    domain: &WeightedDomain,
    l: f64,
    beta: f64,
    f: Source,
    fk: Option<std::result::Result<FaberKrahn, String>>,
    config: &SuiteConfig,
    job: u64,
) -> ComparisonReport {
    let d = match parametrized(domain, l, beta) {
        Ok(d) => d,
        Err(e) => return failed_report(name, l, beta, config.h, f, e),
    };
    let mut report = match ComparisonReport::new(name, &d, config.h) {
        Ok(r) => r,
        Err(e) => return failed_report(name, l, beta, config.h, f, e),
    };
    report.source = Some(f.to_string());
    if config.kinds.is_empty() {
        return report;
    }
    if config.runs(CheckKind::Isoperimetric) {
        match isoperimetric_check(&d) {
            Ok(c) => report.checks.push(c),
            Err(e) => report.errors.push(format!("isoperimetric: {e}")),
        }
    }
    let needs_pipeline = [
        CheckKind::NormComparison,
        CheckKind::Pointwise,
        CheckKind::Minimum,
        CheckKind::HardyLittlewood,
    ]
    .iter()
    .any(|&k| config.runs(k));
    if needs_pipeline {
        match Pipeline::run(&d, f, config) {
            Ok(p) => {
                if config.runs(CheckKind::NormComparison) {
                    report.checks.extend(p.norm_checks());
                }
                if config.runs(CheckKind::Pointwise) && f == Source::One {
                    match p.pointwise_checks(config.n_radii) {
                        Ok(c) => report.checks.extend(c),
                        Err(e) => report.errors.push(format!("pointwise: {e}")),
                    }
                }
                if config.runs(CheckKind::Minimum) {
                    report.checks.extend(p.min_checks());
                }
                if config.runs(CheckKind::HardyLittlewood) {
                    let seed = config.seed.wrapping_add(job);
                    report.checks.extend(p.hardy_littlewood_checks(config.hl_subsets, seed));
                }
            }
            Err(e) => report.errors.push(format!("solve: {e}")),
        }
    }
    match fk {
        Some(Ok(fk)) => report.checks.push(fk.check()),
        Some(Err(e)) => report.errors.push(format!("faber_krahn: {e}")),
        None => {}
    }
    log::info!(
        "{name} l={l} beta={beta} f={f}: {} checks, {} failing, {} errors",
        report.checks.len(),
        report.failing().len(),
        report.errors.len()
    );
    report
}

fn failed_report(name: &str, l: f64, beta: f64, h: f64, f: Source, e: Error) -> ComparisonReport {
    let c_l = 2.0 * PI * (l + 2.0);
    ComparisonReport {
        domain: name.to_string(),
        l,
        beta,
        h,
        source: Some(f.to_string()),
        checks: Vec::new(),
        constants: Constants { area_l: f64::NAN, r_sharp: f64::NAN, c_l },
        errors: vec![e.to_string()],
    }
}

/// One row of a convergence study on the disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub nodes: usize,
    /// max nodal error of the torsion solution against the closed form
    pub error_max: f64,
    /// weighted `L²` error
    pub error_l2: f64,
    pub lambda: Option<f64>,
    /// observed order of `error_l2` against the previous row
    pub order: Option<f64>,
    /// observed order of `error_max` against the previous row
    pub order_max: Option<f64>,
}

/// Torsion (`f = 1`) on `domain` against the closed form of the disk with
/// equal weighted measure, over `levels` uniformly refined meshes.
pub fn convergence_study(
    domain: &WeightedDomain,
    h: f64,
    levels: usize,
    with_eigen: bool,
) -> Result<Vec<ConvergenceRow>> {
    if levels == 0 {
        return Err(Error::Argument("convergence study needs at least one level".into()));
    }
    let (l, beta) = (domain.l(), domain.beta());
    let disk = symmetrized_disk(weighted_area(domain)?, l, beta)?;
    let one = RearrangementProfile::constant(1.0, disk.weighted_measure);
    let exact = solve_symmetrized_on(&one, &disk, 64)?;
    let mut mesh = Arc::new(triangulate(domain, h)?);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for k in 0..levels {
        if k > 0 {
            mesh = Arc::new(refine(&mesh));
        }
        let system = RobinSystem::new(mesh.clone(), domain)?;
        let u = system.solve(|_| 1.0)?;
        let error_max = mesh
            .nodes
            .iter()
            .zip(&u.values)
            .map(|(p, v)| (v - exact.value_at(p.norm())).abs())
            .fold(0.0, f64::max);
        let err = FemField::new(
            mesh.clone(),
            mesh.nodes.iter().zip(&u.values).map(|(p, v)| v - exact.value_at(p.norm())).collect(),
        )?;
        let error_l2 = err.weighted_lp_norm(2.0, &system.rules);
        let lambda = if with_eigen {
            Some(system.smallest_eigenpair()?.lambda)
        } else {
            None
        };
        let order = rows.last().map(|prev| (prev.error_l2 / error_l2).log2());
        let order_max = rows.last().map(|prev| (prev.error_max / error_max).log2());
        log::info!("h={} nodes={} error_max={error_max:e}", mesh.h, mesh.num_nodes());
        rows.push(ConvergenceRow {
            h: mesh.h,
            nodes: mesh.num_nodes(),
            error_max,
            error_l2,
            lambda,
            order,
            order_max,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;

    #[test]
    fn check_directions() {
        assert!(Check::at_least("a", 1.0, 1.1, 0.2).pass);
        assert!(!Check::at_least("a", 1.0, 1.3, 0.2).pass);
        assert!(Check::at_most("b", 1.1, 1.0, 0.2).pass);
        assert!(!Check::at_most("b", 1.3, 1.0, 0.2).pass);
        assert!(Check::at_most("b", 1.3, 1.0, 0.2).slack() < 0.0);
    }

    #[test]
    fn report_schema() {
        let d = WeightedDomain::from_shape(&Shape::Square, 0.0, 1.0).unwrap();
        let mut r = ComparisonReport::new("square", &d, 0.1).unwrap();
        r.checks.push(Check::at_least("x", 1.0, 0.5, 0.0));
        let json = serde_json::to_value(&r).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        for k in ["domain", "l", "beta", "h", "checks", "constants"] {
            assert!(keys.contains(&k), "missing {k}");
        }
        let check = &json["checks"][0];
        assert_eq!(check.as_object().unwrap().len(), 5);
        assert!(json["constants"]["C_l"].as_f64().unwrap() > 12.56);
        assert!(json.get("errors").is_none());
    }

    #[test]
    fn variable_robin_parameter_is_not_compared() {
        let d = WeightedDomain::from_shape(&Shape::Square, 0.0, 1.0)
            .unwrap()
            .with_beta_fn(Arc::new(|p: crate::point::Point| 1.0 + p.x * p.x))
            .unwrap();
        assert!(matches!(ComparisonReport::new("square", &d, 0.2), Err(Error::Argument(_))));
        assert!(matches!(faber_krahn(&d, 0.3, 256), Err(Error::Argument(_))));
    }

    #[test]
    fn empty_check_list_gives_empty_reports() {
        let d = WeightedDomain::from_shape(&Shape::Square, 0.0, 1.0).unwrap();
        let config = SuiteConfig { kinds: Vec::new(), ls: vec![0.0], betas: vec![1.0], ..Default::default() };
        let reports = full_suite("square", &d, &config);
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.checks.is_empty() && r.all_pass()));
    }

    #[test]
    fn zero_source_norms_vanish() {
        let d = WeightedDomain::from_shape(&Shape::Square, -0.5, 1.0).unwrap();
        let config = SuiteConfig::default().with_h(0.4);
        let r = theorem1_report("square", &d, Source::Zero, &config).unwrap();
        for c in &r.checks {
            assert_eq!(c.lhs, 0.0);
            assert_eq!(c.rhs, 0.0);
            assert!(c.pass);
        }
        let m = min_comparison(&d, Source::Zero, &config).unwrap();
        assert_eq!((m.u_min, m.v_min), (0.0, 0.0));
        assert!(m.pass);
    }
}
