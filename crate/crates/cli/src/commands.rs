use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hm3d::diagnostics::{
    audit_energy_equality, audit_enstrophy_inequality, audit_h1_boundedness, audit_identities, AuditCheck,
    AuditReport, DiagnosticsRecord, H1Policy, Recorder, Trajectory,
};
use hm3d::dynamics::{Model, State};
use hm3d::experiments::{self, ConvergenceReport, ConvergenceSetup, DependenceReport};
use hm3d::inequality::{fit_constant, ConstantFit, InequalityKind, InequalityResult};
use hm3d::integrator::Stepper;
use hm3d::profiles::Profile;
use hm3d::spectral::{Domain, Grid};

use crate::checkpoint::{load_checkpoint_for, save_checkpoint};
use crate::config::{parse_config, RunConfig};
use crate::error::{CliError, Result};
use crate::table::{self, float, Table};

/// Successive Galerkin differences must shrink by this factor...
pub const CONVERGENCE_FACTOR: f64 = 10.0;
/// ...unless they are already below this floor.
pub const CONVERGENCE_FLOOR: f64 = 1e-10;
/// Allowed relative spread of the fitted growth rates across amplitudes.
pub const RATE_SPREAD_TOL: f64 = 0.1;
/// Allowed excess of `log(d/d0)` over the fitted line `a·t`.
pub const GROWTH_EXCESS_TOL: f64 = 0.1;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const CHECKPOINT_FILE: &str = "final.ckpt";
pub const AUDIT_FILE: &str = "audit.csv";

pub fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = parse_config(&text, &path.display().to_string())?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn output_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir)
}

fn model_for(cfg: &RunConfig, domain: Domain) -> Model {
    let m = Model::new(domain);
    if cfg.nonlinear {
        m
    } else {
        m.linear_only()
    }
}

/// The configured checkpoint, or the named profile seeded by the campaign seed.
pub fn initial_state(cfg: &RunConfig, domain: &Domain) -> Result<State> {
    match &cfg.checkpoint {
        Some(path) => load_checkpoint_for(path, domain),
        None => Ok(cfg.profile.build(domain, cfg.amplitude, cfg.seed)?),
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub final_state: State,
    pub audit: AuditReport,
    pub max_cfl: f64,
}

/// Steps the configured run, then writes the time series, the final
/// checkpoint and the audit table.
pub fn cmd_run(cfg: &RunConfig, strict: bool) -> Result<RunOutcome> {
    let domain = cfg.domain()?;
    let initial = initial_state(cfg, &domain)?;
    if cfg.t_end < initial.time {
        return Err(CliError::Usage(format!(
            "t_end = {} lies before the initial time {}",
            cfg.t_end, initial.time
        )));
    }
    let mut stepper = Stepper::new(model_for(cfg, domain), cfg.stepper()?)?;
    // dissipation integrals are accumulated every step; only the output is thinned
    let mut recorder = Recorder::new(domain);
    let final_state = stepper.run(&initial, 1, |s| recorder.observe(s))?;
    let trajectory = thin(recorder.into_trajectory(), cfg.cadence)?;

    let dir = output_dir(cfg)?;
    write_timeseries(&trajectory, &dir.join(TIMESERIES_FILE))?;
    save_checkpoint(&final_state, &domain, &dir.join(CHECKPOINT_FILE))?;
    let mut audit = audit_trajectory(&trajectory)?;
    audit.extend(audit_identities(&final_state)?);
    write_audit(&audit, &dir.join(AUDIT_FILE))?;
    if strict && !audit.passed() {
        return Err(audit_failure(&audit));
    }
    Ok(RunOutcome { trajectory, final_state, audit, max_cfl: stepper.max_cfl() })
}

/// Keeps every `cadence`-th record and the last one.
fn thin(traj: Trajectory, cadence: usize) -> Result<Trajectory> {
    let n = traj.len();
    let records = traj
        .records()
        .iter()
        .enumerate()
        .filter(|(i, _)| i % cadence == 0 || i + 1 == n)
        .map(|(_, r)| *r)
        .collect();
    Ok(Trajectory::from_records(*traj.domain(), records)?)
}

fn audit_failure(report: &AuditReport) -> CliError {
    let names: Vec<String> = report
        .failures()
        .map(|c| format!("{} (residual {:.3e} > {:.3e})", c.name, c.max_residual, c.tolerance))
        .collect();
    CliError::AuditFailed(names.join(", "))
}

pub fn audit_trajectory(traj: &Trajectory) -> Result<AuditReport> {
    let mut r = audit_energy_equality(traj)?;
    r.extend(audit_enstrophy_inequality(traj)?);
    r.extend(audit_h1_boundedness(traj, H1Policy::default())?);
    Ok(r)
}

/// Audits a written time series. Writes the audit table into the output
/// directory and fails with the names of the failed checks.
pub fn cmd_audit(cfg: &RunConfig, trajectory: Option<&Path>) -> Result<AuditReport> {
    let path: PathBuf = trajectory.map_or_else(|| cfg.output_dir.join(TIMESERIES_FILE), Path::to_path_buf);
    let traj = read_timeseries(&path)?;
    let report = audit_trajectory(&traj)?;
    write_audit(&report, &output_dir(cfg)?.join(AUDIT_FILE))?;
    if !report.passed() {
        return Err(audit_failure(&report));
    }
    Ok(report)
}

pub fn write_timeseries(traj: &Trajectory, path: &Path) -> Result<()> {
    let d = traj.domain();
    let g = d.grid;
    let mut t = Table::new(table::TIMESERIES)
        .meta("l", float(g.l()))
        .meta("nx", g.nx())
        .meta("ny", g.ny())
        .meta("nz", g.nz())
        .meta("re", float(d.re))
        .meta("eps", float(d.eps))
        .meta("galerkin_radius", d.galerkin_radius.map_or("none".into(), |m| m.to_string()));
    for r in traj.records() {
        t.push(r.to_array().iter().map(|x| float(*x)).collect());
    }
    t.write(path)
}

pub fn read_timeseries(path: &Path) -> Result<Trajectory> {
    let t = Table::read(path, table::TIMESERIES)?;
    let bad = |message: String| CliError::Csv { path: path.to_path_buf(), message };
    let meta = t.meta_map();
    let get = |k: &str| meta.get(k).copied().ok_or_else(|| bad(format!("missing metadata `{k}`")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(format!("bad metadata `{k}`"))) };
    let int = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(format!("bad metadata `{k}`"))) };
    let grid = Grid::new(num("l")?, int("nx")?, int("ny")?, int("nz")?)?;
    let radius = match get("galerkin_radius")? {
        "none" => None,
        m => Some(m.parse().map_err(|_| bad("bad metadata `galerkin_radius`".into()))?),
    };
    let domain = Domain::new(grid, num("re")?, num("eps")?)?.with_galerkin_radius(radius);
    let mut records = Vec::with_capacity(t.rows.len());
    for (i, row) in t.rows.iter().enumerate() {
        let mut a = [0.0; 16];
        for (slot, cell) in a.iter_mut().zip(row) {
            *slot = cell.parse().map_err(|_| bad(format!("row {}: cannot parse `{cell}`", i + 1)))?;
        }
        records.push(DiagnosticsRecord::from_array(a));
    }
    Ok(Trajectory::from_records(domain, records)?)
}

pub fn write_audit(report: &AuditReport, path: &Path) -> Result<()> {
    let mut t = Table::new(table::AUDIT);
    for c in &report.checks {
        t.push(audit_row(c));
    }
    t.write(path)
}

fn audit_row(c: &AuditCheck) -> Vec<String> {
    vec![
        c.name.to_string(),
        float(c.max_residual),
        float(c.tolerance),
        c.passed.to_string(),
        c.worst_time.map_or(String::new(), float),
        c.informational.to_string(),
    ]
}

/// Profiles with entire (analytic) coefficient decay; only these are held to
/// the spectral-decay assertion.
pub fn is_analytic(p: &Profile) -> bool {
    !matches!(p, Profile::RandomSmooth { .. })
}

#[derive(Debug, Clone)]
pub struct ConvergenceOutcome {
    pub report: ConvergenceReport,
    /// `None` when the data are outside the smoothness hypothesis.
    pub decays: Option<bool>,
}

pub fn cmd_convergence(cfg: &RunConfig) -> Result<ConvergenceOutcome> {
    let setup = ConvergenceSetup { l: cfg.l, re: cfg.re, eps: cfg.eps, nonlinear: cfg.nonlinear };
    let report = experiments::galerkin_convergence(setup, &cfg.stepper()?, &cfg.radii, |d| {
        Ok(cfg.profile.build(d, cfg.amplitude, cfg.seed)?)
    })?;
    let mut t = Table::new(table::CONVERGENCE)
        .meta("profile", cfg.profile.to_string().replace(' ', ""))
        .meta("t_end", float(report.t_end));
    for l in &report.levels {
        t.push(vec![l.m.to_string(), l.n.to_string(), float(l.w_diff), float(l.u_diff), float(l.total())]);
    }
    t.write(&output_dir(cfg)?.join("convergence.csv"))?;
    let decays = is_analytic(&cfg.profile).then(|| report.decays(CONVERGENCE_FACTOR, CONVERGENCE_FLOOR));
    if decays == Some(false) {
        return Err(CliError::AuditFailed(format!(
            "galerkin differences do not shrink by {CONVERGENCE_FACTOR}x per doubling: factors {:?}",
            report.reduction_factors()
        )));
    }
    Ok(ConvergenceOutcome { report, decays })
}

pub fn cmd_continuous_dependence(cfg: &RunConfig) -> Result<DependenceReport> {
    let domain = cfg.domain()?;
    let base = initial_state(cfg, &domain)?;
    let direction = cfg.perturbation.build(&domain, 1.0, cfg.seed.wrapping_add(1))?;
    let report = experiments::continuous_dependence(
        &model_for(cfg, domain),
        &cfg.stepper()?,
        &base,
        &direction,
        &cfg.deltas,
        cfg.cadence,
    )?;
    let dir = output_dir(cfg)?;
    let mut series = Table::new(table::DEPENDENCE).meta("perturbation", cfg.perturbation.to_string());
    let mut fits = Table::new(table::DEPENDENCE_FIT);
    for run in &report.runs {
        let d0 = run.distance[0];
        for (t, d) in run.times.iter().zip(&run.distance) {
            let lr = if d0 > 0.0 { (d / d0).ln() } else { 0.0 };
            series.push(vec![float(run.delta), float(*t), float(*d), float(lr)]);
        }
        fits.push(vec![float(run.delta), float(run.rate), float(run.max_excess)]);
    }
    series.write(&dir.join("dependence.csv"))?;
    fits.write(&dir.join("dependence_fit.csv"))?;
    let spread = report.rate_spread();
    let excess = report.max_excess();
    if spread > RATE_SPREAD_TOL || excess > GROWTH_EXCESS_TOL {
        return Err(CliError::AuditFailed(format!(
            "continuous dependence: rate spread {spread:.3e} (limit {RATE_SPREAD_TOL}), \
             excess over a·t {excess:.3e} (limit {GROWTH_EXCESS_TOL})"
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct InequalityOutcome {
    pub results: Vec<InequalityResult>,
    pub fits: Vec<(InequalityKind, ConstantFit)>,
}

pub fn cmd_inequalities(cfg: &RunConfig) -> Result<InequalityOutcome> {
    let sweep = cfg.sweep();
    let mut results = Vec::new();
    let mut fits = Vec::new();
    for &kind in &cfg.inequalities.kinds {
        let r = match kind {
            InequalityKind::Lemma1 => sweep.lemma1()?,
            InequalityKind::Ladyzhenskaya => sweep.ladyzhenskaya(cfg.inequalities.p)?,
            InequalityKind::Agmon1d => sweep.agmon_1d()?,
            InequalityKind::LinftyZ => sweep.linfty_z()?,
            InequalityKind::MixedL4 => sweep.mixed_l4()?,
        };
        fits.push((kind, fit_constant(&r)?));
        results.extend(r);
    }
    let dir = output_dir(cfg)?;
    let mut t = Table::new(table::INEQUALITIES)
        .meta("seed", cfg.seed)
        .meta("l", float(sweep.l))
        .meta("count", sweep.count);
    let mut sample = 0usize;
    let mut last = None;
    for r in &results {
        if last != Some(r.kind) {
            sample = 0;
            last = Some(r.kind);
        }
        t.push(vec![
            r.kind.as_str().into(),
            sample.to_string(),
            float(r.lhs),
            float(r.rhs),
            float(r.ratio),
            r.factors.iter().map(|(n, v)| format!("{n}={}", float(*v))).collect::<Vec<_>>().join(";"),
            r.specs
                .iter()
                .map(|s| {
                    format!(
                        "band={}:{}:{} alpha={} seed={} anisotropy={}",
                        s.band[0],
                        s.band[1],
                        s.band[2],
                        s.alpha,
                        s.seed,
                        s.anisotropy.as_str()
                    )
                })
                .collect::<Vec<_>>()
                .join(";"),
        ]);
        sample += 1;
    }
    t.write(&dir.join("inequalities.csv"))?;
    let mut f = Table::new(table::INEQUALITY_FITS).meta("seed", cfg.seed);
    for (kind, fit) in &fits {
        f.push(vec![
            kind.as_str().into(),
            fit.count.to_string(),
            float(fit.max),
            float(fit.median),
            float(fit.p99),
        ]);
    }
    f.write(&dir.join("inequality_fits.csv"))?;
    Ok(InequalityOutcome { results, fits })
}

/// Resolved configuration plus derived discretization facts.
pub fn cmd_info(cfg: &RunConfig) -> Result<String> {
    let domain = cfg.domain()?;
    let g = domain.grid;
    let active = (0..g.spectral_len()).filter(|&i| domain.is_active(&g.mode_at(i))).count();
    let mut s = cfg.serialize();
    let _ = writeln!(s, "# dealias cutoff |j| <= {:?}", g.dealias_cutoff());
    let _ = writeln!(s, "# carried half-spectrum modes: {active} of {}", g.spectral_len());
    let _ = writeln!(
        s,
        "# build: {}",
        if cfg!(feature = "parallel") { "rayon parallel" } else { "sequential" }
    );
    Ok(s)
}
