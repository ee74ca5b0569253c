//! Galerkin self-convergence and continuous dependence on initial data.

use crate::dynamics::{Model, State};
use crate::error::{Error, Result};
use crate::integrator::{Stepper, StepperConfig};
use crate::spectral::{Domain, Grid};

/// Smallest even grid size whose dealiased box contains the ball of radius `m`.
pub fn grid_size_for_radius(m: u32) -> usize {
    let n = 3 * m as usize + 1;
    n + n % 2
}

/// `(‖w_a − w_b‖₂, ‖u_a − u_b‖₂)` for states on the same grid.
pub fn difference_norms(a: &State, b: &State) -> Result<(f64, f64)> {
    a.w_hat.ensure_same_grid(&b.w_hat)?;
    let mut d = a.clone();
    d.axpy(-1.0, b);
    let v = d.grid().volume();
    let w = d.w_hat.l2_norm_sq();
    let u = v * d.omega_hat.weighted_sum_sq(|m| if m.kh2 > 0.0 { 1.0 / m.kh2 } else { 0.0 });
    Ok((w.max(0.0).sqrt(), u.max(0.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceSetup {
    pub l: f64,
    pub re: f64,
    pub eps: f64,
    pub nonlinear: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLevel {
    pub m: u32,
    pub n: usize,
    /// `‖w_m − w_{2m}‖₂`
    pub w_diff: f64,
    /// `‖u_m − u_{2m}‖₂`
    pub u_diff: f64,
}

impl ConvergenceLevel {
    pub fn total(&self) -> f64 {
        self.w_diff.hypot(self.u_diff)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub t_end: f64,
    pub levels: Vec<ConvergenceLevel>,
}

impl ConvergenceReport {
    /// Ratios `total(m) / total(2m)` between successive levels.
    pub fn reduction_factors(&self) -> Vec<f64> {
        self.levels.windows(2).map(|p| p[0].total() / p[1].total()).collect()
    }

    /// Each level improves on the previous one by at least `factor`, unless
    /// it is already below `floor`.
    pub fn decays(&self, factor: f64, floor: f64) -> bool {
        self.levels.windows(2).all(|p| {
            let (a, b) = (p[0].total(), p[1].total());
            b <= floor || b * factor <= a
        })
    }
}

/// Runs the same initial data truncated at each radius of the doubling chain
/// `radii` (e.g. `[4, 8, 16]`), each on the smallest grid that carries its
/// ball, and reports the differences between consecutive radii at
/// `config.t_end`. `initial` builds the data on the grid it is handed; it is
/// called once, on the finest grid, and the result is resampled down.
pub fn galerkin_convergence(
    setup: ConvergenceSetup,
    config: &StepperConfig,
    radii: &[u32],
    initial: impl Fn(&Domain) -> Result<State>,
) -> Result<ConvergenceReport> {
    if radii.len() < 2 || radii[0] == 0 || radii.windows(2).any(|p| p[1] != 2 * p[0]) {
        return Err(Error::InvalidArgument(format!(
            "radii must be a doubling chain of at least two positive values, got {radii:?}"
        )));
    }
    let domain_for = |m: u32| -> Result<Domain> {
        let grid = Grid::cube(setup.l, grid_size_for_radius(m))?;
        Ok(Domain::new(grid, setup.re, setup.eps)?.with_galerkin_radius(Some(m)))
    };
    let x0 = initial(&domain_for(*radii.last().unwrap())?)?;

    let mut finals = Vec::with_capacity(radii.len());
    for &m in radii {
        let domain = domain_for(m)?;
        let start = State {
            w_hat: x0.w_hat.resample(domain.grid)?,
            omega_hat: x0.omega_hat.resample(domain.grid)?,
            time: x0.time,
        };
        let mut model = Model::new(domain);
        if !setup.nonlinear {
            model = model.linear_only();
        }
        let mut cfg = *config;
        cfg.galerkin_radius = Some(m);
        let mut stepper = Stepper::new(model, cfg)?;
        finals.push(stepper.run(&start, usize::MAX, |_| Ok(()))?);
    }

    let mut levels = Vec::with_capacity(radii.len() - 1);
    for (i, pair) in finals.windows(2).enumerate() {
        let (coarse, fine) = (&pair[0], &pair[1]);
        let lifted = State {
            w_hat: coarse.w_hat.resample(*fine.grid())?,
            omega_hat: coarse.omega_hat.resample(*fine.grid())?,
            time: coarse.time,
        };
        let (w_diff, u_diff) = difference_norms(&lifted, fine)?;
        let m = radii[i];
        levels.push(ConvergenceLevel { m, n: grid_size_for_radius(m), w_diff, u_diff });
    }
    Ok(ConvergenceReport { t_end: config.t_end, levels })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceRun {
    pub delta: f64,
    pub times: Vec<f64>,
    /// `d(t) = ‖w₁ − w₂‖₂² + ‖u₁ − u₂‖₂²`
    pub distance: Vec<f64>,
    /// Least-squares slope of `log(d(t)/d(0))` against `t`, through the origin.
    pub rate: f64,
    /// `max_t [log(d(t)/d(0)) − rate·t]`.
    pub max_excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    pub runs: Vec<DependenceRun>,
}

impl DependenceReport {
    /// `(max − min) / max|rate|` over the runs with a nonzero initial distance.
    pub fn rate_spread(&self) -> f64 {
        let rates: Vec<f64> = self.runs.iter().filter(|r| r.distance[0] > 0.0).map(|r| r.rate).collect();
        if rates.len() < 2 {
            return 0.0;
        }
        let hi = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        let scale = rates.iter().map(|r| r.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            (hi - lo) / scale
        }
    }

    pub fn max_excess(&self) -> f64 {
        self.runs.iter().map(|r| r.max_excess).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_rate(&self) -> f64 {
        self.runs.iter().map(|r| r.rate).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Slope of the least-squares line through the origin and its largest
/// upward deviation. Returns `(0, 0)` for an identically zero distance.
pub fn fit_growth(times: &[f64], distance: &[f64]) -> Result<(f64, f64)> {
    if times.len() != distance.len() || times.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let d0 = distance[0];
    if d0 == 0.0 {
        if distance.iter().all(|&d| d == 0.0) {
            return Ok((0.0, 0.0));
        }
        return Err(Error::InvalidArgument("initial distance is zero".into()));
    }
    let t0 = times[0];
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(distance)
        .map(|(&t, &d)| (t - t0, (d / d0).ln()))
        .collect();
    if pts.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::Inconsistent("distance left the representable range".into()));
    }
    let stt: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sty: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let rate = if stt > 0.0 { sty / stt } else { 0.0 };
    let excess = pts.iter().map(|&(t, y)| y - rate * t).fold(f64::NEG_INFINITY, f64::max);
    Ok((rate, excess))
}

/// Evolves `base` and `base + δ·s·direction` for each `δ`, where `s` scales
/// `direction` to the energy norm of `base` (to unit norm when `base` is
/// zero). Samples the distance every `cadence` steps.
pub fn continuous_dependence(
    model: &Model,
    config: &StepperConfig,
    base: &State,
    direction: &State,
    deltas: &[f64],
    cadence: usize,
) -> Result<DependenceReport> {
    let dn = direction.energy2().sqrt();
    if dn == 0.0 {
        return Err(Error::InvalidArgument("perturbation direction is zero".into()));
    }
    let bn = base.energy2().sqrt();
    let unit = if bn > 0.0 { bn / dn } else { 1.0 / dn };

    let mut reference = Vec::new();
    Stepper::new(model.clone(), *config)?.run(base, cadence, |s| {
        reference.push(s.clone());
        Ok(())
    })?;

    let mut runs = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut start = base.clone();
        start.axpy(delta * unit, direction);
        let mut times = Vec::with_capacity(reference.len());
        let mut distance = Vec::with_capacity(reference.len());
        let mut k = 0;
        Stepper::new(model.clone(), *config)?.run(&start, cadence, |s| {
            let r = &reference[k];
            let (w, u) = difference_norms(s, r)?;
            times.push(s.time);
            distance.push(w * w + u * u);
            k += 1;
            Ok(())
        })?;
        let (rate, max_excess) = fit_growth(&times, &distance)?;
        runs.push(DependenceRun { delta, times, distance, rate, max_excess });
    }
    Ok(DependenceReport { runs })
}
