//! Fixed-step time integration of the (optionally Galerkin-truncated) system.
//!
//! The default scheme is an integrating-factor RK4 (Lawson) that propagates
//! the per-mode linear coupling exactly through precomputed 2×2 matrix
//! exponentials. A second-order IMEX Crank-Nicolson/Adams-Bashforth scheme is
//! available for comparison.

use std::fmt;
use std::str::FromStr;

use crate::dynamics::{linear_symbol, AdvectionSpeeds, Model, State, Tendency};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::par;
use crate::spectral::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    IfRk4,
    ImexCnab2,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::IfRk4 => 4,
            Scheme::ImexCnab2 => 2,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::IfRk4 => "if-rk4",
            Scheme::ImexCnab2 => "imex-cnab2",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "if-rk4" | "ifrk4" => Ok(Scheme::IfRk4),
            "imex-cnab2" | "cnab2" => Ok(Scheme::ImexCnab2),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub cfl_target: f64,
    pub t_end: f64,
    pub galerkin_radius: Option<u32>,
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let c = Self { dt, scheme: Scheme::IfRk4, cfl_target: 0.5, t_end, galerkin_radius: None };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.cfl_target > 0.0 && self.cfl_target <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cfl_target must lie in (0, 1], got {}",
                self.cfl_target
            )));
        }
        if !self.t_end.is_finite() {
            return Err(Error::InvalidArgument("t_end must be finite".into()));
        }
        Ok(())
    }
}

/// Per-mode `exp(A dt)` and `exp(A dt/2)` in spectral storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTable {
    dt: f64,
    full: Vec<Mat2>,
    half: Vec<Mat2>,
}

impl ExpTable {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn full(&self) -> &[Mat2] {
        &self.full
    }

    pub fn half(&self) -> &[Mat2] {
        &self.half
    }
}

fn per_mode(domain: &Domain, f: impl Fn(Mat2) -> (Mat2, Mat2) + Sync + Send) -> (Vec<Mat2>, Vec<Mat2>) {
    let g = domain.grid;
    par::map_range(g.spectral_len(), |idx| f(linear_symbol(&g.mode_at(idx), domain).matrix))
        .into_iter()
        .unzip()
}

pub fn build_exp_table(domain: &Domain, dt: f64) -> Result<ExpTable> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let (full, half) = per_mode(domain, |a| (a.scale_re(dt).expm(), a.scale_re(0.5 * dt).expm()));
    Ok(ExpTable { dt, full, half })
}

/// `(I - dt/2 A)⁻¹` and `I + dt/2 A` per mode.
#[derive(Debug, Clone, PartialEq)]
struct CnTable {
    dt: f64,
    implicit: Vec<Mat2>,
    explicit: Vec<Mat2>,
}

fn build_cn_table(domain: &Domain, dt: f64) -> CnTable {
    let (implicit, explicit) = per_mode(domain, |a| {
        let h = a.scale_re(0.5 * dt);
        // I - h has eigenvalues with real part >= 1, so it is invertible
        let inv = (Mat2::IDENTITY - h).inverse().unwrap_or(Mat2::IDENTITY);
        (inv, Mat2::IDENTITY + h)
    });
    CnTable { dt, implicit, explicit }
}

/// `M X` per mode.
fn apply(mats: &[Mat2], x: &State) -> State {
    let mut out = x.clone();
    let plane = x.grid().spectral_plane();
    par::for_each_chunk_pair(
        out.w_hat.coeffs_mut(),
        plane,
        out.omega_hat.coeffs_mut(),
        plane,
        |iz, pw, po| {
            let off = iz * plane;
            for i in 0..pw.len() {
                let [a, b] = mats[off + i].apply([pw[i], po[i]]);
                pw[i] = a;
                po[i] = b;
            }
        },
    );
    out
}

fn to_state(t: Tendency, time: f64) -> State {
    State { w_hat: t.dw_hat, omega_hat: t.domega_hat, time }
}

fn lin(a: f64, x: &State, b: f64, y: &State, time: f64) -> State {
    let mut out = x.clone();
    if a != 1.0 {
        out.w_hat.scale(a);
        out.omega_hat.scale(a);
    }
    out.axpy(b, y);
    out.time = time;
    out
}

fn check_cfl(speeds: &AdvectionSpeeds, model: &Model, dt: f64, target: f64, time: f64) -> Result<f64> {
    let cfl = speeds.cfl(model.grid(), dt);
    if cfl > target {
        return Err(Error::Cfl { measured: cfl, target, time });
    }
    Ok(cfl)
}

fn finish(mut x: State, time: f64) -> Result<State> {
    x.time = time;
    if !x.is_finite() {
        return Err(Error::NonFinite { what: "state".into(), time });
    }
    x.clean_gauge();
    Ok(x)
}

/// One Lawson IF-RK4 step of size `table.dt()`. Returns the new state and the
/// CFL number measured at the start of the step.
pub fn step(model: &Model, state: &State, config: &StepperConfig, table: &ExpTable) -> Result<(State, f64)> {
    let dt = table.dt;
    let t = state.time;
    let (k1, speeds) = model.nonlinear_terms(state)?;
    let cfl = check_cfl(&speeds, model, dt, config.cfl_target, t)?;
    let k1 = to_state(k1, t);

    let ex = apply(&table.half, state);
    let a = lin(1.0, &ex, 0.5 * dt, &apply(&table.half, &k1), t + 0.5 * dt);
    let k2 = to_state(model.nonlinear_terms(&a)?.0, t);
    let b = lin(1.0, &ex, 0.5 * dt, &k2, t + 0.5 * dt);
    let k3 = to_state(model.nonlinear_terms(&b)?.0, t);
    let c = lin(1.0, &apply(&table.full, state), dt, &apply(&table.half, &k3), t + dt);
    let k4 = to_state(model.nonlinear_terms(&c)?.0, t);

    // E X + dt/6 (E k1 + 2 E_h (k2 + k3) + k4)
    let mut acc = lin(1.0, &k2, 1.0, &k3, t);
    acc = apply(&table.half, &acc);
    let mut out = apply(&table.full, &lin(1.0, state, dt / 6.0, &k1, t));
    out.axpy(dt / 3.0, &acc);
    out.axpy(dt / 6.0, &k4);
    Ok((finish(out, t + dt)?, cfl))
}

enum Propagator {
    Exp(ExpTable),
    Cn(CnTable),
}

impl Propagator {
    fn build(scheme: Scheme, domain: &Domain, dt: f64) -> Result<Self> {
        Ok(match scheme {
            Scheme::IfRk4 => Propagator::Exp(build_exp_table(domain, dt)?),
            Scheme::ImexCnab2 => Propagator::Cn(build_cn_table(domain, dt)),
        })
    }

    fn dt(&self) -> f64 {
        match self {
            Propagator::Exp(t) => t.dt,
            Propagator::Cn(t) => t.dt,
        }
    }
}

/// Drives a model with a fixed configuration, holding the propagator tables
/// and multistep history.
pub struct Stepper {
    model: Model,
    config: StepperConfig,
    table: Propagator,
    /// Nonlinear tendency and step size of the previous CNAB2 step.
    history: Option<(State, f64)>,
    max_cfl: f64,
}

impl fmt::Debug for Stepper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stepper")
            .field("model", &self.model)
            .field("config", &self.config)
            .field("max_cfl", &self.max_cfl)
            .finish()
    }
}

impl Stepper {
    /// The model's domain picks up `config.galerkin_radius` when set.
    pub fn new(model: Model, config: StepperConfig) -> Result<Self> {
        config.validate()?;
        let model = match config.galerkin_radius {
            Some(m) => model.with_galerkin_radius(Some(m)),
            None => model,
        };
        let table = Propagator::build(config.scheme, model.domain(), config.dt)?;
        Ok(Self { model, config, table, history: None, max_cfl: 0.0 })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    /// Largest CFL number seen so far.
    pub fn max_cfl(&self) -> f64 {
        self.max_cfl
    }

    /// Forgets multistep history, e.g. before reusing the stepper on a new
    /// initial condition.
    pub fn reset(&mut self) {
        self.history = None;
        self.max_cfl = 0.0;
    }

    /// Advances by `dt`, rebuilding the tables when `dt` differs from the
    /// cached one.
    pub fn step_by(&mut self, state: &State, dt: f64) -> Result<State> {
        if dt != self.table.dt() {
            self.table = Propagator::build(self.config.scheme, self.model.domain(), dt)?;
        }
        let (next, cfl) = match &self.table {
            Propagator::Exp(t) => step(&self.model, state, &self.config, t)?,
            Propagator::Cn(t) => {
                let (n0, speeds) = self.model.nonlinear_terms(state)?;
                let cfl = check_cfl(&speeds, &self.model, dt, self.config.cfl_target, state.time)?;
                let n0 = to_state(n0, state.time);
                let ab = match &self.history {
                    Some((n1, dt_prev)) => {
                        let r = dt / dt_prev;
                        lin(1.0 + 0.5 * r, &n0, -0.5 * r, n1, state.time)
                    }
                    None => n0.clone(),
                };
                let mut rhs = apply(&t.explicit, state);
                rhs.axpy(dt, &ab);
                let next = finish(apply(&t.implicit, &rhs), state.time + dt)?;
                self.history = Some((n0, dt));
                (next, cfl)
            }
        };
        self.max_cfl = self.max_cfl.max(cfl);
        Ok(next)
    }

    pub fn step(&mut self, state: &State) -> Result<State> {
        let dt = self.config.dt;
        self.step_by(state, dt)
    }

    /// Projects `initial` onto the carried modes, then steps to `t_end`.
    /// `observe` sees the initial state, every `cadence`-th state and the
    /// final state. The last step is shortened to land on `t_end`.
    pub fn run(
        &mut self,
        initial: &State,
        cadence: usize,
        mut observe: impl FnMut(&State) -> Result<()>,
    ) -> Result<State> {
        let cadence = cadence.max(1);
        let dt = self.config.dt;
        let t0 = initial.time;
        let t_end = self.config.t_end;
        let mut x = initial.clone();
        self.model.project(&mut x);
        x.clean_gauge();
        observe(&x)?;
        let mut k = 0usize;
        loop {
            let remaining = t_end - x.time;
            if remaining <= 1e-9 * dt {
                break;
            }
            let full = remaining >= dt * (1.0 - 1e-9);
            let h = if full { dt } else { remaining };
            x = self.step_by(&x, h)?;
            k += 1;
            // avoid drift from repeated addition
            x.time = if full { t0 + k as f64 * dt } else { t_end };
            if x.time > t_end {
                x.time = t_end;
            }
            let last = t_end - x.time <= 1e-9 * dt;
            if k % cadence == 0 || last {
                observe(&x)?;
            }
        }
        Ok(x)
    }
}
