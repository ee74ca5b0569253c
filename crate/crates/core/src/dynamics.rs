//! Model state, derived quantities, the full right-hand side and its exact
//! per-mode linearization.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::par;
use crate::spectral::{Domain, Grid, Mode, PhysicalField, SpectralField, Transform};

/// Prognostic pair `(ŵ, ω̂)` at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub w_hat: SpectralField,
    pub omega_hat: SpectralField,
    pub time: f64,
}

impl State {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            w_hat: SpectralField::zeros(grid),
            omega_hat: SpectralField::zeros(grid),
            time: 0.0,
        }
    }

    /// Builds a state, checking grids, Hermitian symmetry and the vorticity
    /// gauge.
    pub fn new(w_hat: SpectralField, omega_hat: SpectralField, time: f64) -> Result<Self> {
        w_hat.ensure_same_grid(&omega_hat)?;
        let s = Self { w_hat, omega_hat, time };
        s.validate()?;
        Ok(s)
    }

    pub fn grid(&self) -> &Grid {
        self.w_hat.grid()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("w", &self.w_hat), ("omega", &self.omega_hat)] {
            if !f.is_finite() {
                return Err(Error::NonFinite { what: name.into(), time: self.time });
            }
            let dev = f.hermitian_deviation();
            let tol = crate::spectral::HERMITIAN_TOL * f.max_abs();
            if dev > tol {
                return Err(Error::NotHermitian { deviation: dev, tolerance: tol });
            }
        }
        // reuse the gauge check of the inverse Laplacian
        self.omega_hat.inv_neg_laplacian_h().map(|_| ())
    }

    pub fn is_finite(&self) -> bool {
        self.w_hat.is_finite() && self.omega_hat.is_finite()
    }

    /// Zeroes `kh2 = 0` vorticity content that is within gauge tolerance.
    pub fn clean_gauge(&mut self) {
        self.omega_hat.retain_modes(|m| !m.is_horizontal_mean());
    }

    /// `self += a * other` on both fields; time is untouched.
    pub fn axpy(&mut self, a: f64, other: &State) {
        self.w_hat.axpy(a, &other.w_hat);
        self.omega_hat.axpy(a, &other.omega_hat);
    }

    pub fn galerkin_project(&self, m: u32) -> State {
        State {
            w_hat: self.w_hat.galerkin_project(m),
            omega_hat: self.omega_hat.galerkin_project(m),
            time: self.time,
        }
    }

    pub fn restrict_to(&mut self, domain: &Domain) {
        self.w_hat.restrict_to(domain);
        self.omega_hat.restrict_to(domain);
    }

    /// `‖w‖₂² + ‖u‖₂²`, twice the energy.
    pub fn energy2(&self) -> f64 {
        let v = self.grid().volume();
        v * (self.w_hat.l2_norm_sq() / v
            + self
                .omega_hat
                .weighted_sum_sq(|m| if m.kh2 > 0.0 { 1.0 / m.kh2 } else { 0.0 }))
    }
}

/// Stream function and horizontal velocity re-derived from a state.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFields {
    pub psi_hat: SpectralField,
    pub u_hat: SpectralField,
    pub v_hat: SpectralField,
}

/// Time derivatives of the prognostic pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub dw_hat: SpectralField,
    pub domega_hat: SpectralField,
}

impl Tendency {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            dw_hat: SpectralField::zeros(grid),
            domega_hat: SpectralField::zeros(grid),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.dw_hat.is_finite() && self.domega_hat.is_finite()
    }
}

/// Largest horizontal speeds over the collocation grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdvectionSpeeds {
    pub max_u: f64,
    pub max_v: f64,
}

impl AdvectionSpeeds {
    /// `max|u| dt/Δx + max|v| dt/Δy`
    pub fn cfl(&self, grid: &Grid, dt: f64) -> f64 {
        let dx = grid.l() / grid.nx() as f64;
        let dy = grid.l() / grid.ny() as f64;
        self.max_u * dt / dx + self.max_v * dt / dy
    }
}

/// Fourier symbol of the linear terms acting on `(ŵ, ω̂)` at one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSymbol {
    pub mode: Mode,
    pub matrix: Mat2,
}

/// `A = [[-kh2/Re, i kz/kh2], [i kz, -kh2/Re - ε² kz²/kh2]]` for `kh2 > 0`,
/// zero on the horizontal-mean modes.
pub fn linear_symbol(mode: &Mode, domain: &Domain) -> LinearSymbol {
    let matrix = if mode.kh2 > 0.0 {
        let visc = -mode.kh2 * domain.inv_re();
        let kz = if mode.nyquist[2] { 0.0 } else { mode.kz };
        Mat2::new(
            Complex64::new(visc, 0.0),
            Complex64::new(0.0, kz / mode.kh2),
            Complex64::new(0.0, kz),
            Complex64::new(visc - domain.eps2() * mode.kz2() / mode.kh2, 0.0),
        )
    } else {
        Mat2::ZERO
    };
    LinearSymbol { mode: *mode, matrix }
}

/// Per-mode share of `‖w‖² + ‖u‖²` (up to the `L²` volume factor):
/// `|ŵ|² + |ω̂|²/kh2`, or `|ŵ|²` on horizontal-mean modes.
pub fn mode_energy(mode: &Mode, w: Complex64, omega: Complex64) -> f64 {
    energy_inner(mode, [w, omega], [w, omega]).re
}

/// Inner product `⟨x, y⟩_E = conj(x₀) y₀ + conj(x₁) y₁ / kh2` that makes the
/// energy a per-mode norm.
pub fn energy_inner(mode: &Mode, x: [Complex64; 2], y: [Complex64; 2]) -> Complex64 {
    let mut s = x[0].conj() * y[0];
    if mode.kh2 > 0.0 {
        s += x[1].conj() * y[1] / mode.kh2;
    }
    s
}

/// Time-dependent body forcing added to both equations.
pub trait Forcing: Send + Sync {
    /// Forcing `(f_w, f_ω)` at time `t` on `grid`.
    fn at(&self, t: f64, grid: &Grid) -> (SpectralField, SpectralField);
}

impl<F> Forcing for F
where
    F: Fn(f64, &Grid) -> (SpectralField, SpectralField) + Send + Sync,
{
    fn at(&self, t: f64, grid: &Grid) -> (SpectralField, SpectralField) {
        self(t, grid)
    }
}

/// The discretized model on one domain.
#[derive(Clone)]
pub struct Model {
    domain: Domain,
    transform: Transform,
    nonlinear: bool,
    forcing: Option<Arc<dyn Forcing>>,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("domain", &self.domain)
            .field("nonlinear", &self.nonlinear)
            .field("forced", &self.forcing.is_some())
            .finish()
    }
}

impl Model {
    pub fn new(domain: Domain) -> Self {
        Self {
            transform: Transform::new(domain.grid),
            domain,
            nonlinear: true,
            forcing: None,
        }
    }

    /// Drops the advection terms, leaving the linear system.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn with_galerkin_radius(mut self, m: Option<u32>) -> Self {
        self.domain = self.domain.with_galerkin_radius(m);
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn grid(&self) -> &Grid {
        &self.domain.grid
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn is_nonlinear(&self) -> bool {
        self.nonlinear
    }

    fn check_grid(&self, state: &State) -> Result<()> {
        if *state.grid() != self.domain.grid {
            return Err(Error::SizeMismatch {
                expected: format!("{:?}", self.domain.grid),
                found: format!("{:?}", state.grid()),
            });
        }
        Ok(())
    }

    /// Projects a state onto the modes this model carries.
    pub fn project(&self, state: &mut State) {
        state.restrict_to(&self.domain);
    }

    pub fn derive(&self, state: &State) -> Result<DerivedFields> {
        self.check_grid(state)?;
        let psi_hat = state.omega_hat.inv_neg_laplacian_h()?;
        let (u_hat, v_hat) = psi_hat.velocity_from_psi();
        Ok(DerivedFields { psi_hat, u_hat, v_hat })
    }

    /// Full tendency `(dŵ/dt, dω̂/dt)`.
    pub fn rhs(&self, state: &State) -> Result<Tendency> {
        let (mut tend, _) = self.nonlinear_terms(state)?;
        let lin = self.linear_terms(state);
        tend.dw_hat.axpy(1.0, &lin.dw_hat);
        tend.domega_hat.axpy(1.0, &lin.domega_hat);
        if !tend.is_finite() {
            return Err(Error::NonFinite { what: "tendency".into(), time: state.time });
        }
        Ok(tend)
    }

    /// `A X` per mode.
    pub fn linear_terms(&self, state: &State) -> Tendency {
        let g = *self.grid();
        let nxh = g.nxh();
        let mut dw = state.w_hat.clone();
        let mut dom = state.omega_hat.clone();
        let domain = self.domain;
        par::for_each_chunk_pair(
            dw.coeffs_mut(),
            g.spectral_plane(),
            dom.coeffs_mut(),
            g.spectral_plane(),
            |iz, pw, po| {
                for iy in 0..g.ny() {
                    for ix in 0..nxh {
                        let i = iy * nxh + ix;
                        let a = linear_symbol(&g.mode(ix, iy, iz), &domain).matrix;
                        let [x, y] = a.apply([pw[i], po[i]]);
                        pw[i] = x;
                        po[i] = y;
                    }
                }
            },
        );
        Tendency { dw_hat: dw, domega_hat: dom }
    }

    /// Everything except the linear symbol: `-P(u·∇h w)`, `-P(u·∇h ω)` and the
    /// forcing, masked to the carried modes. Also returns the grid maxima of
    /// the horizontal velocity for CFL control.
    pub fn nonlinear_terms(&self, state: &State) -> Result<(Tendency, AdvectionSpeeds)> {
        self.check_grid(state)?;
        let g = *self.grid();
        let mut out = Tendency::zeros(g);
        let mut speeds = AdvectionSpeeds::default();

        if self.nonlinear {
            let w = state.w_hat.dealias_truncate();
            let om = state.omega_hat.dealias_truncate();
            let psi = om.inv_neg_laplacian_h_unchecked();
            let (u, v) = psi.velocity_from_psi();
            let t = &self.transform;
            let inv = |f: &SpectralField| t.inverse_unchecked(f);
            let (pu, pv) = (inv(&u), inv(&v));
            speeds = AdvectionSpeeds { max_u: pu.max_abs(), max_v: pv.max_abs() };
            let adv_w = advect(&pu, &pv, &inv(&w.d_dx()), &inv(&w.d_dy()));
            let adv_o = advect(&pu, &pv, &inv(&om.d_dx()), &inv(&om.d_dy()));
            out.dw_hat = t.forward(&adv_w)?;
            out.domega_hat = t.forward(&adv_o)?;
            out.dw_hat.scale(-1.0);
            out.domega_hat.scale(-1.0);
        }
        if let Some(f) = &self.forcing {
            let (fw, fo) = f.at(state.time, &g);
            out.dw_hat.axpy(1.0, &fw);
            out.domega_hat.axpy(1.0, &fo);
        }
        let domain = self.domain;
        out.dw_hat.retain_modes(|m| domain.is_active(m));
        out.domega_hat.retain_modes(|m| domain.is_active(m) && !m.is_horizontal_mean());
        if !out.is_finite() || !(speeds.max_u.is_finite() && speeds.max_v.is_finite()) {
            return Err(Error::NonFinite { what: "nonlinear terms".into(), time: state.time });
        }
        Ok((out, speeds))
    }

    /// Pseudo-spectral `u·∇h f` for a stream function and a scalar, dealiased.
    pub fn advection(&self, psi: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
        let t = &self.transform;
        let psi = psi.dealias_truncate();
        let f = f.dealias_truncate();
        let (u, v) = psi.velocity_from_psi();
        let adv = advect(
            &t.inverse(&u)?,
            &t.inverse(&v)?,
            &t.inverse(&f.d_dx())?,
            &t.inverse(&f.d_dy())?,
        );
        let mut out = t.forward(&adv)?;
        out.dealias_in_place();
        Ok(out)
    }
}

/// `u fx + v fy` pointwise.
fn advect(u: &PhysicalField, v: &PhysicalField, fx: &PhysicalField, fy: &PhysicalField) -> PhysicalField {
    let mut out = PhysicalField::zeros(*u.grid());
    let plane = u.grid().nx() * u.grid().ny();
    let (u, v, fx, fy) = (u.values(), v.values(), fx.values(), fy.values());
    par::for_each_chunk(out.values_mut(), plane, |k, dst| {
        let off = k * plane;
        for (i, d) in dst.iter_mut().enumerate() {
            let p = off + i;
            *d = u[p] * fx[p] + v[p] * fy[p];
        }
    });
    out
}
