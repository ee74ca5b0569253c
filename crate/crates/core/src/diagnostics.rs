//! Norms of a state, trajectories of them, and audits of the energy
//! equality, the enstrophy inequality, uniform H¹ bounds and the advection
//! identities.

use num_complex::Complex64;

use crate::dynamics::{linear_symbol, State};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::par;
use crate::spectral::{Domain, Grid, PhysicalField, SpectralField, Transform};

/// Norms of one state (not squared) and cumulative dissipation integrals.
/// Field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub w_l2: f64,
    pub u_l2: f64,
    pub grad_w: f64,
    pub grad_u: f64,
    pub psi_z: f64,
    pub omega: f64,
    pub grad_omega: f64,
    pub u_z: f64,
    pub w_z: f64,
    pub grad_w_z: f64,
    pub omega_z: f64,
    pub psi_zz: f64,
    pub lap_w: f64,
    /// `∫₀ᵗ (1/Re)(‖∇_h w‖² + ‖∇_h u‖²)`
    pub d_visc: f64,
    /// `∫₀ᵗ ε²‖ψ_z‖²`
    pub d_eps: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 16] = [
        "t", "w_l2", "u_l2", "grad_w", "grad_u", "psi_z", "omega", "grad_omega", "u_z", "w_z",
        "grad_w_z", "omega_z", "psi_zz", "lap_w", "d_visc", "d_eps",
    ];

    pub fn to_array(&self) -> [f64; 16] {
        [
            self.t, self.w_l2, self.u_l2, self.grad_w, self.grad_u, self.psi_z, self.omega,
            self.grad_omega, self.u_z, self.w_z, self.grad_w_z, self.omega_z, self.psi_zz,
            self.lap_w, self.d_visc, self.d_eps,
        ]
    }

    pub fn from_array(a: [f64; 16]) -> Self {
        Self {
            t: a[0],
            w_l2: a[1],
            u_l2: a[2],
            grad_w: a[3],
            grad_u: a[4],
            psi_z: a[5],
            omega: a[6],
            grad_omega: a[7],
            u_z: a[8],
            w_z: a[9],
            grad_w_z: a[10],
            omega_z: a[11],
            psi_zz: a[12],
            lap_w: a[13],
            d_visc: a[14],
            d_eps: a[15],
        }
    }

    /// `½(‖w‖² + ‖u‖²)`
    pub fn energy(&self) -> f64 {
        0.5 * (self.w_l2 * self.w_l2 + self.u_l2 * self.u_l2)
    }

    pub fn visc_rate(&self, domain: &Domain) -> f64 {
        domain.inv_re() * (self.grad_w * self.grad_w + self.grad_u * self.grad_u)
    }

    pub fn eps_rate(&self, domain: &Domain) -> f64 {
        domain.eps2() * self.psi_z * self.psi_z
    }

    /// `‖u‖²_{H¹} + ‖w‖²_{H¹}` with `‖f‖²_{H¹} = ‖f‖² + ‖∇_h f‖² + ‖f_z‖²`.
    pub fn h1_sq(&self) -> f64 {
        [self.w_l2, self.grad_w, self.w_z, self.u_l2, self.grad_u, self.u_z]
            .iter()
            .map(|v| v * v)
            .sum()
    }

    pub fn is_valid(&self) -> bool {
        self.to_array()[1..].iter().all(|v| v.is_finite() && *v >= 0.0) && self.t.is_finite()
    }
}

/// Spectrally exact norms of `state`; the dissipation integrals are left at
/// zero (see [`Trajectory::push`]).
pub fn record(state: &State) -> DiagnosticsRecord {
    let g = *state.grid();
    let nxh = g.nxh();
    let plane = g.spectral_plane();
    let (w, om) = (state.w_hat.coeffs(), state.omega_hat.coeffs());
    let planes = par::map_range(g.nz(), |iz| {
        let mut s = [0.0f64; 13];
        for iy in 0..g.ny() {
            for ix in 0..nxh {
                let i = iz * plane + iy * nxh + ix;
                let (a, b) = (w[i].norm_sqr(), om[i].norm_sqr());
                if a == 0.0 && b == 0.0 {
                    continue;
                }
                let m = g.mode(ix, iy, iz);
                let (q, p, wt) = (m.kh2, m.kz2(), g.weight(ix));
                let bq = if q > 0.0 { b / q } else { 0.0 };
                let terms = [
                    a,
                    bq,
                    q * a,
                    b,
                    p * bq / q.max(f64::MIN_POSITIVE),
                    b,
                    q * b,
                    p * bq,
                    p * a,
                    q * p * a,
                    p * b,
                    p * p * bq / q.max(f64::MIN_POSITIVE),
                    q * q * a,
                ];
                for (acc, t) in s.iter_mut().zip(terms) {
                    *acc += wt * t;
                }
            }
        }
        s
    });
    let mut s = [0.0f64; 13];
    for p in planes {
        for (acc, v) in s.iter_mut().zip(p) {
            *acc += v;
        }
    }
    let n = |v: f64| (g.volume() * v).sqrt();
    DiagnosticsRecord {
        t: state.time,
        w_l2: n(s[0]),
        u_l2: n(s[1]),
        grad_w: n(s[2]),
        grad_u: n(s[3]),
        psi_z: n(s[4]),
        omega: n(s[5]),
        grad_omega: n(s[6]),
        u_z: n(s[7]),
        w_z: n(s[8]),
        grad_w_z: n(s[9]),
        omega_z: n(s[10]),
        psi_zz: n(s[11]),
        lap_w: n(s[12]),
        d_visc: 0.0,
        d_eps: 0.0,
    }
}

/// Time-ordered diagnostics of one run with trapezoid-accumulated
/// dissipation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    domain: Domain,
    records: Vec<DiagnosticsRecord>,
}

impl Trajectory {
    pub fn new(domain: Domain) -> Self {
        Self { domain, records: Vec::new() }
    }

    /// Wraps records as read back from storage, keeping their integrals.
    pub fn from_records(domain: Domain, records: Vec<DiagnosticsRecord>) -> Result<Self> {
        if let Some(w) = records.windows(2).find(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidArgument(format!(
                "trajectory times not increasing at t = {}",
                w[1].t
            )));
        }
        Ok(Self { domain, records })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends a record, filling `d_visc` and `d_eps` by the trapezoid rule.
    pub fn push(&mut self, mut r: DiagnosticsRecord) -> Result<()> {
        match self.records.last() {
            Some(prev) => {
                if !(r.t > prev.t) {
                    return Err(Error::InvalidArgument(format!(
                        "record time {} does not follow {}",
                        r.t, prev.t
                    )));
                }
                let h = 0.5 * (r.t - prev.t);
                let d = &self.domain;
                r.d_visc = prev.d_visc + h * (prev.visc_rate(d) + r.visc_rate(d));
                r.d_eps = prev.d_eps + h * (prev.eps_rate(d) + r.eps_rate(d));
            }
            None => {
                r.d_visc = 0.0;
                r.d_eps = 0.0;
            }
        }
        self.records.push(r);
        Ok(())
    }

    pub fn push_state(&mut self, state: &State) -> Result<()> {
        self.push(record(state))
    }
}

/// 8-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Per-mode weights for integrating the two dissipation rates over an
/// interval of length `h`.
///
/// Between samples `X₀` and `X₁` each mode is modelled as
/// `X(s) = e^{As} X₀ + (s/h) R` with `R = X₁ − e^{Ah} X₀`, which is exact
/// for the linear flow and interpolates only the response to advection.
/// With the viscous and vertical rate forms `G`, the integral of `XᴴGX` is
/// `X₀ᴴ W₀ X₀ + 2 Re(X₀ᴴ W₁ R) + (h/3) RᴴGR` where
/// `W₀ = ∫ e^{Aᴴs} G e^{As} ds` and `W₁ = ∫ (s/h) e^{Aᴴs} G ds`, both
/// evaluated once by composite Gauss-Legendre quadrature.
///
/// Unlike the trapezoid rule this stays accurate when `h` exceeds the decay
/// time of strongly damped modes.
#[derive(Debug, Clone)]
pub struct DissipationQuadrature {
    h: f64,
    modes: Vec<ModeWeights>,
}

#[derive(Debug, Clone, Copy)]
struct ModeWeights {
    exp: Mat2,
    w0: [Mat2; 2],
    w1: [Mat2; 2],
    /// Diagonals of the viscous and vertical rate forms.
    g: [[f64; 2]; 2],
}

impl DissipationQuadrature {
    pub fn new(domain: &Domain, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("interval must be positive, got {h}")));
        }
        let g = domain.grid;
        let modes = par::map_range(g.spectral_len(), |idx| {
            let m = g.mode_at(idx);
            let forms = if m.kh2 > 0.0 && domain.is_active(&m) {
                [
                    [m.kh2 * domain.inv_re(), domain.inv_re()],
                    [0.0, domain.eps2() * m.kz2() / (m.kh2 * m.kh2)],
                ]
            } else {
                [[0.0; 2]; 2]
            };
            let a = linear_symbol(&m, domain).matrix;
            let mut w0 = [Mat2::ZERO; 2];
            let mut w1 = [Mat2::ZERO; 2];
            if forms.iter().flatten().any(|v| *v != 0.0) {
                let pieces = ((a.norm_inf() * h / 0.5).ceil() as usize).max(1);
                let p = h / pieces as f64;
                let step = a.scale_re(p).expm();
                let nodes: Vec<(f64, f64, Mat2)> = GL_NODES
                    .iter()
                    .zip(GL_WEIGHTS)
                    .map(|(x, wt)| {
                        let s = 0.5 * p * (x + 1.0);
                        (s, 0.5 * p * wt, a.scale_re(s).expm())
                    })
                    .collect();
                let mut shift = Mat2::IDENTITY;
                for k in 0..pieces {
                    for &(s, wt, e) in &nodes {
                        let m = e * shift;
                        let mh = m.adjoint();
                        let frac = (k as f64 * p + s) / h;
                        for (f, diag) in forms.iter().enumerate() {
                            let gm = Mat2::diag(Complex64::new(diag[0], 0.0), Complex64::new(diag[1], 0.0));
                            w0[f] = w0[f] + (mh * gm * m).scale_re(wt);
                            w1[f] = w1[f] + (mh * gm).scale_re(wt * frac);
                        }
                    }
                    shift = step * shift;
                }
            }
            ModeWeights { exp: a.scale_re(h).expm(), w0, w1, g: forms }
        });
        Ok(Self { h, modes })
    }

    pub fn interval(&self) -> f64 {
        self.h
    }

    /// `(∫ viscous rate, ∫ vertical rate)` between `x0` and `x1`, which must
    /// be `h` apart.
    pub fn increment(&self, x0: &State, x1: &State) -> (f64, f64) {
        let g = *x0.grid();
        let nxh = g.nxh();
        let plane = g.spectral_plane();
        let (w0, o0) = (x0.w_hat.coeffs(), x0.omega_hat.coeffs());
        let (w1, o1) = (x1.w_hat.coeffs(), x1.omega_hat.coeffs());
        let parts = par::map_range(g.nz(), |iz| {
            let mut acc = [0.0f64; 2];
            for iy in 0..g.ny() {
                for ix in 0..nxh {
                    let i = iz * plane + iy * nxh + ix;
                    let mw = &self.modes[i];
                    if mw.g == [[0.0; 2]; 2] {
                        continue;
                    }
                    let a = [w0[i], o0[i]];
                    let e = mw.exp.apply(a);
                    let r = [w1[i] - e[0], o1[i] - e[1]];
                    for f in 0..2 {
                        let rgr = mw.g[f][0] * r[0].norm_sqr() + mw.g[f][1] * r[1].norm_sqr();
                        let v = mw.w0[f].form(a, a).re + 2.0 * mw.w1[f].form(a, r).re + self.h / 3.0 * rgr;
                        acc[f] += g.weight(ix) * v;
                    }
                }
            }
            acc
        });
        let (mut v, mut e) = (0.0, 0.0);
        for p in parts {
            v += p[0];
            e += p[1];
        }
        (g.volume() * v, g.volume() * e)
    }
}

/// Builds a trajectory from consecutive states, integrating dissipation with
/// [`DissipationQuadrature`] between samples.
#[derive(Debug)]
pub struct Recorder {
    traj: Trajectory,
    prev: Option<State>,
    tables: Vec<DissipationQuadrature>,
}

impl Recorder {
    pub fn new(domain: Domain) -> Self {
        Self { traj: Trajectory::new(domain), prev: None, tables: Vec::new() }
    }

    fn table(&mut self, h: f64) -> Result<&DissipationQuadrature> {
        let pos = self.tables.iter().position(|t| (t.h - h).abs() <= 1e-12 * h);
        let pos = match pos {
            Some(p) => p,
            None => {
                // regular interval plus one remainder is all a run needs
                if self.tables.len() >= 2 {
                    self.tables.remove(0);
                }
                self.tables.push(DissipationQuadrature::new(self.traj.domain(), h)?);
                self.tables.len() - 1
            }
        };
        Ok(&self.tables[pos])
    }

    pub fn observe(&mut self, state: &State) -> Result<()> {
        let mut r = record(state);
        if let Some(prev) = self.prev.take() {
            let h = state.time - prev.time;
            if !(h > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "record time {} does not follow {}",
                    state.time, prev.time
                )));
            }
            let (dv, de) = self.table(h)?.increment(&prev, state);
            let last = self.traj.records.last().expect("previous record exists");
            r.d_visc = last.d_visc + dv;
            r.d_eps = last.d_eps + de;
        }
        self.traj.records.push(r);
        self.prev = Some(state.clone());
        Ok(())
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.traj
    }
}

/// Outcome of one audit check.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditCheck {
    pub name: String,
    /// Worst residual (or ratio) observed.
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Time of the worst residual, if the check is time-resolved.
    pub worst_time: Option<f64>,
    /// Reported without pass/fail meaning.
    pub informational: bool,
}

impl AuditCheck {
    fn new(name: &str, max_residual: f64, tolerance: f64, worst_time: Option<f64>) -> Self {
        Self {
            name: name.into(),
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
            worst_time,
            informational: false,
        }
    }

    fn info(name: &str, value: f64, worst_time: Option<f64>) -> Self {
        Self {
            name: name.into(),
            max_residual: value,
            tolerance: f64::INFINITY,
            passed: true,
            worst_time,
            informational: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: AuditReport) {
        self.checks.extend(other.checks);
    }
}

fn nonempty(traj: &Trajectory) -> Result<&[DiagnosticsRecord]> {
    if traj.is_empty() {
        Err(Error::EmptyTrajectory)
    } else {
        Ok(traj.records())
    }
}

/// Tolerance of the energy-equality residual.
pub const ENERGY_TOL: f64 = 1e-5;

/// Max over samples of
/// `|E(t) + D_visc(t) + D_eps(t) − E(0)| / E(0)`, `E = ½(‖w‖² + ‖u‖²)`.
pub fn audit_energy_equality(traj: &Trajectory) -> Result<AuditReport> {
    audit_energy_equality_with(traj, ENERGY_TOL)
}

pub fn audit_energy_equality_with(traj: &Trajectory, tol: f64) -> Result<AuditReport> {
    let recs = nonempty(traj)?;
    let e0 = recs[0].energy();
    let (mut worst, mut at) = (0.0f64, recs[0].t);
    for r in recs {
        let abs = (r.energy() + r.d_visc + r.d_eps - e0).abs();
        let res = if e0 > 0.0 { abs / e0 } else { abs };
        if res > worst || res.is_nan() {
            worst = res;
            at = r.t;
        }
    }
    Ok(AuditReport { checks: vec![AuditCheck::new("energy_equality", worst, tol, Some(at))] })
}

/// Centered-difference check of
/// `d/dt‖ω‖² + (2/Re)‖∇_h ω‖² + ε²‖u_z‖² ≤ (1/ε²)‖∇_h w‖²`
/// at every interior sample with uniform spacing, allowing `3 h² |f'''|`
/// (the local third-difference estimate of `f = ‖ω‖²`) plus a rounding
/// floor. The reported residual is the largest excess over the right side
/// in units of the slack; the check fails when it exceeds 1.
pub fn audit_enstrophy_inequality(traj: &Trajectory) -> Result<AuditReport> {
    let recs = nonempty(traj)?;
    let d = traj.domain();
    if d.eps == 0.0 {
        return Ok(AuditReport {
            checks: vec![AuditCheck::info("enstrophy_inequality", 0.0, None)],
        });
    }
    let f: Vec<f64> = recs.iter().map(|r| r.omega * r.omega).collect();
    let t: Vec<f64> = recs.iter().map(|r| r.t).collect();
    let uniform = |i: usize, j: usize| {
        let h = t[i + 1] - t[i];
        (i..j).all(|k| ((t[k + 1] - t[k]) - h).abs() <= 1e-9 * h)
    };
    let third = |i: usize| -> Option<f64> {
        // five-point third difference centered at i
        if i < 2 || i + 2 >= f.len() || !uniform(i - 2, i + 2) {
            return None;
        }
        let h = t[i + 1] - t[i];
        Some((f[i + 2] - 2.0 * f[i + 1] + 2.0 * f[i - 1] - f[i - 2]).abs() / (2.0 * h * h * h))
    };
    let (mut worst, mut at, mut violations) = (0.0f64, None, 0usize);
    for i in 1..f.len().saturating_sub(1) {
        if !uniform(i - 1, i + 1) {
            continue;
        }
        let h = t[i + 1] - t[i];
        let r = &recs[i];
        let dfdt = (f[i + 1] - f[i - 1]) / (2.0 * h);
        let lhs = dfdt + 2.0 * d.inv_re() * r.grad_omega * r.grad_omega + d.eps2() * r.u_z * r.u_z;
        let rhs = r.grad_w * r.grad_w / d.eps2();
        let f3 = [i.saturating_sub(1), i, i + 1]
            .into_iter()
            .filter_map(third)
            .fold(0.0, f64::max);
        let rounding = 64.0 * f64::EPSILON * (f[i + 1].max(f[i - 1]) / h + lhs.abs() + rhs);
        let slack = 3.0 * h * h * f3 + rounding;
        let excess = (lhs - rhs) / slack;
        if excess > 1.0 {
            violations += 1;
        }
        if at.is_none() || excess > worst {
            worst = excess;
            at = Some(r.t);
        }
    }
    let mut check = AuditCheck::new("enstrophy_inequality", worst, 1.0, at);
    check.passed = violations == 0;
    Ok(AuditReport { checks: vec![check] })
}

/// Settings of the H¹ boundedness audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H1Policy {
    /// Allowed `sup_t H¹(t) / H¹(0)`.
    pub bound_factor: f64,
    /// Relative growth over the last half of the run (fitted slope times the
    /// window length, divided by the window mean) above which the trend is
    /// flagged.
    pub trend_tol: f64,
}

impl Default for H1Policy {
    fn default() -> Self {
        Self { bound_factor: 10.0, trend_tol: 1e-9 }
    }
}

/// Least-squares slope of `y` against `x`.
pub fn linear_fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// `sup_t (‖u‖²_{H¹} + ‖w‖²_{H¹})` against `bound_factor` times its initial
/// value, and a growth-trend flag over the last half of the run. With
/// `ε = 0` both checks are informational.
pub fn audit_h1_boundedness(traj: &Trajectory, policy: H1Policy) -> Result<AuditReport> {
    let recs = nonempty(traj)?;
    let h1: Vec<f64> = recs.iter().map(|r| r.h1_sq()).collect();
    let (imax, sup) = h1
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, b), (i, v)| if v > b { (i, v) } else { (bi, b) });
    let h0 = h1[0];
    let ratio = if h0 > 0.0 { sup / h0 } else if sup > 0.0 { f64::INFINITY } else { 0.0 };

    let half = recs.len() / 2;
    let (ts, ys): (Vec<f64>, Vec<f64>) = recs[half..].iter().map(|r| (r.t, r.h1_sq())).unzip();
    let span = ts.last().copied().unwrap_or(0.0) - ts.first().copied().unwrap_or(0.0);
    let mean = ys.iter().sum::<f64>() / ys.len().max(1) as f64;
    let growth = if mean > 0.0 { linear_fit_slope(&ts, &ys) * span / mean } else { 0.0 };

    let mut checks = vec![
        AuditCheck::new("h1_bound", ratio, policy.bound_factor, Some(recs[imax].t)),
        AuditCheck::new("h1_trend", growth, policy.trend_tol, None),
        AuditCheck::info("h1_sup", sup, Some(recs[imax].t)),
    ];
    if traj.domain().eps == 0.0 {
        for c in &mut checks {
            c.passed = true;
            c.informational = true;
        }
    }
    Ok(AuditReport { checks })
}

/// Tolerance of the identity checks (relative).
pub const IDENTITY_TOL: f64 = 1e-11;

/// Evaluates the advection identities and the velocity/vorticity pairing on
/// state samples by collocation on a 3/2-padded grid.
#[derive(Debug, Clone)]
pub struct IdentityAudit {
    grid: Grid,
    padded: Transform,
}

fn padded_len(n: usize) -> usize {
    let m = (3 * n).div_ceil(2);
    m + m % 2
}

impl IdentityAudit {
    pub fn new(grid: Grid) -> Result<Self> {
        let pg = grid.with_dims(padded_len(grid.nx()), padded_len(grid.ny()), padded_len(grid.nz()))?;
        Ok(Self { grid, padded: Transform::new(pg) })
    }

    fn phys(&self, f: &SpectralField) -> Result<PhysicalField> {
        self.padded.inverse(&f.resample(*self.padded.grid())?)
    }

    /// `∫_Ω a b c` (or `∫ a b` when `c` is `None`) by padded collocation.
    fn integral(&self, a: &PhysicalField, b: &PhysicalField, c: Option<&PhysicalField>) -> f64 {
        let g = self.padded.grid();
        let plane = g.nx() * g.ny();
        let (a, b) = (a.values(), b.values());
        let c = c.map(|c| c.values());
        let s = par::ordered_sum(g.nz(), |k| {
            let r = k * plane..(k + 1) * plane;
            match c {
                Some(c) => r.map(|i| a[i] * b[i] * c[i]).sum::<f64>(),
                None => r.map(|i| a[i] * b[i]).sum::<f64>(),
            }
        });
        s * g.volume() / g.physical_len() as f64
    }

    /// `f = w`, `g = ω`, `u` from `ψ`. Residuals are relative to the natural
    /// scale of each identity.
    pub fn check(&self, state: &State) -> Result<AuditReport> {
        if *state.grid() != self.grid {
            return Err(Error::SizeMismatch {
                expected: format!("{:?}", self.grid),
                found: format!("{:?}", state.grid()),
            });
        }
        let w = state.w_hat.dealias_truncate();
        let om = state.omega_hat.dealias_truncate();
        let psi = om.inv_neg_laplacian_h()?;
        let (uh, vh) = psi.velocity_from_psi();
        let p = |f: &SpectralField| self.phys(f);
        let (u, v) = (p(&uh)?, p(&vh)?);
        let (fp, gp, pp) = (p(&w)?, p(&om)?, p(&psi)?);
        let (fx, fy) = (p(&w.d_dx())?, p(&w.d_dy())?);
        let (gx, gy) = (p(&om.d_dx())?, p(&om.d_dy())?);
        let adv = |a: &PhysicalField, b: &PhysicalField| {
            let mut out = u.mul(a);
            let vb = v.mul(b);
            for (o, x) in out.values_mut().iter_mut().zip(vb.values()) {
                *o += x;
            }
            out
        };
        let adv_f = adv(&fx, &fy);
        let adv_g = adv(&gx, &gy);
        let n = |a: &PhysicalField| self.integral(a, a, None).sqrt();
        let rel = |x: f64, scale: f64| if scale > 0.0 { x.abs() / scale } else { x.abs() };

        let (nf, ng, npsi) = (n(&fp), n(&gp), n(&pp));
        let (naf, nag) = (n(&adv_f), n(&adv_g));
        let i0 = self.integral(&adv_f, &gp, None) + self.integral(&adv_g, &fp, None);
        let i1 = self.integral(&adv_f, &fp, None);
        let i2 = self.integral(&adv_f, &pp, None);
        let u2 = self.integral(&u, &u, None) + self.integral(&v, &v, None);
        let i3 = self.integral(&gp, &pp, None) - u2;
        // ⟨ψ_z, w⟩ + ⟨w_z, ψ⟩
        let (psz, wz) = (p(&psi.d_dz())?, p(&w.d_dz())?);
        let cross = self.integral(&psz, &fp, None) + self.integral(&wz, &pp, None);
        let cross_scale = n(&psz) * nf + n(&wz) * npsi;

        let at = Some(state.time);
        Ok(AuditReport {
            checks: vec![
                AuditCheck::new("advection_antisymmetry", rel(i0, naf * ng + nag * nf), IDENTITY_TOL, at),
                AuditCheck::new("advection_skew", rel(i1, naf * nf), IDENTITY_TOL, at),
                AuditCheck::new("advection_stream_orthogonality", rel(i2, naf * npsi), IDENTITY_TOL, at),
                AuditCheck::new("vorticity_stream_pairing", rel(i3, u2), IDENTITY_TOL, at),
                AuditCheck::new("vertical_cross_terms", rel(cross, cross_scale), IDENTITY_TOL, at),
            ],
        })
    }
}

pub fn audit_identities(state: &State) -> Result<AuditReport> {
    IdentityAudit::new(*state.grid())?.check(state)
}

/// Merges several reports keeping the worst residual per check name.
pub fn merge_worst(reports: impl IntoIterator<Item = AuditReport>) -> AuditReport {
    let mut out = AuditReport::default();
    for r in reports {
        for c in r.checks {
            match out.checks.iter_mut().find(|x| x.name == c.name) {
                Some(x) => {
                    if c.max_residual > x.max_residual || !c.passed {
                        let passed = x.passed && c.passed;
                        *x = c;
                        x.passed = passed;
                    } else {
                        x.passed &= c.passed;
                    }
                }
                None => out.checks.push(c),
            }
        }
    }
    out
}
