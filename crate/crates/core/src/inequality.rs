//! Numerical checks of the anisotropic trilinear estimate and the
//! inequalities used in its proof, on randomized band-limited fields.
//!
//! Integrals of non-polynomial integrands (`|fgh|`, fractional `Lp` powers)
//! use collocation on a zero-padded grid; norms with derivatives are exact
//! via Parseval.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use realfft::{RealFftPlanner, RealToComplex, ComplexToReal};

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{Grid, PhysicalField, SpectralField, Transform};

/// Which directions a random field varies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anisotropy {
    #[default]
    Full,
    /// `kz = 0` only.
    HorizontalOnly,
    /// `kh = 0` only.
    VerticalOnly,
}

impl Anisotropy {
    pub fn as_str(self) -> &'static str {
        match self {
            Anisotropy::Full => "full",
            Anisotropy::HorizontalOnly => "h_only",
            Anisotropy::VerticalOnly => "z_only",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Anisotropy::Full),
            "h_only" => Ok(Anisotropy::HorizontalOnly),
            "z_only" => Ok(Anisotropy::VerticalOnly),
            _ => Err(Error::InvalidArgument(format!("unknown anisotropy `{s}`"))),
        }
    }

    fn admits(self, j: [i64; 3]) -> bool {
        match self {
            Anisotropy::Full => true,
            Anisotropy::HorizontalOnly => j[2] == 0,
            Anisotropy::VerticalOnly => j[0] == 0 && j[1] == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomFieldSpec {
    /// Largest `|j_d|` per direction.
    pub band: [i64; 3],
    /// Amplitudes scale as `(1 + |j|)^{-alpha}`.
    pub alpha: f64,
    pub seed: u64,
    pub anisotropy: Anisotropy,
}

impl RandomFieldSpec {
    /// Band must stay within a third of the evaluation grid so that products
    /// of three fields are alias-free on the padded grid.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let dims = grid.dims();
        for d in 0..3 {
            if self.band[d] < 0 || 3 * self.band[d] >= dims[d] as i64 {
                return Err(Error::InvalidArgument(format!(
                    "band {:?} exceeds a third of grid {:?}",
                    self.band, dims
                )));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        Ok(())
    }

    /// Random phases and magnitudes `r (1 + |j|)^{-alpha}`, `r ~ U(0, 1)`,
    /// on every admitted mode within the band, including the mean.
    pub fn generate(&self, grid: Grid) -> Result<SpectralField> {
        self.validate(&grid)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut f = SpectralField::zeros(grid);
        for idx in 0..grid.spectral_len() {
            let m = grid.mode_at(idx);
            let (theta, r): (f64, f64) = (rng.gen_range(0.0..2.0 * PI), rng.gen());
            let inside = (0..3).all(|d| m.j[d].abs() <= self.band[d] && !m.nyquist[d]);
            if !inside || !self.anisotropy.admits(m.j) {
                continue;
            }
            let amp = r * (1.0 + (m.index_norm2() as f64).sqrt()).powf(-self.alpha);
            f.coeffs_mut()[idx] = Complex64::from_polar(amp, theta);
        }
        f.symmetrize();
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InequalityKind {
    Lemma1,
    Ladyzhenskaya,
    Agmon1d,
    LinftyZ,
    MixedL4,
}

impl InequalityKind {
    pub const ALL: [InequalityKind; 5] = [
        InequalityKind::Lemma1,
        InequalityKind::Ladyzhenskaya,
        InequalityKind::Agmon1d,
        InequalityKind::LinftyZ,
        InequalityKind::MixedL4,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown inequality `{s}`")))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityKind::Lemma1 => "lemma1",
            InequalityKind::Ladyzhenskaya => "ladyzhenskaya",
            InequalityKind::Agmon1d => "agmon_1d",
            InequalityKind::LinftyZ => "linfty_z",
            InequalityKind::MixedL4 => "mixed_l4",
        }
    }
}

/// One evaluation: `lhs ≤ C · rhs` with `ratio = lhs / rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityResult {
    pub kind: InequalityKind,
    pub lhs: f64,
    /// Right side without the constant.
    pub rhs: f64,
    pub ratio: f64,
    /// Named norms entering the right side.
    pub factors: Vec<(&'static str, f64)>,
    /// Specs of the sampled fields, when the inputs were generated.
    pub specs: Vec<RandomFieldSpec>,
}

impl InequalityResult {
    fn new(kind: InequalityKind, lhs: f64, rhs: f64, factors: Vec<(&'static str, f64)>) -> Result<Self> {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            return Err(Error::Inconsistent(format!(
                "{}: left side {lhs:e} with vanishing right side",
                kind.as_str()
            )));
        };
        if !ratio.is_finite() {
            return Err(Error::NonFinite { what: kind.as_str().into(), time: 0.0 });
        }
        Ok(Self { kind, lhs, rhs, ratio, factors, specs: Vec::new() })
    }

    pub fn factor(&self, name: &str) -> Option<f64> {
        self.factors.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

/// Evaluation context: a base grid for band-limited inputs and a padded grid
/// for collocation quadrature.
#[derive(Debug, Clone)]
pub struct Lab {
    grid: Grid,
    base: Transform,
    padded: Transform,
}

impl Lab {
    /// Padding by a factor of 2.
    pub fn new(grid: Grid) -> Result<Self> {
        Self::with_oversampling(grid, 2)
    }

    pub fn with_oversampling(grid: Grid, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument("oversampling factor must be >= 1".into()));
        }
        let [nx, ny, nz] = grid.dims();
        let pg = grid.with_dims(factor * nx, factor * ny, factor * nz)?;
        Ok(Self { grid, base: Transform::new(grid), padded: Transform::new(pg) })
    }

    /// Smallest cube-free grid on which fields with `band` are alias-free.
    pub fn for_band(l: f64, band: [i64; 3]) -> Result<Self> {
        let n = |b: i64| {
            let m = (3 * b.max(0) + 1) as usize;
            (m + m % 2).max(4)
        };
        Self::new(Grid::new(l, n(band[0]), n(band[1]), n(band[2]))?)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn padded_grid(&self) -> &Grid {
        self.padded.grid()
    }

    pub fn to_spectral(&self, f: &PhysicalField) -> Result<SpectralField> {
        if *f.grid() != self.grid {
            return Err(Error::SizeMismatch {
                expected: format!("{:?}", self.grid),
                found: format!("{:?}", f.grid()),
            });
        }
        self.base.forward(f)
    }

    fn pad(&self, f: &SpectralField) -> Result<PhysicalField> {
        f.ensure_same_grid(&SpectralField::zeros(self.grid))?;
        self.padded.inverse(&f.resample(*self.padded.grid())?)
    }

    /// `∫_Ω F` by collocation on the padded grid.
    fn integrate(&self, values: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
        let g = self.padded.grid();
        let plane = g.nx() * g.ny();
        let s = par::ordered_sum(g.nz(), |k| (k * plane..(k + 1) * plane).map(&values).sum());
        s * g.volume() / g.physical_len() as f64
    }

    /// `∫|fgh|` against
    /// `(‖f‖+‖∇_h f‖)^{1/2} (‖f‖+‖f_z‖)^{1/2} ‖g‖^{1/2} (‖g‖+‖∇_h g‖)^{1/2} ‖h‖`.
    pub fn lemma1(&self, f: &SpectralField, g: &SpectralField, h: &SpectralField) -> Result<InequalityResult> {
        let (pf, pg, ph) = (self.pad(f)?, self.pad(g)?, self.pad(h)?);
        let (a, b, c) = (pf.values(), pg.values(), ph.values());
        let lhs = self.integrate(|i| (a[i] * b[i] * c[i]).abs());
        let (nf, nhf, nzf) = (f.l2_norm(), f.grad_h_norm_sq().sqrt(), f.dz_norm_sq().sqrt());
        let (ng, nhg) = (g.l2_norm(), g.grad_h_norm_sq().sqrt());
        let nh = h.l2_norm();
        let rhs = ((nf + nhf) * (nf + nzf) * ng * (ng + nhg)).sqrt() * nh;
        InequalityResult::new(
            InequalityKind::Lemma1,
            lhs,
            rhs,
            vec![
                ("f_l2", nf),
                ("f_grad_h", nhf),
                ("f_z", nzf),
                ("g_l2", ng),
                ("g_grad_h", nhg),
                ("h_l2", nh),
            ],
        )
    }

    /// `‖f‖_p` by padded quadrature (exact for even integer `p ≤ 6`).
    pub fn lp_norm(&self, f: &SpectralField, p: f64) -> Result<f64> {
        let pf = self.pad(f)?;
        let v = pf.values();
        let s = if p == 2.0 {
            self.integrate(|i| v[i] * v[i])
        } else if p == 4.0 {
            self.integrate(|i| (v[i] * v[i]).powi(2))
        } else if p == 6.0 {
            self.integrate(|i| (v[i] * v[i]).powi(3))
        } else {
            self.integrate(|i| v[i].abs().powf(p))
        };
        Ok(s.powf(1.0 / p))
    }

    /// `‖f‖_p` against
    /// `‖f‖₂^{(6−p)/2p} Π_d (‖f‖₂ + ‖∂_d f‖₂)^{(p−2)/2p}`, `p ∈ [2, 6]`.
    pub fn ladyzhenskaya(&self, f: &SpectralField, p: f64) -> Result<InequalityResult> {
        if !(2.0..=6.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p must lie in [2, 6], got {p}")));
        }
        let lhs = self.lp_norm(f, p)?;
        let n = f.l2_norm();
        let (nx2, ny2) = f.dx_dy_norm_sq();
        let (nx, ny, nz) = (nx2.sqrt(), ny2.sqrt(), f.dz_norm_sq().sqrt());
        let a = (6.0 - p) / (2.0 * p);
        let b = (p - 2.0) / (2.0 * p);
        let rhs = if p == 2.0 {
            n
        } else {
            n.powf(a) * ((n + nx) * (n + ny) * (n + nz)).powf(b)
        };
        InequalityResult::new(
            InequalityKind::Ladyzhenskaya,
            lhs,
            rhs,
            vec![("p", p), ("l2", n), ("dx", nx), ("dy", ny), ("dz", nz)],
        )
    }

    /// Worst `(x, y)` column of
    /// `‖f‖_{L∞_z} ≤ C ‖f‖_{L⁶_z}^{3/4} ‖f_z‖_{L²_z}^{1/4} + ‖f‖_{L⁴_z}`,
    /// reported with `C = 1`. The factor `lem1_ratio` is the worst column of
    /// `sup_z f⁴ / (4 ‖f‖³_{L⁶_z} ‖f_z‖_{L²_z} + ‖f‖⁴_{L⁴_z})`, which cannot
    /// exceed 1.
    pub fn linfty_z(&self, f: &SpectralField) -> Result<InequalityResult> {
        let pf = self.pad(f)?;
        let pz = self.pad(&f.d_dz())?;
        let g = *self.padded.grid();
        let (nx, ny, nz) = (g.nx(), g.ny(), g.nz());
        let plane = nx * ny;
        let (v, vz) = (pf.values(), pz.values());
        let cols = par::map_range(ny, |j| {
            let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0, 0usize);
            let mut worst_lem1 = 0.0f64;
            for i in 0..nx {
                let (mut sup, mut s4, mut s6, mut sz) = (0.0f64, 0.0, 0.0, 0.0);
                for k in 0..nz {
                    let p = k * plane + j * nx + i;
                    let x = v[p];
                    sup = sup.max(x.abs());
                    let x2 = x * x;
                    s4 += x2 * x2;
                    s6 += x2 * x2 * x2;
                    sz += vz[p] * vz[p];
                }
                let dz = 1.0 / nz as f64;
                let (l4, l6, lz) = ((s4 * dz).powf(0.25), (s6 * dz).powf(1.0 / 6.0), (sz * dz).sqrt());
                let rhs = l6.powf(0.75) * lz.powf(0.25) + l4;
                let r = if rhs > 0.0 { sup / rhs } else { 0.0 };
                let lem1_rhs = 4.0 * l6.powi(3) * lz + l4.powi(4);
                if lem1_rhs > 0.0 {
                    worst_lem1 = worst_lem1.max(sup.powi(4) / lem1_rhs);
                }
                if r > best.0 {
                    best = (r, sup, rhs, l6, j * nx + i);
                }
            }
            (best, worst_lem1)
        });
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0, 0usize);
        let mut lem1 = 0.0f64;
        for (b, w) in cols {
            if b.0 > best.0 {
                best = b;
            }
            lem1 = lem1.max(w);
        }
        let mut r = InequalityResult::new(
            InequalityKind::LinftyZ,
            best.1,
            best.2,
            vec![("l6_z", best.3), ("column", best.4 as f64), ("lem1_ratio", lem1)],
        )?;
        if best.2 == 0.0 {
            r.ratio = 0.0;
        }
        Ok(r)
    }

    /// `∫ ‖g‖⁴_{L²_z} dx dy` against `‖g‖₂² (‖g‖₂² + ‖∇_h g‖₂²)`.
    pub fn mixed_l4(&self, g: &SpectralField) -> Result<InequalityResult> {
        let pg = self.pad(g)?;
        let grid = *self.padded.grid();
        let (nx, ny, nz) = (grid.nx(), grid.ny(), grid.nz());
        let plane = nx * ny;
        let v = pg.values();
        let lhs = par::ordered_sum(ny, |j| {
            (0..nx)
                .map(|i| {
                    let s: f64 = (0..nz).map(|k| v[k * plane + j * nx + i].powi(2)).sum::<f64>() / nz as f64;
                    s * s
                })
                .sum()
        }) * grid.l() * grid.l() / plane as f64;
        let n2 = g.l2_norm_sq();
        let h2 = g.grad_h_norm_sq();
        InequalityResult::new(
            InequalityKind::MixedL4,
            lhs,
            n2 * (n2 + h2),
            vec![("l2", n2.sqrt()), ("grad_h", h2.sqrt())],
        )
    }
}

/// [`Lab::lemma1`] for physical fields sampled on a common band-limited grid.
pub fn check_lemma1(f: &PhysicalField, g: &PhysicalField, h: &PhysicalField) -> Result<InequalityResult> {
    let lab = Lab::new(*f.grid())?;
    lab.lemma1(&lab.to_spectral(f)?, &lab.to_spectral(g)?, &lab.to_spectral(h)?)
}

pub fn check_ladyzhenskaya(f: &PhysicalField, p: f64) -> Result<InequalityResult> {
    let lab = Lab::new(*f.grid())?;
    lab.ladyzhenskaya(&lab.to_spectral(f)?, p)
}

pub fn check_linfty_z(f: &PhysicalField) -> Result<InequalityResult> {
    let lab = Lab::new(*f.grid())?;
    lab.linfty_z(&lab.to_spectral(f)?)
}

pub fn check_mixed_l4(g: &PhysicalField) -> Result<InequalityResult> {
    let lab = Lab::new(*g.grid())?;
    lab.mixed_l4(&lab.to_spectral(g)?)
}

/// Oversampling of the sup search in [`check_agmon_1d`].
pub const AGMON_REFINE: usize = 16;

struct Fft1d {
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

impl Fft1d {
    fn new(n: usize, fine: usize) -> Self {
        let mut p = RealFftPlanner::<f64>::new();
        Self { r2c: p.plan_fft_forward(n), c2r: p.plan_fft_inverse(fine) }
    }
}

/// `‖φ‖_∞ / (‖φ‖₂^{1/2} ‖φ‖_{H¹}^{1/2})` for `φ` sampled at `x_k = kL/n`,
/// `‖φ‖²_{H¹} = ‖φ‖₂² + ‖φ'‖₂²`. The sup is taken on a
/// [`AGMON_REFINE`]-times finer grid of the trigonometric interpolant.
pub fn check_agmon_1d(samples: &[f64], l: f64) -> Result<InequalityResult> {
    let n = samples.len();
    if n < 2 || n % 2 != 0 || !(l > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need an even number of samples and L > 0, got n = {n}, L = {l}"
        )));
    }
    let fine = AGMON_REFINE * n;
    let fft = Fft1d::new(n, fine);
    let mut input = samples.to_vec();
    let mut spec = fft.r2c.make_output_vec();
    fft.r2c
        .process(&mut input, &mut spec)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    for c in spec.iter_mut() {
        *c /= n as f64;
    }
    // Nyquist carries no derivative and is dropped from the interpolant
    let h = n / 2;
    spec[h] = Complex64::new(0.0, 0.0);
    let (mut s0, mut s1) = (0.0, 0.0);
    for (k, c) in spec.iter().enumerate() {
        let w = if k == 0 { 1.0 } else { 2.0 };
        let kk = 2.0 * PI * k as f64 / l;
        s0 += w * c.norm_sqr();
        s1 += w * kk * kk * c.norm_sqr();
    }
    let (l2, d1) = ((l * s0).sqrt(), (l * s1).sqrt());
    let h1 = (l2 * l2 + d1 * d1).sqrt();

    let mut padded = fft.c2r.make_input_vec();
    padded[..=h].copy_from_slice(&spec);
    padded[0].im = 0.0;
    let mut vals = fft.c2r.make_output_vec();
    fft.c2r
        .process(&mut padded, &mut vals)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let sup = vals
        .iter()
        .chain(samples.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    InequalityResult::new(
        InequalityKind::Agmon1d,
        sup,
        (l2 * h1).sqrt(),
        vec![("l2", l2), ("h1", h1)],
    )
}

/// Empirical constant of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantFit {
    pub max: f64,
    pub median: f64,
    pub p99: f64,
    pub count: usize,
}

/// Max ratio (an empirical lower bound on the best constant) with the
/// median and nearest-rank 99th percentile.
pub fn fit_constant(results: &[InequalityResult]) -> Result<ConstantFit> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("no results to fit".into()));
    }
    let mut r: Vec<f64> = results.iter().map(|x| x.ratio).collect();
    if let Some(bad) = r.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: format!("ratio {bad}"), time: 0.0 });
    }
    r.sort_by(f64::total_cmp);
    let n = r.len();
    let median = if n % 2 == 1 { r[n / 2] } else { 0.5 * (r[n / 2 - 1] + r[n / 2]) };
    let rank = ((0.99 * n as f64).ceil() as usize).clamp(1, n);
    Ok(ConstantFit { max: r[n - 1], median, p99: r[rank - 1], count: n })
}

/// Randomized campaign settings. Item `i` draws its field specs from stream
/// `i` of a generator seeded by `campaign_seed`, so results do not depend on
/// evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub count: usize,
    pub campaign_seed: u64,
    pub l: f64,
    pub max_band: [i64; 3],
    pub alphas: Vec<f64>,
    /// Draw anisotropy flags uniformly from all three kinds; otherwise every
    /// field is fully three-dimensional.
    pub anisotropy: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            count: 10_000,
            campaign_seed: 0,
            l: 2.0 * PI,
            max_band: [3, 3, 3],
            alphas: vec![0.0, 1.0, 2.0],
            anisotropy: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::InvalidArgument("alphas must be a non-empty list of values >= 0".into()));
        }
        if self.max_band.iter().any(|b| *b < 1) {
            return Err(Error::InvalidArgument("max_band entries must be >= 1".into()));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::InvalidArgument(format!("L must be positive, got {}", self.l)));
        }
        Ok(())
    }

    /// Field specs of item `i`.
    pub fn specs(&self, i: usize, fields: usize) -> Vec<RandomFieldSpec> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.campaign_seed);
        rng.set_stream(i as u64);
        (0..fields)
            .map(|_| {
                let band = [
                    rng.gen_range(1..=self.max_band[0]),
                    rng.gen_range(1..=self.max_band[1]),
                    rng.gen_range(1..=self.max_band[2]),
                ];
                let alpha = self.alphas[rng.gen_range(0..self.alphas.len())];
                let anisotropy = if self.anisotropy {
                    [Anisotropy::Full, Anisotropy::HorizontalOnly, Anisotropy::VerticalOnly][rng.gen_range(0..3)]
                } else {
                    Anisotropy::Full
                };
                RandomFieldSpec { band, alpha, seed: rng.gen(), anisotropy }
            })
            .collect()
    }

    fn lab(&self) -> Result<Lab> {
        self.validate()?;
        Lab::for_band(self.l, self.max_band)
    }

    fn sweep(
        &self,
        fields: usize,
        eval: impl Fn(&Lab, &[SpectralField]) -> Result<InequalityResult> + Sync + Send,
    ) -> Result<Vec<InequalityResult>> {
        let lab = self.lab()?;
        par::map_range(self.count, |i| {
            let specs = self.specs(i, fields);
            let fs = specs
                .iter()
                .map(|s| s.generate(*lab.grid()))
                .collect::<Result<Vec<_>>>()?;
            let mut r = eval(&lab, &fs)?;
            r.specs = specs;
            Ok(r)
        })
        .into_iter()
        .collect()
    }

    pub fn lemma1(&self) -> Result<Vec<InequalityResult>> {
        self.sweep(3, |lab, f| lab.lemma1(&f[0], &f[1], &f[2]))
    }

    pub fn ladyzhenskaya(&self, p: f64) -> Result<Vec<InequalityResult>> {
        self.sweep(1, |lab, f| lab.ladyzhenskaya(&f[0], p))
    }

    pub fn linfty_z(&self) -> Result<Vec<InequalityResult>> {
        self.sweep(1, |lab, f| lab.linfty_z(&f[0]))
    }

    pub fn mixed_l4(&self) -> Result<Vec<InequalityResult>> {
        self.sweep(1, |lab, f| lab.mixed_l4(&f[0]))
    }

    /// One-dimensional Agmon sweep along x with `max_band[0]` and `alphas`.
    pub fn agmon_1d(&self) -> Result<Vec<InequalityResult>> {
        self.validate()?;
        let b = self.max_band[0] as usize;
        let n = (3 * b + 1).max(4);
        let n = n + n % 2;
        par::map_range(self.count, |i| {
            let spec = self.specs(i, 1)[0];
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let modes: Vec<(f64, f64)> = (0..=spec.band[0])
                .map(|k| {
                    let amp = rng.gen::<f64>() * (1.0 + k as f64).powf(-spec.alpha);
                    (amp, rng.gen_range(0.0..2.0 * PI))
                })
                .collect();
            let samples: Vec<f64> = (0..n)
                .map(|x| {
                    let t = 2.0 * PI * x as f64 / n as f64;
                    modes.iter().enumerate().map(|(k, (a, p))| a * (k as f64 * t + p).cos()).sum()
                })
                .collect();
            let mut r = check_agmon_1d(&samples, self.l)?;
            r.specs = vec![spec];
            Ok(r)
        })
        .into_iter()
        .collect()
    }
}
