//! Horizontal and vertical differential operators, the gauge-fixed inverse
//! horizontal Laplacian, truncations, dealiased products and Parseval norms.

use num_complex::Complex64;

use super::domain::{Domain, Grid, Mode};
use super::fft::Transform;
use super::field::SpectralField;
use crate::error::{Error, ModeIndex, Result};

/// Relative tolerance for content at `kh2 = 0` in a vorticity field.
pub const GAUGE_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// Odd-derivative symbols vanish on Nyquist positions so real fields stay real.
fn ikx(m: &Mode) -> Complex64 {
    if m.nyquist[0] { ZERO } else { Complex64::new(0.0, m.kx) }
}

fn iky(m: &Mode) -> Complex64 {
    if m.nyquist[1] { ZERO } else { Complex64::new(0.0, m.ky) }
}

fn ikz(m: &Mode) -> Complex64 {
    if m.nyquist[2] { ZERO } else { Complex64::new(0.0, m.kz) }
}

impl SpectralField {
    /// `(∂x F, ∂y F)`
    pub fn grad_h(&self) -> (SpectralField, SpectralField) {
        (self.apply_symbol(ikx), self.apply_symbol(iky))
    }

    pub fn d_dx(&self) -> SpectralField {
        self.apply_symbol(ikx)
    }

    pub fn d_dy(&self) -> SpectralField {
        self.apply_symbol(iky)
    }

    pub fn d_dz(&self) -> SpectralField {
        self.apply_symbol(ikz)
    }

    /// `∂²F/∂z²`, i.e. multiplication by `-kz²` (Nyquist included).
    pub fn d_dzz(&self) -> SpectralField {
        self.apply_symbol(|m| Complex64::new(-m.kz2(), 0.0))
    }

    pub fn laplacian_h(&self) -> SpectralField {
        self.apply_symbol(|m| Complex64::new(-m.kh2, 0.0))
    }

    /// Largest `|coeff|` over modes with `kh2 = 0`, with the offending modes
    /// above `tol`.
    fn horizontal_mean_content(&self, tol: f64) -> (f64, Vec<ModeIndex>) {
        let g = self.grid();
        let mut max_abs: f64 = 0.0;
        let mut bad = Vec::new();
        for iz in 0..g.nz() {
            let c = self.coeffs()[iz * g.spectral_plane()];
            let a = c.norm();
            max_abs = max_abs.max(a);
            if a > tol {
                bad.push(g.mode(0, 0, iz).j);
            }
        }
        (max_abs, bad)
    }

    /// Stream function `ψ = (-Δ_h)⁻¹ ω` with zero horizontal mean. The input
    /// must have no `kh2 = 0` content beyond [`GAUGE_TOL`] relative to its
    /// largest coefficient.
    pub fn inv_neg_laplacian_h(&self) -> Result<SpectralField> {
        let tol = GAUGE_TOL * self.max_abs();
        let (max_abs, modes) = self.horizontal_mean_content(tol);
        if !modes.is_empty() {
            return Err(Error::GaugeViolation { modes, max_abs, tolerance: tol });
        }
        Ok(self.inv_neg_laplacian_h_unchecked())
    }

    pub(crate) fn inv_neg_laplacian_h_unchecked(&self) -> SpectralField {
        self.apply_symbol(|m| {
            if m.kh2 > 0.0 {
                Complex64::new(1.0 / m.kh2, 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Horizontal velocity `u = (ψ_y, -ψ_x)` of a stream function.
    pub fn velocity_from_psi(&self) -> (SpectralField, SpectralField) {
        (self.apply_symbol(iky), self.apply_symbol(|m| -ikx(m)))
    }

    /// Ball truncation `P_m`: keeps modes with `|j| <= m`.
    pub fn galerkin_project(&self, m: u32) -> SpectralField {
        let r2 = (m as i64) * (m as i64);
        let mut out = self.clone();
        out.retain_modes(|mode| mode.index_norm2() <= r2);
        out
    }

    /// 2/3-rule truncation in all three index directions.
    pub fn dealias_truncate(&self) -> SpectralField {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let k = self.grid().dealias_cutoff();
        self.retain_modes(|m| (0..3).all(|d| m.j[d].abs() <= k[d]));
    }

    /// Zeroes every mode the domain does not carry (2/3 box, Galerkin ball).
    pub fn restrict_to(&mut self, domain: &Domain) {
        self.retain_modes(|m| domain.is_active(m));
    }

    /// `‖F‖₂² = L²·Lz·Σ_j |coeff(j)|²`
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid().volume() * self.weighted_sum_sq(|_| 1.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `‖∇_h F‖₂²`
    pub fn grad_h_norm_sq(&self) -> f64 {
        self.grid().volume() * self.weighted_sum_sq(|m| m.kh2)
    }

    /// `‖F_z‖₂²`
    pub fn dz_norm_sq(&self) -> f64 {
        self.grid().volume() * self.weighted_sum_sq(|m| m.kz2())
    }

    /// `‖Δ_h F‖₂²`
    pub fn laplacian_h_norm_sq(&self) -> f64 {
        self.grid().volume() * self.weighted_sum_sq(|m| m.kh2 * m.kh2)
    }

    /// `‖∂x F‖₂²` and `‖∂y F‖₂²`
    pub fn dx_dy_norm_sq(&self) -> (f64, f64) {
        let v = self.grid().volume();
        (
            v * self.weighted_sum_sq(|m| m.kx * m.kx),
            v * self.weighted_sum_sq(|m| m.ky * m.ky),
        )
    }

    /// `(F, G) = ∫_Ω F G` via Parseval.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        self.grid().volume() * self.weighted_inner(other, |_| 1.0)
    }
}

/// Horizontal curl `v_x - u_y`.
pub fn curl_h(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.ensure_same_grid(v)?;
    let vx = v.d_dx();
    let uy = u.d_dy();
    let mut out = vx;
    out.axpy(-1.0, &uy);
    Ok(out)
}

impl Transform {
    /// Pseudo-spectral product of two fields with 2/3-rule truncation before
    /// and after the pointwise multiplication.
    pub fn dealias_product(&self, f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
        f.ensure_same_grid(g)?;
        let pf = self.inverse(&f.dealias_truncate())?;
        let pg = self.inverse(&g.dealias_truncate())?;
        let mut out = self.forward(&pf.mul(&pg))?;
        out.dealias_in_place();
        Ok(out)
    }
}

/// Smallest even grid size whose 2/3-rule box contains `|j| <= m`.
pub fn grid_size_for_radius(m: u32) -> usize {
    let n = 3 * m as usize + 1;
    let n = n.max(4);
    if n % 2 == 0 { n } else { n + 1 }
}

/// Index-space Euclidean radius of the largest active mode of a grid.
pub fn max_index_radius(grid: &Grid) -> f64 {
    let k = grid.dealias_cutoff();
    ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt()
}
