use num_complex::Complex64;

use super::domain::{Grid, Mode};
use crate::error::{Error, ModeIndex, Result};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fourier coefficients of one real scalar field, stored as a half spectrum.
/// `coeff(j)` is the amplitude of `e_j`, so a constant field `c` has
/// `coeff(0,0,0) = c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.spectral_len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.spectral_len() {
            return Err(Error::SizeMismatch {
                expected: format!("{} coefficients", grid.spectral_len()),
                found: format!("{}", coeffs.len()),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Fills every stored mode from `f(mode)`. The caller is responsible for
    /// Hermitian consistency on the self-paired planes.
    pub fn from_fn(grid: Grid, f: impl Fn(&Mode) -> Complex64 + Sync + Send) -> Self {
        let mut out = Self::zeros(grid);
        out.map_modes_in_place(|m, _| f(m));
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// `coeff(j)`, or zero if `j` is not representable.
    pub fn coeff(&self, j: ModeIndex) -> Complex64 {
        match self.grid.locate(j) {
            Some((idx, false)) => self.coeffs[idx],
            Some((idx, true)) => self.coeffs[idx].conj(),
            None => ZERO,
        }
    }

    /// Sets `coeff(j) = c` and `coeff(-j) = conj(c)`.
    pub fn set_mode(&mut self, j: ModeIndex, c: Complex64) -> Result<()> {
        let (idx, conj) = self
            .grid
            .locate(j)
            .ok_or_else(|| Error::InvalidArgument(format!("mode {j:?} not representable")))?;
        let c = if conj { c.conj() } else { c };
        self.coeffs[idx] = c;
        let nxh = self.grid.nxh();
        let ix = idx % nxh;
        if ix == 0 || ix == self.grid.nx() / 2 {
            let iy = (idx / nxh) % self.grid.ny();
            let iz = idx / self.grid.spectral_plane();
            let p = self.grid.partner(ix, iy, iz);
            if p == idx {
                self.coeffs[idx] = Complex64::new(c.re, 0.0);
            } else {
                self.coeffs[p] = c.conj();
            }
        }
        Ok(())
    }

    pub fn ensure_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::SizeMismatch {
                expected: format!("{:?}", self.grid),
                found: format!("{:?}", other.grid),
            });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|coeff(-j) - conj(coeff(j))|` over the self-paired planes.
    pub fn hermitian_deviation(&self) -> f64 {
        let g = &self.grid;
        let nxh = g.nxh();
        let mut dev: f64 = 0.0;
        for ix in [0, g.nx() / 2] {
            for iz in 0..g.nz() {
                for iy in 0..g.ny() {
                    let idx = (iz * g.ny() + iy) * nxh + ix;
                    let p = g.partner(ix, iy, iz);
                    dev = dev.max((self.coeffs[idx] - self.coeffs[p].conj()).norm());
                }
            }
        }
        dev
    }

    /// Projects onto exactly Hermitian-symmetric coefficients.
    pub fn symmetrize(&mut self) {
        let g = self.grid;
        let nxh = g.nxh();
        for ix in [0, g.nx() / 2] {
            for iz in 0..g.nz() {
                for iy in 0..g.ny() {
                    let idx = (iz * g.ny() + iy) * nxh + ix;
                    let p = g.partner(ix, iy, iz);
                    if p < idx {
                        continue;
                    }
                    if p == idx {
                        self.coeffs[idx].im = 0.0;
                    } else {
                        let avg = (self.coeffs[idx] + self.coeffs[p].conj()) * 0.5;
                        self.coeffs[idx] = avg;
                        self.coeffs[p] = avg.conj();
                    }
                }
            }
        }
    }

    /// Replaces every coefficient with `f(mode, coeff)`, plane-parallel.
    pub fn map_modes_in_place(&mut self, f: impl Fn(&Mode, Complex64) -> Complex64 + Sync + Send) {
        let g = self.grid;
        let nxh = g.nxh();
        par::for_each_chunk(&mut self.coeffs, g.spectral_plane(), |iz, plane| {
            for iy in 0..g.ny() {
                for ix in 0..nxh {
                    let c = &mut plane[iy * nxh + ix];
                    *c = f(&g.mode(ix, iy, iz), *c);
                }
            }
        });
    }

    /// New field with every coefficient multiplied by `symbol(mode)`.
    pub fn apply_symbol(&self, symbol: impl Fn(&Mode) -> Complex64 + Sync + Send) -> Self {
        let mut out = self.clone();
        out.map_modes_in_place(|m, c| c * symbol(m));
        out
    }

    /// Zeroes every mode for which `keep` is false.
    pub fn retain_modes(&mut self, keep: impl Fn(&Mode) -> bool + Sync + Send) {
        self.map_modes_in_place(|m, c| if keep(m) { c } else { ZERO });
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    /// `Σ_j weight(j) |coeff(j)|²` over the full spectrum, reduced
    /// deterministically plane by plane.
    pub fn weighted_sum_sq(&self, weight: impl Fn(&Mode) -> f64 + Sync + Send) -> f64 {
        let g = self.grid;
        let nxh = g.nxh();
        let plane = g.spectral_plane();
        par::ordered_sum(g.nz(), |iz| {
            let mut s = 0.0;
            for iy in 0..g.ny() {
                for ix in 0..nxh {
                    let c = self.coeffs[iz * plane + iy * nxh + ix];
                    let n2 = c.norm_sqr();
                    if n2 != 0.0 {
                        s += g.weight(ix) * n2 * weight(&g.mode(ix, iy, iz));
                    }
                }
            }
            s
        })
    }

    /// `Σ_j weight(j) Re(conj(a_j) b_j)` over the full spectrum.
    pub fn weighted_inner(&self, other: &SpectralField, weight: impl Fn(&Mode) -> f64 + Sync + Send) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let g = self.grid;
        let nxh = g.nxh();
        let plane = g.spectral_plane();
        par::ordered_sum(g.nz(), |iz| {
            let mut s = 0.0;
            for iy in 0..g.ny() {
                for ix in 0..nxh {
                    let i = iz * plane + iy * nxh + ix;
                    let p = (self.coeffs[i].conj() * other.coeffs[i]).re;
                    if p != 0.0 {
                        s += g.weight(ix) * p * weight(&g.mode(ix, iy, iz));
                    }
                }
            }
            s
        })
    }

    /// Copies the coefficients onto another grid of the same box. Modes not
    /// representable on both grids, and Nyquist positions, are dropped.
    pub fn resample(&self, target: Grid) -> Result<Self> {
        if (target.l() - self.grid.l()).abs() > 0.0 {
            return Err(Error::InvalidArgument("resample requires the same box".into()));
        }
        let src = self.grid;
        Ok(Self::from_fn(target, |m| {
            if m.nyquist.iter().any(|&n| n) {
                return ZERO;
            }
            let fits = |j: i64, n: usize| j.abs() < n as i64 / 2;
            if fits(m.j[0], src.nx()) && fits(m.j[1], src.ny()) && fits(m.j[2], src.nz()) {
                self.coeff(m.j)
            } else {
                ZERO
            }
        }))
    }
}

/// Real samples at the collocation points `x_i = iL/nx, y_j = jL/ny, z_k = k/nz`,
/// stored with `x` fastest: `values[(k * ny + j) * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.physical_len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.physical_len() {
            return Err(Error::SizeMismatch {
                expected: format!("{} values", grid.physical_len()),
                found: format!("{}", values.len()),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64 + Sync + Send) -> Self {
        let mut values = vec![0.0; grid.physical_len()];
        let (nx, ny) = (grid.nx(), grid.ny());
        par::for_each_chunk(&mut values, nx * ny, |k, plane| {
            for j in 0..ny {
                for i in 0..nx {
                    plane[j * nx + i] = f(grid.x(i), grid.y(j), grid.z(k));
                }
            }
        });
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(k * self.grid.ny() + j) * self.grid.nx() + i]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Collocation-quadrature mean of `f(value)`; exact for trigonometric
    /// polynomials of degree below the grid size.
    pub fn mean_of(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let plane = nx * ny;
        let s = par::ordered_sum(self.grid.nz(), |k| {
            self.values[k * plane..(k + 1) * plane].iter().map(|&v| f(v)).sum()
        });
        s / self.grid.physical_len() as f64
    }

    /// `∫_Ω f(value) dx dy dz` by collocation quadrature.
    pub fn integral_of(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> f64 {
        self.mean_of(f) * self.grid.volume()
    }

    /// Pointwise product.
    pub fn mul(&self, other: &PhysicalField) -> PhysicalField {
        debug_assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self { grid: self.grid, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(3.0, 8, 6, 4).unwrap()
    }

    #[test]
    fn set_mode_keeps_hermitian_symmetry() {
        let mut f = SpectralField::zeros(grid());
        f.set_mode([0, 1, -1], Complex64::new(0.3, -0.7)).unwrap();
        f.set_mode([-2, 1, 1], Complex64::new(1.0, 2.0)).unwrap();
        assert_eq!(f.hermitian_deviation(), 0.0);
        assert_eq!(f.coeff([0, -1, 1]), Complex64::new(0.3, 0.7));
        assert_eq!(f.coeff([2, -1, -1]), Complex64::new(1.0, -2.0));
    }

    #[test]
    fn symmetrize_is_idempotent_projection() {
        let g = grid();
        let mut f = SpectralField::from_fn(g, |m| {
            Complex64::new(m.j[1] as f64 + 0.5, (m.j[2] * 3 + m.j[0]) as f64)
        });
        assert!(f.hermitian_deviation() > 0.0);
        f.symmetrize();
        assert_eq!(f.hermitian_deviation(), 0.0);
        let once = f.clone();
        f.symmetrize();
        assert_eq!(f, once);
    }

    #[test]
    fn from_coeffs_checks_length() {
        assert!(SpectralField::from_coeffs(grid(), vec![ZERO; 3]).is_err());
    }

    #[test]
    fn resample_preserves_interior_modes() {
        let g = grid();
        let mut f = SpectralField::zeros(g);
        f.set_mode([1, -2, 1], Complex64::new(0.25, 0.5)).unwrap();
        let big = f.resample(g.with_dims(16, 12, 8).unwrap()).unwrap();
        assert_eq!(big.coeff([1, -2, 1]), Complex64::new(0.25, 0.5));
        let back = big.resample(g).unwrap();
        assert_eq!(back, f);
    }
}
