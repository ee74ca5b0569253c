use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use super::domain::Grid;
use super::field::{PhysicalField, SpectralField};
use crate::error::{Error, Result};
use crate::par;

/// Relative tolerance on broken Hermitian symmetry accepted by [`Transform::inverse`].
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Immutable real-to-complex 3D transform plans for one grid. Cheap to share
/// across threads.
#[derive(Clone)]
pub struct Transform {
    grid: Grid,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    fwd_z: Arc<dyn Fft<f64>>,
    inv_z: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).finish()
    }
}

impl Transform {
    pub fn new(grid: Grid) -> Self {
        let mut real = RealFftPlanner::<f64>::new();
        let mut cplx = FftPlanner::<f64>::new();
        Self {
            grid,
            r2c: real.plan_fft_forward(grid.nx()),
            c2r: real.plan_fft_inverse(grid.nx()),
            fwd_y: cplx.plan_fft_forward(grid.ny()),
            inv_y: cplx.plan_fft_inverse(grid.ny()),
            fwd_z: cplx.plan_fft_forward(grid.nz()),
            inv_z: cplx.plan_fft_inverse(grid.nz()),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Analysis: coefficients are basis amplitudes (divided by `nx·ny·nz`),
    /// with the self-paired planes symmetrized exactly.
    pub fn forward(&self, f: &PhysicalField) -> Result<SpectralField> {
        if *f.grid() != self.grid {
            return Err(Error::SizeMismatch {
                expected: format!("{:?}", self.grid),
                found: format!("{:?}", f.grid()),
            });
        }
        let g = self.grid;
        let (nx, ny, nxh) = (g.nx(), g.ny(), g.nxh());
        let mut spec = vec![ZERO; g.spectral_len()];
        let input = f.values();

        par::for_each_chunk(&mut spec, g.spectral_plane(), |k, plane| {
            let mut line = vec![0.0; nx];
            let mut scratch = self.r2c.make_scratch_vec();
            for j in 0..ny {
                let off = (k * ny + j) * nx;
                line.copy_from_slice(&input[off..off + nx]);
                self.r2c
                    .process_with_scratch(&mut line, &mut plane[j * nxh..(j + 1) * nxh], &mut scratch)
                    .expect("r2c buffer sizes fixed by plan");
            }
            transform_y(plane, nxh, ny, &*self.fwd_y);
        });
        transform_z(&mut spec, &g, &*self.fwd_z);

        let norm = 1.0 / g.physical_len() as f64;
        for c in &mut spec {
            *c *= norm;
        }
        let mut out = SpectralField::from_coeffs(g, spec)?;
        out.symmetrize();
        Ok(out)
    }

    /// Synthesis. Fails if Hermitian symmetry is broken by more than
    /// [`HERMITIAN_TOL`] relative to the largest coefficient.
    pub fn inverse(&self, f: &SpectralField) -> Result<PhysicalField> {
        if *f.grid() != self.grid {
            return Err(Error::SizeMismatch {
                expected: format!("{:?}", self.grid),
                found: format!("{:?}", f.grid()),
            });
        }
        let dev = f.hermitian_deviation();
        let tol = HERMITIAN_TOL * f.max_abs();
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev, tolerance: tol });
        }
        Ok(self.inverse_unchecked(f))
    }

    pub(crate) fn inverse_unchecked(&self, f: &SpectralField) -> PhysicalField {
        let g = self.grid;
        let (nx, ny, nxh) = (g.nx(), g.ny(), g.nxh());
        let mut spec = f.coeffs().to_vec();
        transform_z(&mut spec, &g, &*self.inv_z);

        let mut out = vec![0.0; g.physical_len()];
        par::for_each_chunk_pair(&mut spec, g.spectral_plane(), &mut out, nx * ny, |_, plane, phys| {
            transform_y(plane, nxh, ny, &*self.inv_y);
            let mut scratch = self.c2r.make_scratch_vec();
            for j in 0..ny {
                let line = &mut plane[j * nxh..(j + 1) * nxh];
                // exact zeros required by c2r; symmetry was checked by the caller
                line[0].im = 0.0;
                line[nxh - 1].im = 0.0;
                self.c2r
                    .process_with_scratch(line, &mut phys[j * nx..(j + 1) * nx], &mut scratch)
                    .expect("c2r buffer sizes fixed by plan");
            }
        });
        PhysicalField::from_values(g, out).expect("length fixed by grid")
    }
}

/// In-place 1D transforms along `y` for every `x` column of one z-plane.
fn transform_y(plane: &mut [Complex64], nxh: usize, ny: usize, fft: &dyn Fft<f64>) {
    let mut cols = vec![ZERO; nxh * ny];
    for j in 0..ny {
        for i in 0..nxh {
            cols[i * ny + j] = plane[j * nxh + i];
        }
    }
    fft.process(&mut cols);
    for j in 0..ny {
        for i in 0..nxh {
            plane[j * nxh + i] = cols[i * ny + j];
        }
    }
}

/// In-place 1D transforms along `z` for every `(x, y)` column.
fn transform_z(spec: &mut [Complex64], g: &Grid, fft: &dyn Fft<f64>) {
    let (ny, nz, nxh) = (g.ny(), g.nz(), g.nxh());
    let plane = g.spectral_plane();
    let mut cols = vec![ZERO; spec.len()];
    {
        let src = &*spec;
        par::for_each_chunk(&mut cols, nxh * nz, |j, row| {
            for i in 0..nxh {
                for k in 0..nz {
                    row[i * nz + k] = src[k * plane + j * nxh + i];
                }
            }
            fft.process(row);
        });
    }
    let cols = &cols;
    par::for_each_chunk(spec, plane, |k, dst| {
        for j in 0..ny {
            for i in 0..nxh {
                dst[j * nxh + i] = cols[(j * nxh + i) * nz + k];
            }
        }
    });
}
