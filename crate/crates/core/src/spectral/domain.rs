use std::f64::consts::PI;

use crate::error::{Error, ModeIndex, Result};

/// Geometry of the periodic box `[0, L]² × [0, 1]` and its collocation grid.
///
/// Spectral storage is the real-FFT half spectrum: `x` keeps indices
/// `0..=nx/2`, `y` and `z` keep the full FFT ordering. Coefficient `(ix, iy, iz)`
/// lives at flat index `(iz * ny + iy) * (nx/2 + 1) + ix`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    l: f64,
    nx: usize,
    ny: usize,
    nz: usize,
}

impl Grid {
    pub fn new(l: f64, nx: usize, ny: usize, nz: usize) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidDomain(format!("L must be finite and > 0, got {l}")));
        }
        for (name, n) in [("nx", nx), ("ny", ny), ("nz", nz)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidDomain(format!(
                    "{name} must be even and >= 4, got {n}"
                )));
            }
        }
        Ok(Self { l, nx, ny, nz })
    }

    /// Cube grid `n³` on a box of side `l`.
    pub fn cube(l: f64, n: usize) -> Result<Self> {
        Self::new(l, n, n, n)
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Vertical period; always 1.
    pub fn lz(&self) -> f64 {
        1.0
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    /// Number of stored x indices in the half spectrum.
    pub fn nxh(&self) -> usize {
        self.nx / 2 + 1
    }

    pub fn physical_len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn spectral_len(&self) -> usize {
        self.nxh() * self.ny * self.nz
    }

    /// Length of one z-plane in spectral storage.
    pub fn spectral_plane(&self) -> usize {
        self.nxh() * self.ny
    }

    pub fn volume(&self) -> f64 {
        self.l * self.l * self.lz()
    }

    /// Same box with a different grid.
    pub fn with_dims(&self, nx: usize, ny: usize, nz: usize) -> Result<Self> {
        Self::new(self.l, nx, ny, nz)
    }

    /// Largest index kept by the 2/3 rule in each direction: `3k < n`.
    pub fn dealias_cutoff(&self) -> [i64; 3] {
        [
            ((self.nx - 1) / 3) as i64,
            ((self.ny - 1) / 3) as i64,
            ((self.nz - 1) / 3) as i64,
        ]
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.l / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.l / self.ny as f64
    }

    pub fn z(&self, k: usize) -> f64 {
        k as f64 / self.nz as f64
    }

    /// Signed wavenumber index for a full-FFT position; the Nyquist
    /// position maps to `-n/2`.
    pub(crate) fn signed(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Mode stored at flat spectral index `idx`.
    pub fn mode_at(&self, idx: usize) -> Mode {
        let nxh = self.nxh();
        let ix = idx % nxh;
        let iy = (idx / nxh) % self.ny;
        let iz = idx / (nxh * self.ny);
        self.mode(ix, iy, iz)
    }

    pub fn mode(&self, ix: usize, iy: usize, iz: usize) -> Mode {
        let j = [
            ix as i64,
            Self::signed(iy, self.ny),
            Self::signed(iz, self.nz),
        ];
        Mode::new(
            j,
            self.l,
            [ix == self.nx / 2, iy == self.ny / 2, iz == self.nz / 2],
        )
    }

    /// Locates mode `j` in half-spectrum storage. Returns the flat index and
    /// whether the stored value must be conjugated to obtain `coeff(j)`.
    /// `None` when `j` is not representable on this grid.
    pub fn locate(&self, j: ModeIndex) -> Option<(usize, bool)> {
        let (j, conj) = if j[0] < 0 { ([-j[0], -j[1], -j[2]], true) } else { (j, false) };
        let half = |n: usize| n as i64 / 2;
        if j[0] > half(self.nx) {
            return None;
        }
        let wrap = |v: i64, n: usize| -> Option<usize> {
            let h = half(n);
            if v < -h || v >= h {
                // +n/2 aliases to the stored -n/2 position
                if v == h {
                    Some(h as usize)
                } else {
                    None
                }
            } else {
                Some(v.rem_euclid(n as i64) as usize)
            }
        };
        let iy = wrap(j[1], self.ny)?;
        let iz = wrap(j[2], self.nz)?;
        Some(((iz * self.ny + iy) * self.nxh() + j[0] as usize, conj))
    }

    /// Flat index of the Hermitian partner `-j` for a mode on a self-paired
    /// x plane (`ix == 0` or `ix == nx/2`).
    pub(crate) fn partner(&self, ix: usize, iy: usize, iz: usize) -> usize {
        let py = (self.ny - iy) % self.ny;
        let pz = (self.nz - iz) % self.nz;
        (pz * self.ny + py) * self.nxh() + ix
    }

    /// Multiplicity of a stored coefficient in the full spectrum.
    pub(crate) fn weight(&self, ix: usize) -> f64 {
        if ix == 0 || ix == self.nx / 2 {
            1.0
        } else {
            2.0
        }
    }
}

/// A Fourier mode `e_j = exp(2πi[(j1 x + j2 y)/L + j3 z])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub j: ModeIndex,
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
    /// `kx² + ky²`
    pub kh2: f64,
    /// Per-direction flag: index sits on the grid's Nyquist position.
    pub nyquist: [bool; 3],
}

impl Mode {
    pub fn new(j: ModeIndex, l: f64, nyquist: [bool; 3]) -> Self {
        let kx = 2.0 * PI * j[0] as f64 / l;
        let ky = 2.0 * PI * j[1] as f64 / l;
        let kz = 2.0 * PI * j[2] as f64;
        Self {
            j,
            kx,
            ky,
            kz,
            kh2: kx * kx + ky * ky,
            nyquist,
        }
    }

    /// Mode on an unbounded lattice (no Nyquist positions).
    pub fn free(j: ModeIndex, l: f64) -> Self {
        Self::new(j, l, [false; 3])
    }

    pub fn is_horizontal_mean(&self) -> bool {
        self.j[0] == 0 && self.j[1] == 0
    }

    /// `|j|²` in index space.
    pub fn index_norm2(&self) -> i64 {
        self.j.iter().map(|v| v * v).sum()
    }

    pub fn kz2(&self) -> f64 {
        self.kz * self.kz
    }
}

/// Physical and discretization parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub grid: Grid,
    /// Reynolds number; `f64::INFINITY` switches horizontal viscosity off.
    pub re: f64,
    /// Vertical dissipation strength; enters the model squared.
    pub eps: f64,
    /// Radius `m` of the ball truncation `|j| <= m`, if any.
    pub galerkin_radius: Option<u32>,
}

impl Domain {
    pub fn new(grid: Grid, re: f64, eps: f64) -> Result<Self> {
        if re.is_nan() || re <= 0.0 {
            return Err(Error::InvalidDomain(format!("Re must be > 0, got {re}")));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidDomain(format!("eps must be finite and >= 0, got {eps}")));
        }
        Ok(Self {
            grid,
            re,
            eps,
            galerkin_radius: None,
        })
    }

    pub fn with_galerkin_radius(mut self, m: Option<u32>) -> Self {
        self.galerkin_radius = m;
        self
    }

    pub fn inv_re(&self) -> f64 {
        1.0 / self.re
    }

    pub fn eps2(&self) -> f64 {
        self.eps * self.eps
    }

    /// Whether mode `m` is carried by the discretization: inside the 2/3-rule
    /// box and, when set, inside the Galerkin ball.
    pub fn is_active(&self, m: &Mode) -> bool {
        let k = self.grid.dealias_cutoff();
        let in_box = (0..3).all(|d| m.j[d].abs() <= k[d]);
        let in_ball = self
            .galerkin_radius
            .map_or(true, |r| m.index_norm2() <= (r as i64) * (r as i64));
        in_box && in_ball
    }
}
