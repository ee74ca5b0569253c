#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use hm3d::spectral::{Grid, SpectralField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random real field whose modes satisfy `|j_d| <= band[d]`.
pub fn band_limited(grid: Grid, band: [i64; 3], seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    for j1 in 0..=band[0] {
        for j2 in -band[1]..=band[1] {
            for j3 in -band[2]..=band[2] {
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                f.set_mode([j1, j2, j3], c).unwrap();
            }
        }
    }
    // set_mode on the j1 = 0 plane overwrote half of the draws with partners;
    // the result is still a valid Hermitian field.
    f
}

/// All nonzero coefficients keyed by full signed index (both halves).
pub fn full_spectrum(f: &SpectralField) -> HashMap<[i64; 3], Complex64> {
    let g = f.grid();
    let mut out = HashMap::new();
    for idx in 0..g.spectral_len() {
        let c = f.coeffs()[idx];
        if c.norm() == 0.0 {
            continue;
        }
        let m = g.mode_at(idx);
        out.insert(m.j, c);
        out.insert([-m.j[0], -m.j[1], -m.j[2]], c.conj());
    }
    out
}

/// Point value by direct summation of the Fourier series (no FFT).
pub fn eval_direct(spec: &HashMap<[i64; 3], Complex64>, l: f64, x: f64, y: f64, z: f64) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (j, c) in spec {
        let ph = 2.0 * PI * ((j[0] as f64 * x + j[1] as f64 * y) / l + j[2] as f64 * z);
        s += c * Complex64::from_polar(1.0, ph);
    }
    s.re
}

/// `∫_Ω F(x) dx` by midpoint collocation on an `n³` grid, with F given as a
/// closure over physical coordinates.
pub fn quadrature(l: f64, n: usize, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
    let mut s = 0.0;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                s += f(i as f64 * l / n as f64, j as f64 * l / n as f64, k as f64 / n as f64);
            }
        }
    }
    s * l * l / (n * n * n) as f64
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn max_coeff_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// Random valid state: band-limited `w` and `ω`, with the horizontal-mean
/// vorticity removed.
pub fn random_state(grid: Grid, band: [i64; 3], seed: u64) -> hm3d::dynamics::State {
    let w = band_limited(grid, band, seed);
    let mut om = band_limited(grid, band, seed.wrapping_add(0x9e37_79b9));
    om.retain_modes(|m| !m.is_horizontal_mean());
    hm3d::dynamics::State::new(w, om, 0.0).unwrap()
}
