//! Named initial conditions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::spectral::{Domain, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Zero,
    /// `w = ω = A cos(2π(j1 x/L + j2 y/L + j3 z))`; `ω` is dropped on
    /// horizontal-mean modes. Advection vanishes identically.
    SingleMode([i64; 3]),
    /// `ω = A cos(kx) cos(ky) cos(2πz)`, `w = A sin(kx) cos(2πz)` with
    /// `k = 2π/L`: a few interacting modes.
    TaylorGreenH,
    /// Random phases with amplitude `(1 + |j|)^{-α}` on every carried mode,
    /// rescaled to `rms(w) = rms(u) = A`. `seed = None` defers to the run seed.
    RandomSmooth { alpha: f64, seed: Option<u64> },
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => f.write_str("zero"),
            Profile::SingleMode(j) => write!(f, "single_mode({},{},{})", j[0], j[1], j[2]),
            Profile::TaylorGreenH => f.write_str("taylor_green_h"),
            Profile::RandomSmooth { alpha, seed: None } => write!(f, "random_smooth({alpha})"),
            Profile::RandomSmooth { alpha, seed: Some(s) } => write!(f, "random_smooth({alpha},{s})"),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("unknown initial profile `{s}`"));
        let (name, args) = match s.find('(') {
            Some(i) => {
                let rest = s[i + 1..].strip_suffix(')').ok_or_else(bad)?;
                let args: Vec<&str> = rest.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
                (s[..i].trim(), args)
            }
            None => (s, Vec::new()),
        };
        let num = |a: &str| a.parse::<f64>().map_err(|_| bad());
        match (name, args.len()) {
            ("zero", 0) => Ok(Profile::Zero),
            ("taylor_green_h", 0) => Ok(Profile::TaylorGreenH),
            ("single_mode", 3) => {
                let mut j = [0i64; 3];
                for (d, a) in j.iter_mut().zip(&args) {
                    *d = a.parse().map_err(|_| bad())?;
                }
                Ok(Profile::SingleMode(j))
            }
            ("random_smooth", 1) => Ok(Profile::RandomSmooth { alpha: non_negative(num(args[0])?)?, seed: None }),
            ("random_smooth", 2) => Ok(Profile::RandomSmooth {
                alpha: non_negative(num(args[0])?)?,
                seed: Some(args[1].parse().map_err(|_| bad())?),
            }),
            _ => Err(bad()),
        }
    }
}

fn non_negative(a: f64) -> Result<f64> {
    if a >= 0.0 && a.is_finite() {
        Ok(a)
    } else {
        Err(Error::InvalidArgument(format!("decay exponent must be >= 0, got {a}")))
    }
}

impl Profile {
    /// Initial state at `t = 0`, restricted to the modes `domain` carries.
    /// `run_seed` is used when the profile carries no seed of its own.
    pub fn build(&self, domain: &Domain, amplitude: f64, run_seed: u64) -> Result<State> {
        let g = domain.grid;
        let mut w = SpectralField::zeros(g);
        let mut om = SpectralField::zeros(g);
        match *self {
            Profile::Zero => {}
            Profile::SingleMode(j) => {
                let c = Complex64::new(0.5 * amplitude, 0.0);
                w.set_mode(j, c)?;
                if j[0] != 0 || j[1] != 0 {
                    om.set_mode(j, c)?;
                }
                let (idx, _) = g.locate(j).expect("set_mode accepted the index");
                if !domain.is_active(&g.mode_at(idx)) {
                    return Err(Error::InvalidArgument(format!(
                        "mode {j:?} is outside the resolved modes of this domain"
                    )));
                }
            }
            Profile::TaylorGreenH => {
                // cos a cos b cos c = ⅛ Σ over sign choices; store the j1 = 1 half
                let a = 0.125 * amplitude;
                for (j2, j3) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    om.set_mode([1, j2, j3], Complex64::new(a, 0.0))?;
                }
                // sin(kx) cos(2πz): −i/4 at (1,0,±1)
                for j3 in [1, -1] {
                    w.set_mode([1, 0, j3], Complex64::new(0.0, -0.25 * amplitude))?;
                }
            }
            Profile::RandomSmooth { alpha, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(run_seed));
                for f in [&mut w, &mut om] {
                    for idx in 0..g.spectral_len() {
                        let m = g.mode_at(idx);
                        // draw for every stored slot so the stream does not
                        // depend on which modes are kept
                        let theta = rng.gen_range(0.0..2.0 * PI);
                        if m.index_norm2() == 0 || !domain.is_active(&m) {
                            continue;
                        }
                        let amp = (1.0 + (m.index_norm2() as f64).sqrt()).powf(-alpha);
                        f.coeffs_mut()[idx] = Complex64::from_polar(amp, theta);
                    }
                    f.symmetrize();
                }
                om.retain_modes(|m| !m.is_horizontal_mean());
                let vol = g.volume();
                let rms_w = (w.l2_norm_sq() / vol).sqrt();
                let rms_u = (om.weighted_sum_sq(|m| if m.kh2 > 0.0 { 1.0 / m.kh2 } else { 0.0 })).sqrt();
                if rms_w > 0.0 {
                    w.scale(amplitude / rms_w);
                }
                if rms_u > 0.0 {
                    om.scale(amplitude / rms_u);
                }
            }
        }
        let mut s = State::new(w, om, 0.0)?;
        s.restrict_to(domain);
        Ok(s)
    }
}
