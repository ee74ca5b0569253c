//! Binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! | bytes | content                                    |
//! |-------|--------------------------------------------|
//! | 8     | magic `MIMA3D1\n`                          |
//! | 4     | version `u32` (= 1)                        |
//! | 12    | `nx, ny, nz` as `u32`                      |
//! | 32    | `L, Re, eps, time` as `f64`                |
//! | 16·S  | `ŵ` coefficients, `(re, im)` `f64` pairs   |
//! | 16·S  | `ω̂` coefficients, same layout              |
//!
//! `S = (nx/2 + 1)·ny·nz` and coefficient `(ix, iy, iz)` sits at position
//! `(iz·ny + iy)·(nx/2 + 1) + ix`, the solver's half-spectrum order.

use std::path::Path;

use hm3d::dynamics::State;
use hm3d::spectral::{Domain, Grid, SpectralField};
use num_complex::Complex64;

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 8] = b"MIMA3D1\n";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 12 + 32;

/// Header fields as stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub dims: [usize; 3],
    pub l: f64,
    pub re: f64,
    pub eps: f64,
    pub time: f64,
}

pub fn encode(state: &State, domain: &Domain) -> Vec<u8> {
    let g = state.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 32 * g.spectral_len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for n in g.dims() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for x in [g.l(), domain.re, domain.eps, state.time] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for field in [&state.w_hat, &state.omega_hat] {
        for c in field.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<(Header, State)> {
    let bad = |message: String| CliError::Checkpoint { path: path.to_path_buf(), message };
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[..8] != MAGIC {
        return Err(bad("bad magic, not a checkpoint".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version} (this build reads version {VERSION})")));
    }
    let dims = [u32_at(12) as usize, u32_at(16) as usize, u32_at(20) as usize];
    let header = Header { dims, l: f64_at(24), re: f64_at(32), eps: f64_at(40), time: f64_at(48) };
    let grid = Grid::new(header.l, dims[0], dims[1], dims[2]).map_err(|e| bad(e.to_string()))?;
    let s = grid.spectral_len();
    let want = HEADER_LEN + 32 * s;
    if bytes.len() != want {
        return Err(bad(format!("expected {want} bytes for grid {dims:?}, found {}", bytes.len())));
    }
    let read_field = |start: usize| {
        let coeffs: Vec<Complex64> = (0..s)
            .map(|i| Complex64::new(f64_at(start + 16 * i), f64_at(start + 16 * i + 8)))
            .collect();
        SpectralField::from_coeffs(grid, coeffs)
    };
    let w = read_field(HEADER_LEN).map_err(|e| bad(e.to_string()))?;
    let omega = read_field(HEADER_LEN + 16 * s).map_err(|e| bad(e.to_string()))?;
    let state = State::new(w, omega, header.time).map_err(|e| bad(e.to_string()))?;
    Ok((header, state))
}

pub fn save_checkpoint(state: &State, domain: &Domain, path: &Path) -> Result<()> {
    std::fs::write(path, encode(state, domain)).map_err(|e| CliError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(Header, State)> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes, path)
}

/// Loads a checkpoint and checks that its grid and box match `domain`.
pub fn load_checkpoint_for(path: &Path, domain: &Domain) -> Result<State> {
    let (h, state) = load_checkpoint(path)?;
    let g = domain.grid;
    if h.dims != g.dims() || h.l != g.l() {
        return Err(CliError::Checkpoint {
            path: path.to_path_buf(),
            message: format!(
                "grid {:?} with L = {} does not match the configured {:?} with L = {}",
                h.dims,
                h.l,
                g.dims(),
                g.l()
            ),
        });
    }
    Ok(state)
}
