//! Fourier representation on the periodic box `[0, L]² × [0, 1]`.

mod domain;
mod fft;
mod field;
mod ops;

pub use domain::{Domain, Grid, Mode};
pub use fft::{Transform, HERMITIAN_TOL};
pub use field::{PhysicalField, SpectralField};
pub use ops::{curl_h, grid_size_for_radius, max_index_radius, GAUGE_TOL};
