//! Pseudo-spectral simulation of the three-dimensional Hasegawa-Mima model
//! with horizontal viscosity and weak vertical dissipation,
//!
//! ```text
//! ∂t w + u·∇h w − ∂z ψ = (1/Re) Δh w
//! ∂t ω + u·∇h ω − ∂z w = (1/Re) Δh ω + ε² ∂zz ψ
//! ψ = (−Δh)⁻¹ ω,  u = (ψy, −ψx)
//! ```
//!
//! on `[0, L]² × [0, 1]` with periodic boundaries, together with the runtime
//! audits (energy equality, enstrophy inequality, H¹ boundedness) and an
//! inequality lab for the anisotropic trilinear estimate behind them.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod inequality;
pub mod integrator;
pub mod linalg;
pub mod par;
pub mod profiles;
pub mod spectral;

pub use error::{Error, Result};
