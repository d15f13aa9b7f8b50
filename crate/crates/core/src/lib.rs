//! Spectral toolkit for a planar waveguide `ℝ × (0, d)` whose boundary carries
//! the imaginary Robin condition `∂₂Ψ + iαΨ = 0` on both walls.
//!
//! The crate is split along the computation:
//!
//! * [`model`] and [`profile`]: waveguide parameters, regime classification and
//!   compactly supported coupling perturbations `α = α₀ + εβ`.
//! * [`quadrature`]: composite Gauss–Legendre rules and kink-aware kernel integrals.
//! * [`transverse`]: closed-form transverse modes, the biorthonormal adjoint
//!   family and the mode-series resolvent of the uniform guide.
//! * [`asymptotics`]: the kernels `v_j`, brackets `⟨βv_j⟩`, the constant `τ`,
//!   weak-coupling predictions and sufficient conditions for `τ > 0`.
//! * [`fd`]: an independent finite-difference eigensolver on a truncated strip.

pub mod asymptotics;
pub mod error;
pub mod fd;
pub mod model;
pub mod profile;
pub mod quadrature;
pub mod transverse;

pub use error::{Error, Result};
pub use model::{classify_regime, Regime, WaveguideParams};
pub use num_complex::Complex64;
pub use profile::{PerturbationProfile, Piece, ProfileMoments, Shape};
pub use quadrature::{GaussLegendre, QuadratureSpec};
