//! Finite-difference oracle on the truncated strip `[−L, L] × [0, d]`.
//!
//! The operator `−Δ` with `∂₂Ψ + iα(x₁)Ψ = 0` on both horizontal walls and
//! Dirichlet walls at `x₁ = ±L` is discretized on a uniform grid, stored as a
//! complex band matrix and probed by shifted inverse iteration.

mod analysis;
mod assemble;
mod banded;
mod eigen;
mod grid;

pub use analysis::{decay_rate, discrete_threshold, mode0_amplitude, symmetry_defect, write_field};
pub use assemble::{assemble, assemble_profile, assemble_with, transverse_apply, transverse_matrix, BoundarySign};
pub use banded::{band_lu_factor, BandLu, BandedComplexMatrix};
pub use eigen::{find_eigenpair, shift_scan, EigenClass, EigenOptions, EigenPair, ScanReport, ScanSpec, ScannedEigenvalue};
pub use grid::StripGrid;
