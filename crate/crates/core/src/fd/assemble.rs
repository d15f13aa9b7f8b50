use num_complex::Complex64;

use super::banded::BandedComplexMatrix;
use super::grid::StripGrid;
use crate::error::{Error, Result};
use crate::model::WaveguideParams;
use crate::profile::PerturbationProfile;

/// Sign of the coupling term in the top-wall condition.
///
/// `SameSign` imposes `∂₂Ψ + iαΨ = 0` at both walls. `OutwardNormal` writes the
/// top condition with the outward normal, `−∂₂Ψ + iαΨ = 0`, which is a
/// different (non-PT-symmetric) operator; it exists to exercise diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundarySign {
    #[default]
    SameSign,
    OutwardNormal,
}

impl BoundarySign {
    fn top(self) -> f64 {
        match self {
            BoundarySign::SameSign => 1.0,
            BoundarySign::OutwardNormal => -1.0,
        }
    }
}

/// Row coefficients of `−∂₂²` at the transverse nodes `0..=n2+1`.
///
/// Interior nodes use the three-point stencil. At the walls the derivative
/// condition is folded into a one-sided closure that is second order in the
/// residual:
/// `x₂ = 0:  (7Ψ₀ − 8Ψ₁ + Ψ₂ − 6iαhΨ₀) / 2h²`,
/// `x₂ = d:  (7Ψ_N − 8Ψ_{N−1} + Ψ_{N−2} + 6iαhΨ_N) / 2h²`.
fn transverse_row(alpha: f64, h: f64, k: usize, last: usize, sign: BoundarySign) -> [(usize, Complex64); 3] {
    let r = |v: f64| Complex64::new(v, 0.0);
    let inv = 1.0 / (h * h);
    if k == 0 {
        [
            (0, Complex64::new(3.5 * inv, -3.0 * alpha / h)),
            (1, r(-4.0 * inv)),
            (2, r(0.5 * inv)),
        ]
    } else if k == last {
        [
            (last, Complex64::new(3.5 * inv, 3.0 * sign.top() * alpha / h)),
            (last - 1, r(-4.0 * inv)),
            (last - 2, r(0.5 * inv)),
        ]
    } else {
        [(k - 1, r(-inv)), (k, r(2.0 * inv)), (k + 1, r(-inv))]
    }
}

/// Discrete transverse operator on `n2 + 2` nodes of `[0, d]` for constant `α`.
pub fn transverse_matrix(alpha: f64, d: f64, n2: usize) -> BandedComplexMatrix {
    let m = n2 + 2;
    let h = d / (n2 + 1) as f64;
    let mut a = BandedComplexMatrix::zeros(m, 2, 2);
    for k in 0..m {
        for (c, v) in transverse_row(alpha, h, k, m - 1, BoundarySign::SameSign) {
            a.add(k, c, v);
        }
    }
    a
}

/// Applies the discrete transverse operator to nodal values `u₀..u_{n2+1}`.
pub fn transverse_apply(alpha: f64, d: f64, u: &[Complex64], sign: BoundarySign) -> Vec<Complex64> {
    let m = u.len();
    assert!(m >= 3);
    let h = d / (m - 1) as f64;
    (0..m)
        .map(|k| {
            transverse_row(alpha, h, k, m - 1, sign)
                .iter()
                .map(|&(c, v)| v * u[c])
                .sum()
        })
        .collect()
}

/// Discretizes `−Δ` on the grid with coupling `alpha_fn(x₁)` on both walls.
pub fn assemble<F>(params: &WaveguideParams, alpha_fn: F, grid: &StripGrid) -> Result<BandedComplexMatrix>
where
    F: Fn(f64) -> f64,
{
    assemble_with(params, alpha_fn, grid, BoundarySign::SameSign)
}

/// Assembly for `α = α₀ + εβ`, checking that `β` stays clear of the walls.
pub fn assemble_profile(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    epsilon: f64,
    grid: &StripGrid,
) -> Result<BandedComplexMatrix> {
    grid.check_support(beta.support())?;
    let a0 = params.alpha0;
    assemble(params, |x| a0 + epsilon * beta.value(x), grid)
}

pub fn assemble_with<F>(
    params: &WaveguideParams,
    alpha_fn: F,
    grid: &StripGrid,
    sign: BoundarySign,
) -> Result<BandedComplexMatrix>
where
    F: Fn(f64) -> f64,
{
    if (grid.d - params.d).abs() > 1e-12 * params.d {
        return Err(Error::Grid(format!(
            "grid width {} differs from waveguide width {}",
            grid.d, params.d
        )));
    }
    let h1 = grid.h1();
    let h2 = grid.h2();
    let m = grid.column_len();
    let alphas: Vec<f64> = (0..grid.n1).map(|i| alpha_fn(grid.x1(i))).collect();
    let near_wall = (0..grid.n1.min(5)).chain(grid.n1.saturating_sub(5)..grid.n1);
    for i in near_wall {
        if (alphas[i] - params.alpha0).abs() > 1e-14 * params.alpha0.abs().max(1.0) {
            return Err(Error::Grid(format!(
                "coupling differs from alpha0 at x1 = {} (within 5 steps of the wall)",
                grid.x1(i)
            )));
        }
    }
    let mut a = BandedComplexMatrix::zeros(grid.dim(), m, m);
    let c1 = Complex64::new(1.0 / (h1 * h1), 0.0);
    for (i, &alpha) in alphas.iter().enumerate() {
        for k in 0..m {
            let row = grid.index(i, k);
            a.add(row, row, 2.0 * c1);
            if i > 0 {
                a.add(row, row - m, -c1);
            }
            if i + 1 < grid.n1 {
                a.add(row, row + m, -c1);
            }
            for (c, v) in transverse_row(alpha, h2, k, m - 1, sign) {
                a.add(row, grid.index(i, c), v);
            }
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transverse::{mu_j, psi_eval};

    fn residual_max(params: &WaveguideParams, j: usize, n2: usize, sign: BoundarySign) -> f64 {
        let d = params.d;
        let m = n2 + 2;
        let h = d / (n2 + 1) as f64;
        let u: Vec<Complex64> = (0..m).map(|k| psi_eval(params, j, k as f64 * h).unwrap()).collect();
        let mu2 = mu_j(params, j).unwrap().powi(2);
        transverse_apply(params.alpha0, d, &u, sign)
            .iter()
            .zip(&u)
            .map(|(tu, u)| (tu - mu2 * u).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn interior_stencil_entries() {
        let p = WaveguideParams::new(1.0, 0.3).unwrap();
        let g = StripGrid::new(2.0, 7, 4, 1.0).unwrap();
        let a = assemble(&p, |_| 0.3, &g).unwrap();
        let (h1, h2) = (g.h1(), g.h2());
        let r = g.index(3, 2);
        assert!((a.get(r, r).re - (2.0 / (h1 * h1) + 2.0 / (h2 * h2))).abs() < 1e-12);
        assert_eq!(a.get(r, r).im, 0.0);
        assert!((a.get(r, r - 1).re + 1.0 / (h2 * h2)).abs() < 1e-12);
        assert!((a.get(r, r + 6).re + 1.0 / (h1 * h1)).abs() < 1e-12);
        assert_eq!(a.kl(), 6);
        assert_eq!(a.ku(), 6);
    }

    #[test]
    fn zero_coupling_is_real() {
        let p = WaveguideParams::new(1.0, 0.0).unwrap();
        let g = StripGrid::new(1.0, 5, 5, 1.0).unwrap();
        let a = assemble(&p, |_| 0.0, &g).unwrap();
        let dense = a.to_dense();
        assert!(dense.iter().flatten().all(|z| z.im == 0.0));
    }

    #[test]
    fn reversed_coupling_conjugates() {
        let p = WaveguideParams::new(1.0, 0.4).unwrap();
        let q = WaveguideParams::new(1.0, -0.4).unwrap();
        let g = StripGrid::new(3.0, 20, 6, 1.0).unwrap();
        let bump = |x: f64| if x.abs() < 1.0 { 1.0 - x * x } else { 0.0 };
        let a = assemble(&p, |x| 0.4 + 0.2 * bump(x), &g).unwrap();
        let b = assemble(&q, |x| -0.4 - 0.2 * bump(x), &g).unwrap();
        assert_eq!(a.conj(), b);
    }

    #[test]
    fn transverse_residual_is_second_order() {
        for (d, a0) in [(1.0, 0.3), (std::f64::consts::PI, 0.5), (1.0, 1.7 * std::f64::consts::PI)] {
            let p = WaveguideParams::new(d, a0).unwrap();
            for j in 0..=5 {
                let r1 = residual_max(&p, j, 39, BoundarySign::SameSign);
                let r2 = residual_max(&p, j, 79, BoundarySign::SameSign);
                let ratio = r1 / r2;
                assert!((3.2..=4.8).contains(&ratio), "d={d} a0={a0} j={j} ratio={ratio}");
            }
        }
    }

    #[test]
    fn flipped_sign_breaks_transverse_residual() {
        let p = WaveguideParams::new(1.0, 0.3).unwrap();
        let r1 = residual_max(&p, 0, 39, BoundarySign::OutwardNormal);
        let r2 = residual_max(&p, 0, 79, BoundarySign::OutwardNormal);
        assert!(r1 / r2 < 3.0);
    }

    #[test]
    fn coupling_near_wall_rejected() {
        let p = WaveguideParams::new(1.0, 0.3).unwrap();
        let g = StripGrid::new(2.0, 19, 4, 1.0).unwrap();
        assert!(matches!(assemble(&p, |x| 0.3 + x, &g), Err(Error::Grid(_))));
        let beta = PerturbationProfile::bump(0.0, 1.9, 1.0);
        assert!(matches!(assemble_profile(&p, &beta, 0.1, &g), Err(Error::Grid(_))));
    }
}
