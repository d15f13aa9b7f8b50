//! Finite-difference eigenvalues with two-grid extrapolation.

use std::f64::consts::PI;

use ptwg_core::fd::{
    assemble, decay_rate, discrete_threshold, find_eigenpair, symmetry_defect, EigenClass, EigenOptions,
    EigenPair, StripGrid,
};
use ptwg_core::{Complex64, Error, PerturbationProfile, Result, WaveguideParams};
use serde::Serialize;

use crate::config::FdSettings;

/// Coupling `α₀ + εβ`, or the uniform `α₀` when `beta` is absent.
pub fn coupling<'a>(
    params: &'a WaveguideParams,
    beta: Option<&'a PerturbationProfile>,
    epsilon: f64,
) -> impl Fn(f64) -> f64 + 'a {
    move |x| params.alpha0 + beta.map_or(0.0, |b| epsilon * b.value(x))
}

/// Grid from the settings: `L = l_factor / k_pred` (or `l_absent`), widened so
/// the perturbation keeps clear of the walls.
pub fn auto_grid(
    params: &WaveguideParams,
    beta: Option<&PerturbationProfile>,
    k_pred: Option<f64>,
    s: &FdSettings,
) -> Result<StripGrid> {
    let mut l = match k_pred {
        Some(k) if k > 0.0 => s.l_factor / k,
        _ => s.l_absent,
    };
    if let Some(b) = beta {
        let (lo, hi) = b.support();
        l = l.max(lo.abs().max(hi.abs()) + 10.0 * s.h1 + 1.0);
    }
    StripGrid::with_steps(l, s.h1, params.d / (s.n2 + 1) as f64, params.d)
}

/// `(4 x_{h/2} − x_h) / 3`
pub fn richardson<T>(coarse: T, fine: T) -> T
where
    T: std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T>,
{
    fine * (4.0 / 3.0) - coarse * (1.0 / 3.0)
}

/// Gap separating discrete eigenvalues from the discretized continuum.
pub fn gap_threshold(l: f64) -> f64 {
    2.0 * (PI / (2.0 * l)).powi(2)
}

#[derive(Debug, Clone, Serialize)]
pub struct FdEstimate {
    pub epsilon: f64,
    pub grid: StripGrid,
    /// Extrapolated eigenvalue (fine-grid value without extrapolation).
    pub lambda: Complex64,
    pub lambda_coarse: Complex64,
    pub lambda_fine: Option<Complex64>,
    /// Extrapolated bottom of the discretized essential spectrum.
    pub threshold: f64,
    pub gap: f64,
    pub class: EigenClass,
    pub decay_rate: Option<f64>,
    pub symmetry_defect: f64,
    pub residual: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub pair: EigenPair,
    #[serde(skip)]
    pub finest_grid: StripGrid,
}

fn solve_on(
    params: &WaveguideParams,
    beta: Option<&PerturbationProfile>,
    epsilon: f64,
    grid: &StripGrid,
    shift: Complex64,
    s: &FdSettings,
) -> Result<(EigenPair, f64)> {
    if let Some(b) = beta {
        grid.check_support(b.support())?;
    }
    let a = assemble(params, coupling(params, beta, epsilon), grid)?;
    let opts = EigenOptions {
        tol: s.tol,
        maxit: s.maxit,
        ..Default::default()
    };
    let pair = find_eigenpair(&a, shift, &opts)?;
    let thr = discrete_threshold(params, grid.n2)?;
    Ok((pair, thr))
}

/// Eigenvalue nearest `shift`, on `grid` and (optionally) its refinement.
pub fn refine_eigenvalue(
    params: &WaveguideParams,
    beta: Option<&PerturbationProfile>,
    epsilon: f64,
    grid: &StripGrid,
    shift: Complex64,
    s: &FdSettings,
) -> Result<FdEstimate> {
    let (coarse, thr_c) = solve_on(params, beta, epsilon, grid, shift, s)?;
    let (lambda, threshold, fine, finest, lambda_fine) = if s.richardson {
        let g = grid.refined();
        let (fine, thr_f) = solve_on(params, beta, epsilon, &g, coarse.lambda, s)?;
        let lf = fine.lambda;
        (
            richardson(coarse.lambda, fine.lambda),
            richardson(thr_c, thr_f),
            fine,
            g,
            Some(lf),
        )
    } else {
        (coarse.lambda, thr_c, coarse.clone(), *grid, None)
    };
    let gap = gap_threshold(grid.l);
    let class = if threshold - lambda.re > gap {
        EigenClass::Discrete
    } else {
        EigenClass::ContinuumCluster
    };
    let decay = match decay_rate(&fine, &finest, params) {
        Ok(k) => Some(k),
        Err(Error::Fit(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(FdEstimate {
        epsilon,
        grid: *grid,
        lambda,
        lambda_coarse: coarse.lambda,
        lambda_fine,
        threshold,
        gap,
        class,
        decay_rate: decay,
        symmetry_defect: symmetry_defect(&fine, &finest),
        residual: fine.residual,
        iterations: coarse.iterations + if s.richardson { fine.iterations } else { 0 },
        pair: fine,
        finest_grid: finest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_quadratic_term() {
        let f = |h: f64| 2.0 + 3.0 * h * h;
        assert!((richardson(f(0.1), f(0.05)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn auto_grid_respects_rule_and_support() {
        let p = WaveguideParams::new(PI, -0.5).unwrap();
        let b = PerturbationProfile::bump(0.0, 1.0, 1.0);
        let s = FdSettings::default();
        let g = auto_grid(&p, Some(&b), Some(0.1), &s).unwrap();
        assert!(g.l >= 4.0 / 0.1);
        assert!(g.check_support(b.support()).is_ok());
        let g = auto_grid(&p, Some(&b), Some(10.0), &s).unwrap();
        assert!(g.check_support(b.support()).is_ok());
        let g = auto_grid(&p, None, None, &s).unwrap();
        assert_eq!(g.l, s.l_absent);
    }

    #[test]
    fn uniform_guide_lowest_level() {
        let p = WaveguideParams::new(1.0, 0.4).unwrap();
        let g = StripGrid::new(2.0, 63, 7, 1.0).unwrap();
        let s = FdSettings::default();
        let target = 0.16 + (PI / 4.0).powi(2);
        let est = refine_eigenvalue(&p, None, 0.0, &g, Complex64::new(target - 0.01, 0.0), &s).unwrap();
        let err_c = (est.lambda_coarse.re - target).abs();
        let err_r = (est.lambda.re - target).abs();
        assert!(err_r < err_c / 10.0, "{err_c} {err_r}");
        assert_eq!(est.class, EigenClass::ContinuumCluster);
    }
}
