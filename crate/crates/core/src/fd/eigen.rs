use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::banded::{band_lu_factor, BandLu, BandedComplexMatrix};
use crate::error::{Error, Result};

/// Eigenvalue estimate with a unit-norm eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: Complex64,
    pub psi: Vec<Complex64>,
    /// `‖AΨ − λΨ‖ / ‖Ψ‖`
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    pub maxit: usize,
    /// Relative change of the Rayleigh quotient below which the shift is moved onto it.
    pub stabilized: f64,
    /// Upper limit on refactorizations at updated shifts.
    pub max_refactor: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            maxit: 300,
            stabilized: 1e-4,
            max_refactor: 8,
        }
    }
}

/// Iterations after which an unsettled shift is moved anyway.
const STALL_PERIOD: usize = 20;

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn factor_near(a: &BandedComplexMatrix, sigma: Complex64) -> Result<BandLu> {
    match band_lu_factor(a, sigma) {
        Err(Error::SingularShift { .. }) => {
            let bump = 1e-8 * sigma.norm().max(1.0);
            band_lu_factor(a, sigma + bump)
        }
        r => r,
    }
}

fn start_vector(n: usize) -> Vec<Complex64> {
    // smooth, nonvanishing and deterministic
    (0..n)
        .map(|i| Complex64::new(1.0 + 0.25 * ((i as f64) * 0.618).sin(), 0.0))
        .collect()
}

/// Shifted inverse iteration that hands over to Rayleigh-quotient shifts
/// once the eigenvalue estimate settles.
pub fn find_eigenpair(a: &BandedComplexMatrix, sigma: Complex64, opts: &EigenOptions) -> Result<EigenPair> {
    let n = a.n();
    let mut lu = factor_near(a, sigma)?;
    let mut x = start_vector(n);
    let nx = norm(&x);
    x.iter_mut().for_each(|z| *z /= nx);
    let mut prev: Option<Complex64> = None;
    let mut refactors = 0;
    let mut best: Option<EigenPair> = None;
    for it in 1..=opts.maxit {
        lu.solve(&mut x);
        let nx = norm(&x);
        if !(nx.is_finite() && nx > 0.0) {
            break;
        }
        x.iter_mut().for_each(|z| *z /= nx);
        let ax = a.matvec(&x);
        let lambda: Complex64 = x.iter().zip(&ax).map(|(xi, yi)| xi.conj() * yi).sum();
        let residual = ax
            .iter()
            .zip(&x)
            .map(|(y, xi)| (y - lambda * xi).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(EigenPair {
                lambda,
                psi: x.clone(),
                residual,
                iterations: it,
            });
        }
        if residual < opts.tol {
            return Ok(best.unwrap());
        }
        let settled = prev.is_some_and(|p| (lambda - p).norm() < opts.stabilized * lambda.norm().max(1.0));
        let moved = (lambda - lu.sigma()).norm() > 1e-12 * lambda.norm().max(1.0);
        // a shift equidistant from competing eigenvalues stalls; commit to the current estimate
        let stalled = it % STALL_PERIOD == 0;
        if (settled || stalled) && moved && refactors < opts.max_refactor {
            if let Ok(f) = factor_near(a, lambda) {
                lu = f;
                refactors += 1;
            }
        }
        prev = Some(lambda);
    }
    let best = best.ok_or_else(|| Error::Fit("inverse iteration produced no finite iterate".into()))?;
    Err(Error::MaxIterations {
        iterations: opts.maxit,
        residual: best.residual,
        best: Box::new(best),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenClass {
    Discrete,
    ContinuumCluster,
}

/// Shift lattice and classification rule for a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
    /// Threshold of the (discretized) essential spectrum.
    pub threshold: f64,
    /// Eigenvalues deeper than this below `threshold` count as discrete.
    pub gap: f64,
}

impl ScanSpec {
    pub fn shifts(&self) -> Vec<Complex64> {
        let lin = |(a, b): (f64, f64), n: usize, i: usize| {
            if n <= 1 {
                0.5 * (a + b)
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.n_re * self.n_im);
        for i in 0..self.n_re {
            for k in 0..self.n_im {
                out.push(Complex64::new(lin(self.re, self.n_re, i), lin(self.im, self.n_im, k)));
            }
        }
        out
    }

    pub fn classify(&self, lambda: Complex64) -> EigenClass {
        if self.threshold - lambda.re > self.gap {
            EigenClass::Discrete
        } else {
            EigenClass::ContinuumCluster
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScannedEigenvalue {
    pub lambda: Complex64,
    pub residual: f64,
    pub class: EigenClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub eigenvalues: Vec<ScannedEigenvalue>,
    pub shifts: usize,
    pub unconverged: usize,
    /// Unconverged iterates whose Rayleigh quotient falls in the discrete zone.
    pub suspect: usize,
    pub threshold: f64,
    pub gap: f64,
}

impl ScanReport {
    pub fn discrete(&self) -> impl Iterator<Item = &ScannedEigenvalue> {
        self.eigenvalues.iter().filter(|e| e.class == EigenClass::Discrete)
    }

    /// No discrete eigenvalue was found and no unconverged iterate points at one.
    pub fn absent(&self) -> bool {
        self.discrete().next().is_none() && self.suspect == 0
    }
}

/// Runs [`find_eigenpair`] from every shift of the lattice in parallel and
/// merges eigenvalues closer than `1e-8`.
pub fn shift_scan(a: &BandedComplexMatrix, spec: &ScanSpec, opts: &EigenOptions) -> ScanReport {
    let shifts = spec.shifts();
    let results: Vec<Result<EigenPair>> = shifts.par_iter().map(|&s| find_eigenpair(a, s, opts)).collect();
    let mut eigenvalues: Vec<ScannedEigenvalue> = Vec::new();
    let (mut unconverged, mut suspect) = (0, 0);
    for r in results {
        match r {
            Ok(p) => {
                if eigenvalues.iter().all(|e| (e.lambda - p.lambda).norm() >= 1e-8) {
                    eigenvalues.push(ScannedEigenvalue {
                        lambda: p.lambda,
                        residual: p.residual,
                        class: spec.classify(p.lambda),
                    });
                }
            }
            Err(Error::MaxIterations { best, .. }) => {
                unconverged += 1;
                if spec.classify(best.lambda) == EigenClass::Discrete {
                    suspect += 1;
                }
            }
            Err(_) => unconverged += 1,
        }
    }
    ScanReport {
        eigenvalues,
        shifts: shifts.len(),
        unconverged,
        suspect,
        threshold: spec.threshold,
        gap: spec.gap,
    }
}
