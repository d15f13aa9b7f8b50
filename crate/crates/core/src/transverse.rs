//! Closed-form spectral data of the transverse operator `−d²/dx₂²` on `(0, d)`
//! with `ψ′ + iα₀ψ = 0` at both ends, its adjoint family, and the mode-series
//! resolvent of the uniform guide.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Regime, WaveguideParams};
use crate::quadrature::{kink_breaks, sorted_breaks, QuadratureSpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `μ_j`. Signed: `μ₀ = α₀` below the critical coupling, `μ₁ = α₀` above it.
pub fn mu_j(params: &WaveguideParams, j: usize) -> Result<f64> {
    let regime = params.ensure_admissible()?;
    let pd = PI / params.d;
    Ok(match (j, regime) {
        (0, Regime::Neumann | Regime::Subcritical) => params.alpha0,
        (0, _) => pd,
        (1, Regime::Neumann | Regime::Subcritical) => pd,
        (1, _) => params.alpha0,
        (j, _) => pd * j as f64,
    })
}

/// Index `j₀` of the mode whose frequency equals `α₀`.
fn j0_index(regime: Regime) -> usize {
    match regime {
        Regime::Supercritical => 1,
        _ => 0,
    }
}

/// `ψ_j(x₂) = cos(μ_j x₂) − i(α₀/μ_j) sin(μ_j x₂)`, with `ψ₀ ≡ 1` at `α₀ = 0`.
pub fn psi_eval(params: &WaveguideParams, j: usize, x2: f64) -> Result<Complex64> {
    if !(0.0..=params.d).contains(&x2) {
        return Err(Error::Domain { x2, d: params.d });
    }
    let mu = mu_j(params, j)?;
    Ok(psi_unchecked(params.alpha0, mu, x2))
}

#[inline]
fn psi_unchecked(alpha0: f64, mu: f64, x2: f64) -> Complex64 {
    if mu == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, c) = (mu * x2).sin_cos();
    Complex64::new(c, -alpha0 / mu * s)
}

/// Normalisation constant `A_j` making `(ψ_j, φ_k) = δ_jk`.
pub fn a_j(params: &WaveguideParams, j: usize) -> Result<Complex64> {
    let regime = params.ensure_admissible()?;
    let mu = mu_j(params, j)?;
    let (a0, d) = (params.alpha0, params.d);
    if j == j0_index(regime) {
        if a0 == 0.0 {
            return Ok(Complex64::new(1.0 / d, 0.0));
        }
        let denom = Complex64::new(1.0, 0.0) - (Complex64::new(0.0, -2.0 * a0 * d)).exp();
        return Ok(I * (2.0 * a0) / denom);
    }
    Ok(Complex64::new(2.0 * mu * mu / ((mu * mu - a0 * a0) * d), 0.0))
}

/// `φ_j(x₂) = conj(A_j ψ_j(x₂))`, the eigenfunctions of the adjoint (coupling `−α₀`).
pub fn phi_eval(params: &WaveguideParams, j: usize, x2: f64) -> Result<Complex64> {
    Ok((a_j(params, j)? * psi_eval(params, j, x2)?).conj())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseMode {
    pub j: usize,
    pub mu: f64,
    pub a: Complex64,
}

impl TransverseMode {
    #[inline]
    pub fn psi(&self, alpha0: f64, x2: f64) -> Complex64 {
        psi_unchecked(alpha0, self.mu, x2)
    }

    #[inline]
    pub fn phi(&self, alpha0: f64, x2: f64) -> Complex64 {
        (self.a * self.psi(alpha0, x2)).conj()
    }
}

/// Modes `j = 0..=J` of an admissible waveguide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBasis {
    pub params: WaveguideParams,
    pub modes: Vec<TransverseMode>,
}

impl ModeBasis {
    pub fn new(params: WaveguideParams, j_max: usize) -> Result<Self> {
        params.ensure_admissible()?;
        let modes = (0..=j_max)
            .map(|j| {
                Ok(TransverseMode {
                    j,
                    mu: mu_j(&params, j)?,
                    a: a_j(&params, j)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { params, modes })
    }

    /// Truncation order `J`.
    pub fn j_max(&self) -> usize {
        self.modes.len() - 1
    }

    pub fn psi(&self, j: usize, x2: f64) -> Complex64 {
        self.modes[j].psi(self.params.alpha0, x2)
    }

    pub fn phi(&self, j: usize, x2: f64) -> Complex64 {
        self.modes[j].phi(self.params.alpha0, x2)
    }

    /// Gram matrix `G_jk = ∫₀^d ψ_j conj(φ_k)`.
    pub fn biortho_gram(&self, quad: &QuadratureSpec) -> Vec<Vec<Complex64>> {
        let n = self.modes.len();
        let breaks = [0.0, self.params.d];
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| quad.integrate(&breaks, |x| self.psi(j, x) * self.phi(k, x).conj()))
                    .collect()
            })
            .collect()
    }

    /// `c_j = ∫₀^d f conj(φ_j)` for all modes of the basis.
    pub fn expand_coeffs<F>(&self, f: F, quad: &QuadratureSpec) -> Vec<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        let rule = quad.rule();
        let mut nodes = Vec::new();
        let h = self.params.d / quad.subdivisions as f64;
        for s in 0..quad.subdivisions {
            nodes.extend(rule.mapped(s as f64 * h, (s + 1) as f64 * h));
        }
        let samples: Vec<Complex64> = nodes.iter().map(|&(x, _)| f(x)).collect();
        (0..self.modes.len())
            .map(|j| {
                nodes
                    .iter()
                    .zip(&samples)
                    .map(|(&(x, w), &fx)| fx * self.phi(j, x).conj() * w)
                    .sum()
            })
            .collect()
    }

    /// `Σ_j c_j ψ_j(x₂)`.
    pub fn reconstruct(&self, coeffs: &[Complex64], x2: f64) -> Complex64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.psi(j, x2))
            .sum()
    }

    /// Resolvent of the uniform guide applied to `source`, truncated at `J`.
    pub fn resolvent_apply<F>(
        &self,
        z: Complex64,
        source: &StripSource<F>,
        x1_out: &[f64],
        x2_out: &[f64],
        quad: &QuadratureSpec,
    ) -> Result<ResolventField>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let threshold = self.modes[0].mu.powi(2);
        if z.im == 0.0 && z.re >= threshold {
            return Err(Error::Spectrum { z, threshold });
        }
        for &x2 in x2_out {
            if !(0.0..=self.params.d).contains(&x2) {
                return Err(Error::Domain { x2, d: self.params.d });
            }
        }
        let alpha0 = self.params.alpha0;
        let d = self.params.d;
        let ks: Vec<Complex64> = self
            .modes
            .iter()
            .map(|m| (Complex64::new(m.mu * m.mu, 0.0) - z).sqrt())
            .collect();
        let max_rate = ks.iter().map(|k| k.re).fold(0.0, f64::max);

        // Transverse projection nodes and adjoint modes there.
        let rule = quad.rule();
        let hy = d / quad.subdivisions as f64;
        let mut ynodes = Vec::new();
        for s in 0..quad.subdivisions {
            ynodes.extend(rule.mapped(s as f64 * hy, (s + 1) as f64 * hy));
        }
        let phi_conj_w: Vec<Vec<Complex64>> = self
            .modes
            .iter()
            .map(|m| ynodes.iter().map(|&(y, w)| m.phi(alpha0, y).conj() * w).collect())
            .collect();
        let psi_out: Vec<Vec<Complex64>> = self
            .modes
            .iter()
            .map(|m| x2_out.iter().map(|&y| m.psi(alpha0, y)).collect())
            .collect();
        let base_breaks = source.breaks();

        let rows: Vec<Vec<Complex64>> = x1_out
            .par_iter()
            .map(|&x1| {
                let pts = kink_breaks(&base_breaks, x1, max_rate);
                let mut u = vec![Complex64::new(0.0, 0.0); self.modes.len()];
                let mut fy = vec![Complex64::new(0.0, 0.0); ynodes.len()];
                for w in pts.windows(2) {
                    for (t, wt) in rule.mapped(w[0], w[1]) {
                        for (slot, &(y, _)) in fy.iter_mut().zip(&ynodes) {
                            *slot = (source.f)(t, y);
                        }
                        let s = (x1 - t).abs();
                        for (j, k) in ks.iter().enumerate() {
                            let fj: Complex64 =
                                fy.iter().zip(&phi_conj_w[j]).map(|(a, b)| a * b).sum();
                            u[j] += fj * green_1d(*k, s) * wt;
                        }
                    }
                }
                (0..x2_out.len())
                    .map(|iy| u.iter().zip(&psi_out).map(|(uj, p)| uj * p[iy]).sum())
                    .collect()
            })
            .collect();

        let f_norm = source.l2_norm(d, quad);
        let tail_bound = self.resolvent_tail_bound(z, f_norm);
        Ok(ResolventField {
            x1: x1_out.to_vec(),
            x2: x2_out.to_vec(),
            values: rows,
            tail_bound,
        })
    }

    /// Pointwise bound on the modes `j > J` omitted from [`Self::resolvent_apply`]:
    /// `Σ_{j>J} ‖ψ_j‖_∞ ‖G_j‖_{L₂} ‖φ_j‖_{L₂} ‖F‖`, with `‖G_j‖² = 1/(4|k_j|² Re k_j)`.
    pub fn resolvent_tail_bound(&self, z: Complex64, f_norm: f64) -> f64 {
        let a0 = self.params.alpha0.abs();
        let d = self.params.d;
        let term = |j: usize| {
            let mu = PI * j as f64 / d;
            let k = (Complex64::new(mu * mu, 0.0) - z).sqrt();
            let amp = 1.0 + a0 / mu;
            let aj = 2.0 * mu * mu / ((mu * mu - a0 * a0).abs() * d);
            amp * amp * aj * d.sqrt() / (2.0 * k.norm() * k.re.sqrt())
        };
        let start = self.j_max() + 1;
        let start = start.max(2);
        let n_explicit = 20_000;
        let mut sum = 0.0;
        for j in start..start + n_explicit {
            sum += term(j);
        }
        // terms decay like j^{-3/2}: remainder ≤ 2 C / sqrt(N)
        let last = start + n_explicit;
        let c = term(last) * (last as f64).powf(1.5);
        sum += 2.0 * c / ((last - 1) as f64).sqrt();
        sum * f_norm
    }
}

#[inline]
fn green_1d(k: Complex64, s: f64) -> Complex64 {
    let e = -k * s;
    if e.re < -700.0 {
        return Complex64::new(0.0, 0.0);
    }
    e.exp() / (2.0 * k)
}

/// Source `F(x₁, x₂)` supported in `x₁ ∈ [support.0, support.1]`.
pub struct StripSource<F> {
    pub support: (f64, f64),
    /// Extra breakpoints inside the support where `F` is less smooth.
    pub interior_breaks: Vec<f64>,
    pub f: F,
}

impl<F> StripSource<F>
where
    F: Fn(f64, f64) -> Complex64,
{
    pub fn new(support: (f64, f64), f: F) -> Self {
        Self {
            support,
            interior_breaks: Vec::new(),
            f,
        }
    }

    fn breaks(&self) -> Vec<f64> {
        let mut pts = vec![self.support.0, self.support.1];
        pts.extend(
            self.interior_breaks
                .iter()
                .copied()
                .filter(|&x| x > self.support.0 && x < self.support.1),
        );
        sorted_breaks(pts)
    }

    /// `‖F‖_{L₂(Ω)}`.
    pub fn l2_norm(&self, d: f64, quad: &QuadratureSpec) -> f64 {
        let br = self.breaks();
        let v: f64 = quad.integrate(&br, |x1| {
            quad.integrate(&[0.0, d], |x2| (self.f)(x1, x2).norm_sqr())
        });
        v.sqrt()
    }
}

/// Resolvent samples, `values[i][k] = R(x1[i], x2[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventField {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
    pub tail_bound: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(d: f64, a: f64) -> WaveguideParams {
        WaveguideParams::new(d, a).unwrap()
    }

    #[test]
    fn mu_examples() {
        let s = p(PI, 0.5);
        assert_eq!(mu_j(&s, 0).unwrap(), 0.5);
        assert_relative_eq!(mu_j(&s, 1).unwrap(), 1.0, epsilon = 1e-15);
        let sup = p(PI, 2.5);
        assert_relative_eq!(mu_j(&sup, 0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(mu_j(&sup, 1).unwrap(), 2.5);
        assert_relative_eq!(mu_j(&p(2.0, 0.3), 3).unwrap(), 1.5 * PI, epsilon = 1e-15);
        assert_eq!(mu_j(&p(PI, 0.0), 0).unwrap(), 0.0);
        assert!(matches!(mu_j(&p(PI, 1.0), 0), Err(Error::Regime { .. })));
    }

    #[test]
    fn psi_examples() {
        let s = p(PI, 0.5);
        for j in 0..6 {
            assert_eq!(psi_eval(&s, j, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        }
        for &x in &[0.1, 1.0, 2.5, PI] {
            assert_relative_eq!(psi_eval(&s, 0, x).unwrap().norm(), 1.0, epsilon = 1e-15);
        }
        let v = psi_eval(&s, 2, PI).unwrap();
        assert_relative_eq!(v.re, 1.0, epsilon = 1e-14);
        assert!(v.im.abs() < 1e-14);
        assert!(matches!(psi_eval(&s, 0, -0.1), Err(Error::Domain { .. })));
        assert!(matches!(psi_eval(&s, 0, PI + 1e-9), Err(Error::Domain { .. })));
        assert_eq!(psi_eval(&p(PI, 0.0), 0, 1.3).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn normalisation_examples() {
        let s = p(PI, 0.5);
        let a2 = a_j(&s, 2).unwrap();
        assert_relative_eq!(a2.re, 8.0 / (3.75 * PI), epsilon = 1e-14);
        assert_relative_eq!(a2.re, 0.679_061_090_525_420_1, epsilon = 1e-12);
        assert_eq!(a2.im, 0.0);
        // Neumann limit of A_{j0}
        assert_eq!(a_j(&p(PI, 0.0), 0).unwrap(), Complex64::new(1.0 / PI, 0.0));
        let small = a_j(&p(PI, 1e-7), 0).unwrap();
        assert_relative_eq!(small.re, 1.0 / PI, epsilon = 1e-6);
        // analytic identity A₀ (1 − e^{−2iα₀d}) / (2iα₀) = 1
        let a0 = a_j(&s, 0).unwrap();
        let id = a0 * (Complex64::new(1.0, 0.0) - Complex64::new(0.0, -PI).exp()) / (I * 1.0);
        assert_relative_eq!(id.re, 1.0, epsilon = 1e-14);
        assert!(id.im.abs() < 1e-14);
    }

    #[test]
    fn psi0_phi0_pairing_by_200_node_quadrature() {
        let s = p(PI, 0.5);
        let q = QuadratureSpec::new(200, 1);
        let v: Complex64 = q.integrate(&[0.0, PI], |x| {
            psi_eval(&s, 0, x).unwrap() * phi_eval(&s, 0, x).unwrap().conj()
        });
        assert!((v - 1.0).norm() < 1e-12);
    }

    #[test]
    fn gram_is_identity_across_regimes() {
        let q = QuadratureSpec::new(200, 2);
        for d in [1.0, PI] {
            for a in [0.3, 0.9 * PI / d, 1.7 * PI / d, 0.0, -0.4] {
                let b = ModeBasis::new(p(d, a), 15).unwrap();
                let g = b.biortho_gram(&q);
                for (j, row) in g.iter().enumerate() {
                    for (k, v) in row.iter().enumerate() {
                        let e = if j == k { 1.0 } else { 0.0 };
                        assert!((v - e).norm() < 1e-10, "d={d} a={a} ({j},{k}) = {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_swap_conjugates_psi() {
        let s = p(PI, 0.7);
        let m = p(PI, -0.7);
        for j in 0..6 {
            for &x in &[0.0, 0.4, 1.9, PI] {
                let a = psi_eval(&s, j, x).unwrap();
                let b = psi_eval(&m, j, x).unwrap();
                assert_relative_eq!(a.re, b.re, epsilon = 1e-15);
                assert_relative_eq!(a.im, -b.im, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn expansion_examples() {
        let s = p(PI, 0.5);
        let q = QuadratureSpec::new(128, 2);
        let b = ModeBasis::new(s, 20).unwrap();
        let c = b.expand_coeffs(|x| psi_eval(&s, 3, x).unwrap(), &q);
        for (j, cj) in c.iter().enumerate() {
            let e = if j == 3 { 1.0 } else { 0.0 };
            assert!((cj - e).norm() < 1e-10);
        }
        let c = b.expand_coeffs(
            |x| psi_eval(&s, 0, x).unwrap() * 2.0 + psi_eval(&s, 1, x).unwrap(),
            &q,
        );
        assert!((c[0] - 2.0).norm() < 1e-10 && (c[1] - 1.0).norm() < 1e-10);
        assert!(c[2..].iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn reconstruction_improves_with_truncation() {
        let s = p(PI, 0.5);
        let q = QuadratureSpec::new(128, 2);
        let err = |jm: usize| {
            let b = ModeBasis::new(s, jm).unwrap();
            let c = b.expand_coeffs(|x| Complex64::new(x, 0.0), &q);
            let n = 400;
            let mut acc = 0.0;
            for i in 0..=n {
                let x = PI * i as f64 / n as f64;
                acc += (b.reconstruct(&c, x) - x).norm_sqr();
            }
            (acc * PI / n as f64).sqrt()
        };
        let (e5, e20) = (err(5), err(20));
        assert!(e20 < e5, "J=20 error {e20} not below J=5 error {e5}");
    }

    #[test]
    fn resolvent_rejects_spectrum() {
        let b = ModeBasis::new(p(PI, 0.5), 8).unwrap();
        let src = StripSource::new((-1.0, 1.0), |_, _| Complex64::new(1.0, 0.0));
        let r = b.resolvent_apply(
            Complex64::new(0.3, 0.0),
            &src,
            &[0.0],
            &[0.0],
            &QuadratureSpec::new(16, 1),
        );
        assert!(matches!(r, Err(Error::Spectrum { .. })));
    }
}
