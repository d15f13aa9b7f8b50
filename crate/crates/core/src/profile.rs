//! Compactly supported coupling perturbations `β`, built from closed-form pieces.
//!
//! Every smooth piece is derived from the bump `b(s) = exp(1 − 1/(1 − s²))` on
//! `(−1, 1)`, so `β`, `β′` and `β″` are available exactly. Box pieces exist only
//! as quadrature fixtures with closed-form integrals; they refuse derivative
//! requests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{sorted_breaks, QuadratureSpec};

/// Shape of one piece on `[center − halfwidth, center + halfwidth]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Shape {
    /// `A·b(s)`, `s = (x − c)/w`.
    Bump,
    /// `A` on the closed interval; not differentiable.
    Box,
    /// `A·s·b(s)`, odd about the centre.
    OddBump,
    /// `A·(−v″ + screening·v)` with `v(x) = b((x − c)/w)`.
    HelmholtzBump { screening: f64 },
    /// Clamped cubic spline through equispaced `samples` spanning the piece
    /// (first and last sample must be zero). Intended for oracle tests.
    Custom { samples: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(flatten)]
    pub shape: Shape,
    pub center: f64,
    pub halfwidth: f64,
    pub amplitude: f64,
}

impl Piece {
    pub fn new(shape: Shape, center: f64, halfwidth: f64, amplitude: f64) -> Self {
        Self {
            shape,
            center,
            halfwidth,
            amplitude,
        }
    }

    pub fn bump(center: f64, halfwidth: f64, amplitude: f64) -> Self {
        Self::new(Shape::Bump, center, halfwidth, amplitude)
    }

    pub fn boxcar(center: f64, halfwidth: f64, amplitude: f64) -> Self {
        Self::new(Shape::Box, center, halfwidth, amplitude)
    }

    pub fn odd_bump(center: f64, halfwidth: f64, amplitude: f64) -> Self {
        Self::new(Shape::OddBump, center, halfwidth, amplitude)
    }

    pub fn lo(&self) -> f64 {
        self.center - self.halfwidth
    }

    pub fn hi(&self) -> f64 {
        self.center + self.halfwidth
    }
}

/// `⟨β⟩`, `‖β‖²` and `⟨β²⟩` (the last two coincide for real β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileMoments {
    pub mean: f64,
    pub l2norm_sq: f64,
    pub mean_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct ClampedSpline {
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl ClampedSpline {
    /// Clamped (zero end slope) cubic spline through equispaced samples on `[0, (n−1)h]`.
    fn new(y: Vec<f64>, h: f64) -> Self {
        let n = y.len();
        // Tridiagonal system for the second derivatives M_i.
        let mut a = vec![h / 6.0; n];
        let mut b = vec![2.0 * h / 3.0; n];
        let mut c = vec![h / 6.0; n];
        let mut r = vec![0.0; n];
        b[0] = h / 3.0;
        c[0] = h / 6.0;
        a[0] = 0.0;
        r[0] = (y[1] - y[0]) / h;
        b[n - 1] = h / 3.0;
        a[n - 1] = h / 6.0;
        c[n - 1] = 0.0;
        r[n - 1] = -(y[n - 1] - y[n - 2]) / h;
        for i in 1..n - 1 {
            r[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
        }
        // Thomas algorithm.
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = r[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
        }
        Self { h, y, m }
    }

    fn eval(&self, t: f64, order: u8) -> f64 {
        let n = self.y.len();
        let h = self.h;
        let k = ((t / h).floor() as usize).min(n - 2);
        let u = t - k as f64 * h;
        let v = h - u;
        let (y0, y1, m0, m1) = (self.y[k], self.y[k + 1], self.m[k], self.m[k + 1]);
        match order {
            0 => {
                m0 * v * v * v / (6.0 * h)
                    + m1 * u * u * u / (6.0 * h)
                    + (y0 / h - m0 * h / 6.0) * v
                    + (y1 / h - m1 * h / 6.0) * u
            }
            1 => {
                -m0 * v * v / (2.0 * h) + m1 * u * u / (2.0 * h) - (y0 / h - m0 * h / 6.0)
                    + (y1 / h - m1 * h / 6.0)
            }
            _ => (m0 * v + m1 * u) / h,
        }
    }
}

/// `[b, b′, b″, b‴, b⁗]` of `b(s) = exp(1 − 1/(1 − s²))`, zero for `|s| ≥ 1`.
pub fn bump_derivatives(s: f64) -> [f64; 5] {
    if s.abs() >= 1.0 {
        return [0.0; 5];
    }
    let u = 1.0 - s * s;
    let g = 1.0 - 1.0 / u;
    let b = g.exp();
    if b == 0.0 {
        return [0.0; 5];
    }
    let (u2, u3) = (u * u, u * u * u);
    let u4 = u2 * u2;
    let u5 = u4 * u;
    let g1 = -2.0 * s / u2;
    let g2 = -2.0 / u2 - 8.0 * s * s / u3;
    let g3 = -24.0 * s / u3 - 48.0 * s * s * s / u4;
    let g4 = -24.0 / u3 - 288.0 * s * s / u4 - 384.0 * s.powi(4) / u5;
    [
        b,
        b * g1,
        b * (g2 + g1 * g1),
        b * (g3 + 3.0 * g1 * g2 + g1.powi(3)),
        b * (g4 + 4.0 * g1 * g3 + 3.0 * g2 * g2 + 6.0 * g1 * g1 * g2 + g1.powi(4)),
    ]
}

/// A sum of pieces, identically zero outside its support `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Piece>", into = "Vec<Piece>")]
pub struct PerturbationProfile {
    pieces: Vec<Piece>,
    splines: Vec<Option<ClampedSpline>>,
    support: (f64, f64),
}

impl TryFrom<Vec<Piece>> for PerturbationProfile {
    type Error = Error;

    fn try_from(pieces: Vec<Piece>) -> Result<Self> {
        Self::new(pieces)
    }
}

impl From<PerturbationProfile> for Vec<Piece> {
    fn from(p: PerturbationProfile) -> Self {
        p.pieces
    }
}

impl PerturbationProfile {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidParams("profile needs at least one piece".into()));
        }
        let mut splines = Vec::with_capacity(pieces.len());
        for p in &pieces {
            if !(p.halfwidth.is_finite() && p.halfwidth > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "piece half-width must be positive, got {}",
                    p.halfwidth
                )));
            }
            if !(p.center.is_finite() && p.amplitude.is_finite()) {
                return Err(Error::InvalidParams("non-finite piece parameter".into()));
            }
            splines.push(match &p.shape {
                Shape::Custom { samples } => {
                    if samples.len() < 4 {
                        return Err(Error::InvalidParams("custom piece needs >= 4 samples".into()));
                    }
                    if samples[0] != 0.0 || samples[samples.len() - 1] != 0.0 {
                        return Err(Error::InvalidParams(
                            "custom piece samples must vanish at both ends".into(),
                        ));
                    }
                    let h = 2.0 * p.halfwidth / (samples.len() - 1) as f64;
                    Some(ClampedSpline::new(samples.clone(), h))
                }
                Shape::HelmholtzBump { screening } if !screening.is_finite() => {
                    return Err(Error::InvalidParams("non-finite screening".into()));
                }
                _ => None,
            });
        }
        let lo = pieces.iter().map(Piece::lo).fold(f64::INFINITY, f64::min);
        let hi = pieces.iter().map(Piece::hi).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            pieces,
            splines,
            support: (lo, hi),
        })
    }

    pub fn single(piece: Piece) -> Self {
        Self::new(vec![piece]).expect("valid piece")
    }

    /// Smooth bump `A·exp(1 − 1/(1 − s²))`.
    pub fn bump(center: f64, halfwidth: f64, amplitude: f64) -> Self {
        Self::single(Piece::bump(center, halfwidth, amplitude))
    }

    pub fn boxcar(center: f64, halfwidth: f64, amplitude: f64) -> Self {
        Self::single(Piece::boxcar(center, halfwidth, amplitude))
    }

    pub fn odd_bump(center: f64, halfwidth: f64, amplitude: f64) -> Self {
        Self::single(Piece::odd_bump(center, halfwidth, amplitude))
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// True when any piece is a box.
    pub fn nonsmooth(&self) -> bool {
        self.pieces.iter().any(|p| matches!(p.shape, Shape::Box))
    }

    /// Quadrature breakpoints: support ends, piece ends and piece centres.
    pub fn breaks(&self) -> Vec<f64> {
        let mut pts = Vec::with_capacity(3 * self.pieces.len());
        for p in &self.pieces {
            pts.extend([p.lo(), p.center, p.hi()]);
        }
        sorted_breaks(pts)
    }

    /// `β(x)`; bit-exact zero outside the support.
    pub fn value(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            return 0.0;
        }
        self.pieces
            .iter()
            .zip(&self.splines)
            .map(|(p, sp)| piece_eval(p, sp.as_ref(), x, 0))
            .sum()
    }

    /// `β`, `β′` or `β″` at `x`.
    pub fn eval(&self, x: f64, order: u8) -> Result<f64> {
        if order > 2 {
            return Err(Error::InvalidParams(format!("derivative order {order} > 2")));
        }
        if order > 0 && self.nonsmooth() {
            return Err(Error::NonSmoothProfile { order });
        }
        if x < self.support.0 || x > self.support.1 {
            return Ok(0.0);
        }
        Ok(self
            .pieces
            .iter()
            .zip(&self.splines)
            .map(|(p, sp)| piece_eval(p, sp.as_ref(), x, order))
            .sum())
    }

    /// Moments by composite Gauss–Legendre over the piece panels.
    pub fn moments(&self, quad: &QuadratureSpec) -> ProfileMoments {
        let br = self.breaks();
        let mean: f64 = quad.integrate(&br, |x| self.value(x));
        let sq: f64 = quad.integrate(&br, |x| {
            let v = self.value(x);
            v * v
        });
        ProfileMoments {
            mean,
            l2norm_sq: sq,
            mean_sq: sq,
        }
    }

    /// `x ↦ β(x / l)`.
    pub fn scaled(&self, l: f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParams(format!("scale must be positive, got {l}")));
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.center *= l;
                q.halfwidth *= l;
                if let Shape::HelmholtzBump { screening } = &mut q.shape {
                    // −v″(x/l) = −l²·(d²/dx²)[v(x/l)]
                    *screening /= l * l;
                    q.amplitude *= l * l;
                }
                q
            })
            .collect();
        Self::new(pieces)
    }

    /// Same profile with every amplitude multiplied by `factor`.
    pub fn amplified(&self, factor: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                amplitude: p.amplitude * factor,
                ..p.clone()
            })
            .collect();
        Self::new(pieces).expect("amplification keeps a valid profile")
    }
}

fn piece_eval(p: &Piece, spline: Option<&ClampedSpline>, x: f64, order: u8) -> f64 {
    if x < p.lo() || x > p.hi() {
        return 0.0;
    }
    let w = p.halfwidth;
    let s = (x - p.center) / w;
    let scale = p.amplitude / w.powi(order as i32);
    match &p.shape {
        Shape::Box => {
            if order == 0 {
                p.amplitude
            } else {
                0.0
            }
        }
        Shape::Bump => scale * bump_derivatives(s)[order as usize],
        Shape::OddBump => {
            let b = bump_derivatives(s);
            let v = match order {
                0 => s * b[0],
                1 => b[0] + s * b[1],
                _ => 2.0 * b[1] + s * b[2],
            };
            scale * v
        }
        Shape::HelmholtzBump { screening } => {
            let b = bump_derivatives(s);
            let k = order as usize;
            scale * (-b[k + 2] / (w * w) + screening * b[k])
        }
        Shape::Custom { .. } => {
            let sp = spline.expect("custom piece carries a spline");
            let t = (x - p.lo()).clamp(0.0, 2.0 * w);
            p.amplitude * sp.eval(t, order)
        }
    }
}

/// Default quadrature for profile integrals.
pub fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bump_closed_form_and_support() {
        let b = PerturbationProfile::bump(0.0, 1.0, 1.0);
        assert_eq!(b.value(0.0), 1.0);
        assert_eq!(b.value(2.0), 0.0);
        assert_eq!(b.eval(2.0, 0).unwrap(), 0.0);
        assert_eq!(b.eval(-1.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn odd_bump_vanishes_at_center() {
        let b = PerturbationProfile::odd_bump(0.0, 1.0, 1.0);
        assert_eq!(b.eval(0.0, 0).unwrap(), 0.0);
        assert_relative_eq!(b.value(0.4), -b.value(-0.4), epsilon = 1e-15);
    }

    #[test]
    fn box_refuses_derivatives() {
        let b = PerturbationProfile::boxcar(0.0, 1.0, 1.0);
        assert!(matches!(b.eval(0.2, 1), Err(Error::NonSmoothProfile { order: 1 })));
        assert!(matches!(b.eval(0.2, 2), Err(Error::NonSmoothProfile { order: 2 })));
        assert_eq!(b.eval(0.2, 0).unwrap(), 1.0);
        assert!(b.nonsmooth());
        assert!(b.eval(0.0, 3).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let profiles = [
            PerturbationProfile::bump(0.3, 1.2, 0.7),
            PerturbationProfile::odd_bump(-0.2, 0.8, 1.5),
            PerturbationProfile::single(Piece::new(
                Shape::HelmholtzBump { screening: 3.0 },
                0.0,
                0.6,
                1.0,
            )),
        ];
        let h = 1e-5;
        for p in &profiles {
            for &x in &[-0.5, -0.1, 0.05, 0.4] {
                for order in 0..2u8 {
                    let fd = (p.eval(x + h, order).unwrap() - p.eval(x - h, order).unwrap())
                        / (2.0 * h);
                    let an = p.eval(x, order + 1).unwrap();
                    assert!(
                        (fd - an).abs() < 1e-5 * (1.0 + an.abs()),
                        "{p:?} x={x} order={order}: fd {fd} vs {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn bump_fourth_derivative_matches_finite_difference() {
        let h = 1e-4;
        for &s in &[-0.7, -0.2, 0.1, 0.55] {
            let d3p = bump_derivatives(s + h)[3];
            let d3m = bump_derivatives(s - h)[3];
            let d4 = bump_derivatives(s)[4];
            assert!(((d3p - d3m) / (2.0 * h) - d4).abs() < 1e-5 * (1.0 + d4.abs()));
        }
    }

    #[test]
    fn box_moments_exact() {
        let b = PerturbationProfile::boxcar(0.0, 1.0, 1.0);
        let m = b.moments(&QuadratureSpec::default());
        assert_relative_eq!(m.mean, 2.0, epsilon = 1e-13);
        assert_relative_eq!(m.l2norm_sq, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn exp_bump_mean_matches_oracle() {
        // mpmath quad of exp(1 - 1/(1 - x^2)) over (-1, 1) at 30 digits
        let b = PerturbationProfile::bump(0.0, 1.0, 1.0);
        let m = b.moments(&QuadratureSpec::default());
        assert_relative_eq!(m.mean, 1.206_900_322_437_876_2, epsilon = 1e-12);
        assert_relative_eq!(m.l2norm_sq, 0.983_380_812_912_726_5, epsilon = 1e-12);
    }

    #[test]
    fn odd_bump_mean_vanishes() {
        let b = PerturbationProfile::odd_bump(0.0, 1.0, 1.0);
        assert!(b.moments(&QuadratureSpec::default()).mean.abs() < 1e-12);
    }

    #[test]
    fn scaling_examples() {
        let bx = PerturbationProfile::boxcar(0.0, 1.0, 1.0);
        assert_eq!(bx.scaled(1.0).unwrap(), bx);
        let s = bx.scaled(2.0).unwrap();
        assert_eq!(s.support(), (-2.0, 2.0));
        assert_relative_eq!(s.moments(&QuadratureSpec::default()).mean, 4.0, epsilon = 1e-13);
        assert!(bx.scaled(0.0).is_err());
    }

    #[test]
    fn helmholtz_bump_scaling_preserves_values() {
        let p = PerturbationProfile::single(Piece::new(
            Shape::HelmholtzBump { screening: 3.0 },
            0.2,
            0.5,
            1.0,
        ));
        let l = 3.0;
        let s = p.scaled(l).unwrap();
        for &x in &[-0.6, 0.3, 0.9, 1.4] {
            assert_relative_eq!(s.value(x), p.value(x / l), epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn custom_spline_reproduces_samples() {
        let n = 41;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                bump_derivatives(s)[0]
            })
            .collect();
        let p = PerturbationProfile::single(Piece::new(Shape::Custom { samples }, 0.0, 1.0, 1.0));
        assert_relative_eq!(p.value(0.0), 1.0, epsilon = 1e-12);
        assert!((p.value(0.37) - bump_derivatives(0.37)[0]).abs() < 1e-3);
        let m = p.moments(&QuadratureSpec::default());
        assert!((m.mean - 1.2069003224378762).abs() < 1e-3);
    }
}
