//! Weak-coupling asymptotics for `α = α₀ + εβ`.
//!
//! The kernels
//!
//! ```text
//! v₀(x) = −½ ∫ |x − t| β(t) dt,
//! v_j(x) = 1/(2κ_j) ∫ e^{−κ_j |x − t|} β(t) dt,   κ_j = √(μ_j² − μ₀²),  j ≥ 1,
//! ```
//!
//! enter the constant `τ` through the brackets `⟨βv_j⟩ = ∫ β v_j`. The sign of
//! `α₀⟨β⟩` (or of `τ` when `⟨β⟩ = 0`, or above the critical coupling) decides
//! whether an eigenvalue emerges from the threshold `μ₀²`, and
//! `λ_ε = μ₀² − k(ε)²` with `k(ε) = −εα₀⟨β⟩ + ε²τ + O(ε³)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Regime, WaveguideParams};
use crate::profile::{PerturbationProfile, Piece, Shape};
use crate::quadrature::{kink_integral, GaussLegendre, QuadratureSpec};
use crate::transverse::mu_j;

/// Relative size of `|⟨β⟩| / ‖β‖` treated as an exact zero mean.
pub const ZERO_MEAN_RTOL: f64 = 1e-10;
/// Upper edge of the band `[ZERO_MEAN_RTOL, AMBIGUOUS_MEAN_RTOL)` where no verdict is given.
pub const AMBIGUOUS_MEAN_RTOL: f64 = 1e-8;
/// Default number of series terms in `τ`.
pub const DEFAULT_TAU_TERMS: usize = 128;
/// Smallest admissible distance of `α₀d/2` from a pole of tan/cot.
pub const TAN_MARGIN: f64 = 1e-6;

/// Quadrature used for kernels and brackets unless the caller overrides it.
pub fn default_bracket_quadrature() -> QuadratureSpec {
    QuadratureSpec::new(64, 2)
}

/// Decay rate `κ_j = √(μ_j² − μ₀²)` of the kernel `v_j`, `j ≥ 1`.
pub fn kernel_rate(params: &WaveguideParams, j: usize) -> Result<f64> {
    let mu0 = mu_j(params, 0)?;
    let mu = mu_j(params, j)?;
    Ok((mu * mu - mu0 * mu0).max(0.0).sqrt())
}

/// `v_j(x₁)` by kink-split quadrature over the support of β.
pub fn v_j_eval(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    j: usize,
    x1: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    params.ensure_admissible()?;
    let breaks = beta.breaks();
    if j == 0 {
        let v: f64 = kink_integral(quad, &breaks, x1, 0.0, |s| s, |t| beta.value(t));
        return Ok(-0.5 * v);
    }
    let k = kernel_rate(params, j)?;
    Ok(v_exp(beta, &breaks, k, x1, quad))
}

fn v_exp(beta: &PerturbationProfile, breaks: &[f64], k: f64, x1: f64, quad: &QuadratureSpec) -> f64 {
    let v: f64 = kink_integral(quad, breaks, x1, k, |s| (-k * s).exp(), |t| beta.value(t));
    v / (2.0 * k)
}

/// Longest stretch, in units of `1/κ`, covered by one short Gauss panel.
const EXP_PANEL: f64 = 2.0;

/// `∫∫ β(x) e^{−κ|x−t|} β(t) dt dx / (2κ)` in one left-to-right sweep.
///
/// By symmetry the double integral is `2∫ β(x) L(x) dx` with
/// `L(x) = ∫_{t<x} e^{−κ(x−t)} β(t) dt`, and `L` obeys
/// `L(y) = e^{−κ(y−x)} L(x) + ∫_x^y e^{−κ(y−t)} β(t) dt`. Each increment is
/// integrated on short panels so that sharp kernels stay resolved.
fn bracket_exp(beta: &PerturbationProfile, breaks: &[f64], k: f64, quad: &QuadratureSpec) -> f64 {
    let rule = quad.rule();
    let short = GaussLegendre::cached(12);
    let Some(&start) = breaks.first() else { return 0.0 };
    let (mut prev, mut l, mut acc) = (start, 0.0, 0.0);
    let advance = |to: f64, l: &mut f64, prev: &mut f64| {
        let span = to - *prev;
        if span > 0.0 {
            let m = (k * span / EXP_PANEL).ceil().max(1.0) as usize;
            let h = span / m as f64;
            let inc: f64 = (0..m)
                .map(|s| {
                    let lo = *prev + s as f64 * h;
                    short.integrate(lo, lo + h, |t| (-k * (to - t)).exp() * beta.value(t))
                })
                .sum();
            *l = (-k * span).exp() * *l + inc;
        }
        *prev = to;
    };
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let h = (b - a) / quad.subdivisions as f64;
        for s in 0..quad.subdivisions {
            let lo = a + s as f64 * h;
            let hi = if s + 1 == quad.subdivisions { b } else { lo + h };
            for (x, wt) in rule.mapped(lo, hi) {
                advance(x, &mut l, &mut prev);
                acc += wt * beta.value(x) * l;
            }
            // panel ends keep increments off the kinks of β
            advance(hi, &mut l, &mut prev);
        }
    }
    acc / k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketMethod {
    Quadrature,
    OdeOracle,
}

/// `⟨βv_j⟩` together with the a-priori bound `‖β‖²/(μ_j² − μ₀²)` (`j ≥ 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketValue {
    pub j: usize,
    pub value: f64,
    pub method: BracketMethod,
    pub tail_error: f64,
}

fn bracket_bound(params: &WaveguideParams, beta_l2_sq: f64, j: usize) -> Result<f64> {
    if j == 0 {
        return Ok(f64::INFINITY);
    }
    let k = kernel_rate(params, j)?;
    Ok(beta_l2_sq / (k * k))
}

/// `⟨βv_j⟩ = ∫∫ β(x) K_j(x, t) β(t) dt dx`, inner integral split at the diagonal.
pub fn bracket_beta_vj(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    j: usize,
    quad: &QuadratureSpec,
) -> Result<BracketValue> {
    params.ensure_admissible()?;
    let breaks = beta.breaks();
    let value = if j == 0 {
        let inner = |x: f64| -> f64 {
            let v: f64 = kink_integral(quad, &breaks, x, 0.0, |s| s, |t| beta.value(t));
            -0.5 * v
        };
        quad.integrate(&breaks, |x| beta.value(x) * inner(x))
    } else {
        bracket_exp(beta, &breaks, kernel_rate(params, j)?, quad)
    };
    let l2 = beta.moments(quad).l2norm_sq;
    Ok(BracketValue {
        j,
        value,
        method: BracketMethod::Quadrature,
        tail_error: bracket_bound(params, l2, j)?,
    })
}

/// Brackets for several indices, evaluated in parallel.
pub fn brackets(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    indices: &[usize],
    quad: &QuadratureSpec,
) -> Result<Vec<BracketValue>> {
    indices
        .par_iter()
        .map(|&j| bracket_beta_vj(params, beta, j, quad))
        .collect()
}

/// Independent route to `⟨βv_j⟩` (`j ≥ 1`): Numerov solution of
/// `−v″ + κ²v = β` on a truncated line with `v = 0` far outside the support,
/// Simpson integration of `βv`, and one Richardson step in the grid size.
pub fn bracket_ode_oracle(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    j: usize,
    support_points: usize,
) -> Result<BracketValue> {
    if j == 0 {
        return Err(Error::Precondition(
            "the ODE oracle covers the exponential kernels j >= 1".into(),
        ));
    }
    let k = kernel_rate(params, j)?;
    let (a, b) = beta.support();
    let pad = (40.0 / k).max(1.0);
    let (lo, hi) = (a - pad, b + pad);
    let h0 = ((b - a) / support_points.max(16) as f64).min(0.05 / k);
    let n0 = (((hi - lo) / h0).ceil() as usize).next_multiple_of(2);
    let coarse = numerov_bracket(beta, k, lo, hi, n0);
    let fine = numerov_bracket(beta, k, lo, hi, 2 * n0);
    let value = (16.0 * fine - coarse) / 15.0;
    let l2 = beta.moments(&QuadratureSpec::default()).l2norm_sq;
    Ok(BracketValue {
        j,
        value,
        method: BracketMethod::OdeOracle,
        tail_error: l2 / (k * k),
    })
}

fn numerov_bracket(beta: &PerturbationProfile, k: f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let x = |i: usize| lo + h * i as f64;
    let f: Vec<f64> = (0..=n).map(|i| beta.value(x(i))).collect();
    // unknowns v_1..v_{n-1}; v_0 = v_n = 0
    let m = n - 1;
    let off = -(1.0 - h * h * k * k / 12.0);
    let diag = 2.0 + 10.0 * h * h * k * k / 12.0;
    let mut rhs: Vec<f64> = (1..n)
        .map(|i| h * h / 12.0 * (f[i - 1] + 10.0 * f[i] + f[i + 1]))
        .collect();
    let mut c = vec![0.0; m];
    // Thomas with constant coefficients
    let mut denom = diag;
    c[0] = off / denom;
    rhs[0] /= denom;
    for i in 1..m {
        denom = diag - off * c[i - 1];
        c[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..m - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    // Simpson over [lo, hi]; endpoints contribute zero
    let mut acc = 0.0;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f[i] * rhs[i - 1];
    }
    acc * h / 3.0
}

/// `‖v₀′‖²` with `v₀′(x) = −½ ∫ sgn(x − t) β(t) dt`, by direct quadrature.
///
/// Only finite when `⟨β⟩ = 0` (otherwise `v₀′` tends to `∓⟨β⟩/2` at ±∞); the
/// integral is restricted to the support.
pub fn v0_prime_norm_sq(beta: &PerturbationProfile, quad: &QuadratureSpec) -> f64 {
    let breaks = beta.breaks();
    quad.integrate(&breaks, |x| {
        let s: f64 = kink_integral(
            quad,
            &breaks,
            x,
            0.0,
            |_| 1.0,
            |t| if t < x { beta.value(t) } else { -beta.value(t) },
        );
        0.25 * s * s
    })
}

/// `τ` truncated after `J` series terms, with a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauResult {
    pub value: f64,
    pub regime: Regime,
    #[serde(rename = "J")]
    pub j_max: usize,
    pub tail_bound: f64,
    pub converged: bool,
}

/// Sum over `j ≥ first` of a bound `b_j` with `j²b_j` non-increasing: `≤ first²·b_first/(first − 1)`.
/// Largest `m ≥ 0` with `μ_{2m} < |α₀|`.
fn even_modes_below(params: &WaveguideParams) -> usize {
    (1..)
        .take_while(|&j| PI * 2.0 * j as f64 / params.d < params.alpha0.abs())
        .count()
}

fn tail_from_quadratic_decay(b_first: f64, first: usize) -> f64 {
    let f = first.max(2) as f64;
    b_first * f * f / (f - 1.0)
}

fn tan_margin(params: &WaveguideParams) -> Result<()> {
    let half = params.alpha0.abs() * params.d / 2.0;
    let to_pole = match params.regime() {
        Regime::Subcritical => half.min(PI / 2.0 - half),
        Regime::Supercritical => {
            let r = half % PI;
            r.min(PI - r)
        }
        _ => f64::INFINITY,
    };
    if to_pole < TAN_MARGIN {
        return Err(Error::NumericalMargin { margin: to_pole });
    }
    Ok(())
}

struct TauSeries {
    regime: Regime,
    /// term values in summation order
    terms: Vec<f64>,
    /// constant (non-series) part
    head: f64,
    /// tail bound of the omitted terms after `n` terms
    tail: Box<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl TauSeries {
    fn partial(&self, n: usize) -> f64 {
        self.head + self.terms[..n].iter().sum::<f64>()
    }
}

fn tau_series(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    n_terms: usize,
    quad: &QuadratureSpec,
) -> Result<TauSeries> {
    let regime = params.ensure_admissible()?;
    tan_margin(params)?;
    let (a0, d) = (params.alpha0, params.d);
    let l2 = beta.moments(quad).l2norm_sq;
    let mu = |j: usize| mu_j(params, j);
    let mu0 = mu(0)?;
    match regime {
        Regime::Subcritical => {
            let t = (a0 * d / 2.0).tan();
            let cot = 1.0 / t;
            let idx: Vec<usize> = std::iter::once(0).chain(1..=n_terms).collect();
            let br = brackets(params, beta, &idx, quad)?;
            let head = 2.0 * a0 * a0 * br[0].value;
            let mut terms = Vec::with_capacity(n_terms);
            for j in 1..=n_terms {
                let m2 = mu(j)?.powi(2);
                let trig = if j % 2 == 0 { t } else { -cot };
                terms.push(2.0 * a0 / d * m2 * br[j].value / (m2 - mu0 * mu0) * trig);
            }
            let big = t.abs().max(cot.abs());
            let (pd, mu0sq) = (PI / d, mu0 * mu0);
            let tail = move |n: usize| {
                let first = n + 1;
                let m2 = (pd * first as f64).powi(2);
                let b = (2.0 * a0 / d).abs() * big * m2 / (m2 - mu0sq) * l2 / (m2 - mu0sq);
                tail_from_quadratic_decay(b, first)
            };
            Ok(TauSeries {
                regime,
                terms,
                head,
                tail: Box::new(tail),
            })
        }
        Regime::Supercritical => {
            let mu1 = mu(1)?;
            let (mu0sq, mu1sq) = (mu0 * mu0, mu1 * mu1);
            let cot = 1.0 / (a0 * d / 2.0).tan();
            let idx: Vec<usize> = std::iter::once(1).chain((1..=n_terms).map(|j| 2 * j)).collect();
            let br = brackets(params, beta, &idx, quad)?;
            let head =
                2.0 * a0 * PI * PI * cot / ((mu1sq - mu0sq) * d.powi(3)) * br[0].value;
            let pref = 8.0 * PI * PI / ((mu1sq - mu0sq) * d.powi(4));
            let mut terms = Vec::with_capacity(n_terms);
            for j in 1..=n_terms {
                let m2 = mu(2 * j)?.powi(2);
                terms.push(pref * m2 * br[j].value / (m2 - mu1sq));
            }
            let pd = PI / d;
            let tail = move |n: usize| {
                let first = n + 1;
                let m2 = (pd * 2.0 * first as f64).powi(2);
                let b = pref * m2 / (m2 - mu1sq) * l2 / (m2 - mu0sq);
                tail_from_quadratic_decay(b, first)
            };
            Ok(TauSeries {
                regime,
                terms,
                head,
                tail: Box::new(tail),
            })
        }
        Regime::Neumann => {
            let idx: Vec<usize> = (0..n_terms).map(|j| 2 * j + 1).collect();
            let br = brackets(params, beta, &idx, quad)?;
            let mut terms = Vec::with_capacity(n_terms);
            for (j, b) in br.iter().enumerate() {
                let m = mu(2 * j + 1)?;
                terms.push(-4.0 * b.value / (m * d * d));
            }
            let pd = PI / d;
            let tail = move |n: usize| {
                // term index n ↦ μ_{2n+1}; |term| ≤ 4‖β‖²/(μ³d²)
                let first = n.max(2);
                let m = pd * (2 * first + 1) as f64;
                let b = 4.0 * l2 / (m.powi(3) * d * d);
                tail_from_quadratic_decay(b, first)
            };
            Ok(TauSeries {
                regime,
                terms,
                head: 0.0,
                tail: Box::new(tail),
            })
        }
        Regime::Forbidden => unreachable!("rejected by ensure_admissible"),
    }
}

/// `τ` with `J` series terms; convergence is judged against the `2J` partial sum.
pub fn tau(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    j_max: usize,
    quad: &QuadratureSpec,
) -> Result<TauResult> {
    tau_with_doubled(params, beta, j_max, quad).map(|(t, _)| t)
}

/// [`tau`] together with the `2J`-term partial sum it was checked against.
pub fn tau_with_doubled(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    j_max: usize,
    quad: &QuadratureSpec,
) -> Result<(TauResult, f64)> {
    params.ensure_admissible()?;
    // the tail estimate needs every sign-changing supercritical term summed explicitly
    let floor = match params.regime() {
        Regime::Supercritical => even_modes_below(params) + 1,
        _ => 1,
    };
    let n = j_max.max(floor);
    let series = tau_series(params, beta, 2 * n, quad)?;
    let value = series.partial(n);
    let doubled = series.partial(2 * n);
    let tail_bound = (series.tail)(n);
    let t = TauResult {
        value,
        regime: series.regime,
        j_max: n,
        tail_bound,
        converged: (doubled - value).abs() < tail_bound.max(1e-10),
    };
    Ok((t, doubled))
}

/// `α₀ → 0` limit of the subcritical `τ`: `−Σ_j 4⟨βv_{2j+1}⟩/d²`.
///
/// Kept alongside the Neumann series of [`tau`] for comparison; the two
/// differ by the factor `1/μ_{2j+1}` in each term.
pub fn tau_neumann_limit(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    j_max: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if params.regime() != Regime::Neumann {
        return Err(Error::Precondition("alpha0 must vanish".into()));
    }
    let idx: Vec<usize> = (0..j_max).map(|j| 2 * j + 1).collect();
    let br = brackets(params, beta, &idx, quad)?;
    let d = params.d;
    Ok(-br.iter().map(|b| 4.0 * b.value / (d * d)).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Existence {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "th2.1-i")]
    SubcriticalAttractive,
    #[serde(rename = "th2.1-ii")]
    SubcriticalRepulsive,
    #[serde(rename = "th2.1-iii")]
    SubcriticalCriticalPositive,
    #[serde(rename = "th2.1-iv")]
    SubcriticalCriticalNegative,
    #[serde(rename = "th2.2-i")]
    SupercriticalPositive,
    #[serde(rename = "th2.2-ii")]
    SupercriticalNegative,
    #[serde(rename = "th2.0")]
    Neumann,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::SubcriticalAttractive => "th2.1-i",
            CaseTag::SubcriticalRepulsive => "th2.1-ii",
            CaseTag::SubcriticalCriticalPositive => "th2.1-iii",
            CaseTag::SubcriticalCriticalNegative => "th2.1-iv",
            CaseTag::SupercriticalPositive => "th2.2-i",
            CaseTag::SupercriticalNegative => "th2.2-ii",
            CaseTag::Neumann => "th2.0",
        }
    }
}

/// Existence verdict and expansion coefficients of the weakly coupled eigenvalue.
///
/// `lambda_coeffs = [λ⁰, λ², λ³, λ⁴]` of `λ_ε = Σ λⁿ εⁿ` and `k_coeffs = [k¹, k²]`
/// of `k(ε) = k¹ε + k²ε²`. Where the theory only fixes `λ` to `O(ε⁴)` the `λ⁴`
/// entry is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub exists: Existence,
    pub case_tag: CaseTag,
    pub epsilon: f64,
    pub lambda_coeffs: [f64; 4],
    pub k_coeffs: [f64; 2],
    /// Truncated expansion evaluated at `epsilon`.
    pub lambda: f64,
    /// `√(μ₀² − λ_ε)` of the truncated expansion (zero when no eigenvalue is predicted).
    pub decay_rate: f64,
    pub mean: f64,
    pub tau: TauResult,
}

impl Prediction {
    pub fn lambda_at(&self, eps: f64) -> f64 {
        let [l0, l2, l3, l4] = self.lambda_coeffs;
        l0 + eps * eps * (l2 + eps * (l3 + eps * l4))
    }

    pub fn decay_rate_at(&self, eps: f64) -> f64 {
        if self.exists != Existence::Yes {
            return 0.0;
        }
        (self.lambda_coeffs[0] - self.lambda_at(eps)).max(0.0).sqrt()
    }
}

/// Decides existence of the threshold eigenvalue and builds its expansion.
pub fn predict(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    epsilon: f64,
) -> Result<Prediction> {
    predict_with(params, beta, epsilon, DEFAULT_TAU_TERMS, &default_bracket_quadrature())
}

pub fn predict_with(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    epsilon: f64,
    j_max: usize,
    quad: &QuadratureSpec,
) -> Result<Prediction> {
    let regime = params.ensure_admissible()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Precondition(format!("epsilon must be positive, got {epsilon}")));
    }
    let mom = beta.moments(quad);
    let mean = mom.mean;
    let norm = mom.l2norm_sq.sqrt();
    let mu0 = mu_j(params, 0)?;
    let l0 = mu0 * mu0;
    let t = tau(params, beta, j_max, quad)?;
    let tau_uncertain = !t.converged || t.value.abs() <= t.tail_bound.max(1e-12);
    let sign_verdict = |positive_exists: bool| {
        if tau_uncertain {
            Existence::Inconclusive
        } else if positive_exists {
            Existence::Yes
        } else {
            Existence::No
        }
    };
    let a0 = params.alpha0;
    let (exists, tag, k1, k2) = match regime {
        Regime::Neumann => (Existence::No, CaseTag::Neumann, 0.0, t.value),
        Regime::Supercritical => {
            let tag = if t.value > 0.0 {
                CaseTag::SupercriticalPositive
            } else {
                CaseTag::SupercriticalNegative
            };
            (sign_verdict(t.value > 0.0), tag, 0.0, t.value)
        }
        Regime::Subcritical => {
            let rel = mean.abs() / norm.max(f64::MIN_POSITIVE);
            if rel < ZERO_MEAN_RTOL {
                let tag = if t.value > 0.0 {
                    CaseTag::SubcriticalCriticalPositive
                } else {
                    CaseTag::SubcriticalCriticalNegative
                };
                (sign_verdict(t.value > 0.0), tag, 0.0, t.value)
            } else {
                let attractive = a0 * mean < 0.0;
                let tag = if attractive {
                    CaseTag::SubcriticalAttractive
                } else {
                    CaseTag::SubcriticalRepulsive
                };
                let exists = if rel < AMBIGUOUS_MEAN_RTOL {
                    Existence::Inconclusive
                } else if attractive {
                    Existence::Yes
                } else {
                    Existence::No
                };
                (exists, tag, -a0 * mean, t.value)
            }
        }
        Regime::Forbidden => unreachable!(),
    };
    let lambda_coeffs = if k1 != 0.0 {
        [l0, -k1 * k1, -2.0 * k1 * k2, 0.0]
    } else {
        [l0, 0.0, 0.0, -k2 * k2]
    };
    let mut pred = Prediction {
        exists,
        case_tag: tag,
        epsilon,
        lambda_coeffs,
        k_coeffs: [k1, k2],
        lambda: 0.0,
        decay_rate: 0.0,
        mean,
        tau: t,
    };
    pred.lambda = pred.lambda_at(epsilon);
    pred.decay_rate = pred.decay_rate_at(epsilon);
    Ok(pred)
}

/// Both sides of the sufficient condition for `τ > 0` with a zero-mean
/// `β(x) = β̃(x/l)` below the critical coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Th23Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_th2_3(
    params: &WaveguideParams,
    betatilde: &PerturbationProfile,
    l: f64,
    quad: &QuadratureSpec,
) -> Result<Th23Check> {
    let regime = params.ensure_admissible()?;
    if regime != Regime::Subcritical {
        return Err(Error::Precondition("requires 0 < |alpha0| < pi/d".into()));
    }
    if !(l > 0.0) {
        return Err(Error::Precondition(format!("scale must be positive, got {l}")));
    }
    let mom = betatilde.moments(quad);
    if mom.mean.abs() >= ZERO_MEAN_RTOL * mom.l2norm_sq.sqrt() {
        return Err(Error::Precondition(format!(
            "profile mean {:e} is not zero",
            mom.mean
        )));
    }
    let (a0, d) = (params.alpha0, params.d);
    let mu0 = mu_j(params, 0)?;
    let mu1 = mu_j(params, 1)?;
    let (mu0sq, mu1sq) = (mu0 * mu0, mu1 * mu1);
    // ∫ sgn(x − t) β̃(t) dt = −2 v₀′(x)
    let lhs = 4.0 * v0_prime_norm_sq(betatilde, quad);
    let cot = 1.0 / (a0 * d / 2.0).tan();
    let bracket = mu1sq / (mu1sq - mu0sq).powi(2) + d * d / (16.0 * PI * PI) + d * d / 48.0;
    let rhs = 4.0 * cot / (l * l * a0 * d) * bracket * mom.l2norm_sq;
    Ok(Th23Check {
        lhs,
        rhs,
        holds: lhs >= rhs,
    })
}

/// Both sides of the sufficient condition for `τ > 0` above the critical coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Th24Check {
    pub lhs: f64,
    pub rhs: f64,
    /// Largest `m ≥ 0` with `μ_{2m} < |α₀|`.
    pub m: usize,
    pub holds: bool,
}

pub fn check_th2_4(
    params: &WaveguideParams,
    beta: &PerturbationProfile,
    quad: &QuadratureSpec,
) -> Result<Th24Check> {
    let regime = params.ensure_admissible()?;
    if regime != Regime::Supercritical {
        return Err(Error::Precondition("requires |alpha0| > pi/d".into()));
    }
    let (a0, d) = (params.alpha0, params.d);
    let m = even_modes_below(params);
    let mu1sq = mu_j(params, 1)?.powi(2);
    let mut idx = vec![1];
    idx.extend((1..=m).map(|j| 2 * j));
    let br = brackets(params, beta, &idx, quad)?;
    let lhs = a0 * br[0].value / (a0 * d / 2.0).tan();
    let mut rhs = 0.0;
    for (j, b) in (1..=m).zip(&br[1..]) {
        let m2 = mu_j(params, 2 * j)?.powi(2);
        rhs += m2 * b.value / (mu1sq - m2);
    }
    rhs *= 4.0 / d;
    Ok(Th24Check {
        lhs,
        rhs,
        m,
        holds: lhs >= rhs,
    })
}

/// `β = −v″ + 3μ₀²v` for a bump `v` narrow enough that
/// `3‖v′‖² ≥ 4 · (7π²/d²)‖v‖²`; for `α₀` slightly above `μ₂` this `β`
/// satisfies the sufficient condition checked by [`check_th2_4`].
pub fn construct_beta_for_th2_4(params: &WaveguideParams) -> Result<PerturbationProfile> {
    let regime = params.ensure_admissible()?;
    if regime != Regime::Supercritical {
        return Err(Error::Precondition("requires |alpha0| > pi/d".into()));
    }
    let d = params.d;
    let unit = PerturbationProfile::bump(0.0, 1.0, 1.0);
    let q = QuadratureSpec::default();
    let breaks = unit.breaks();
    let dv: f64 = q.integrate(&breaks, |x| unit.eval(x, 1).unwrap().powi(2));
    let v: f64 = q.integrate(&breaks, |x| unit.value(x).powi(2));
    let ratio_unit = dv / v;
    // 3 ratio_unit / w² = 4 · 7π²/d²
    let w = (3.0 * ratio_unit * d * d / (28.0 * PI * PI)).sqrt();
    let mu0 = mu_j(params, 0)?;
    Ok(PerturbationProfile::single(Piece::new(
        Shape::HelmholtzBump {
            screening: 3.0 * mu0 * mu0,
        },
        0.0,
        w,
        1.0,
    )))
}
