//! Composite Gauss–Legendre quadrature.
//!
//! Rules are computed once per node count and cached process-wide. Kernel
//! integrals of the form `∫ K(|x − t|) f(t) dt` split at the kink `t = x` and,
//! for exponentially decaying kernels, grade the panels geometrically away from
//! the kink so that sharp kernels (large decay rate) are resolved.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared cached rule with `n` nodes.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        self.mapped(a, b).fold(T::default(), |acc, (x, w)| acc + f(x) * w)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Node count per panel and number of equal sub-panels per breakpoint interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 128,
            subdivisions: 2,
        }
    }
}

impl QuadratureSpec {
    pub fn new(nodes: usize, subdivisions: usize) -> Self {
        Self {
            nodes: nodes.max(1),
            subdivisions: subdivisions.max(1),
        }
    }

    pub fn rule(&self) -> Arc<GaussLegendre> {
        GaussLegendre::cached(self.nodes)
    }

    /// Same rule with twice the nodes.
    pub fn doubled(&self) -> Self {
        Self::new(2 * self.nodes, self.subdivisions)
    }

    /// Integrates over consecutive intervals `[breaks[i], breaks[i+1]]`.
    pub fn integrate<T, F>(&self, breaks: &[f64], mut f: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let rule = self.rule();
        let mut acc = T::default();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let h = (b - a) / self.subdivisions as f64;
            for s in 0..self.subdivisions {
                let lo = a + s as f64 * h;
                let hi = if s + 1 == self.subdivisions { b } else { lo + h };
                acc = acc + rule.integrate(lo, hi, &mut f);
            }
        }
        acc
    }
}

/// Sorted, deduplicated copy of `points`.
pub fn sorted_breaks(mut points: Vec<f64>) -> Vec<f64> {
    points.retain(|p| p.is_finite());
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    points
}

/// Breakpoints for `∫ K(|x − t|) f(t) dt` over `[breaks.first, breaks.last]`:
/// the base breaks, the kink `x`, and geometrically spaced points
/// `x ± 2^m / rate` when `rate > 0`.
pub fn kink_breaks(breaks: &[f64], x: f64, rate: f64) -> Vec<f64> {
    let (a, b) = match (breaks.first(), breaks.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Vec::new(),
    };
    let mut pts = breaks.to_vec();
    if x > a && x < b {
        pts.push(x);
    }
    if rate > 0.0 {
        let span = (b - a).max((x - a).abs()).max((b - x).abs());
        let mut s = 1.0 / rate;
        while s < span {
            for p in [x - s, x + s] {
                if p > a && p < b {
                    pts.push(p);
                }
            }
            s *= 2.0;
        }
    }
    sorted_breaks(pts)
}

/// `∫ K(|x − t|) f(t) dt` over the hull of `breaks`, resolving the kink at `t = x`.
pub fn kink_integral<T, K, F>(
    spec: &QuadratureSpec,
    breaks: &[f64],
    x: f64,
    rate: f64,
    kernel: K,
    mut f: F,
) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    K: Fn(f64) -> f64,
    F: FnMut(f64) -> T,
{
    let pts = kink_breaks(breaks, x, rate);
    let rule = spec.rule();
    let mut acc = T::default();
    for w in pts.windows(2) {
        acc = acc + rule.integrate(w[0], w[1], |t| f(t) * kernel((x - t).abs()));
    }
    acc
}
