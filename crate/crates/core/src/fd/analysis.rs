use std::io::{self, Write};

use num_complex::Complex64;

use super::assemble::transverse_matrix;
use super::eigen::{find_eigenpair, EigenOptions, EigenPair};
use super::grid::StripGrid;
use crate::error::{Error, Result};
use crate::model::WaveguideParams;
use crate::transverse::{mu_j, phi_eval};

/// Eigenvalue of the discrete transverse operator closest to `μ₀²`.
///
/// On a finite grid the bottom of the essential spectrum sits here rather than
/// at `μ₀²`; the difference is `O(h₂²)`.
pub fn discrete_threshold(params: &WaveguideParams, n2: usize) -> Result<f64> {
    let mu0 = mu_j(params, 0)?;
    let t = transverse_matrix(params.alpha0, params.d, n2);
    let opts = EigenOptions {
        tol: 1e-11 * (n2 as f64 + 1.0).powi(2) / (params.d * params.d),
        ..Default::default()
    };
    let pair = find_eigenpair(&t, Complex64::new(mu0 * mu0, 0.0), &opts)?;
    Ok(pair.lambda.re)
}

/// Projection `(Ψ(x₁, ·), φ₀)` on every grid column, trapezoidal in `x₂`.
pub fn mode0_amplitude(psi: &[Complex64], grid: &StripGrid, params: &WaveguideParams) -> Result<Vec<Complex64>> {
    let m = grid.column_len();
    let h2 = grid.h2();
    let weights: Vec<Complex64> = (0..m)
        .map(|k| {
            let w = if k == 0 || k == m - 1 { 0.5 * h2 } else { h2 };
            phi_eval(params, 0, grid.x2(k)).map(|p| w * p.conj())
        })
        .collect::<Result<_>>()?;
    Ok(psi
        .chunks_exact(m)
        .map(|col| col.iter().zip(&weights).map(|(u, w)| u * w).sum())
        .collect())
}

fn sinh_fit_cost(samples: &[(f64, f64, usize)], l: f64, k: f64) -> f64 {
    // samples: (|x₁|, log amplitude, side); amplitude per side eliminated
    let mut cost = 0.0;
    for side in 0..2 {
        let r: Vec<f64> = samples
            .iter()
            .filter(|s| s.2 == side)
            .map(|&(x, y, _)| y - (k * (l - x)).sinh().ln())
            .collect();
        if r.is_empty() {
            continue;
        }
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        cost += r.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    }
    cost
}

/// Decay rate of the mode-0 amplitude of a localized eigenfunction.
///
/// Least-squares fit of `log|(Ψ(x₁,·), φ₀)|` over `L/3 ≤ |x₁| ≤ 2L/3` against
/// `log sinh(k(L − |x₁|))`, the exact outer profile once the Dirichlet wall is
/// accounted for; far from the wall it reduces to the slope of `e^{−k|x₁|}`.
pub fn decay_rate(pair: &EigenPair, grid: &StripGrid, params: &WaveguideParams) -> Result<f64> {
    let amp = mode0_amplitude(&pair.psi, grid, params)?;
    let l = grid.l;
    let mut samples = Vec::new();
    for (i, a) in amp.iter().enumerate() {
        let x = grid.x1(i);
        if x.abs() < l / 3.0 || x.abs() > 2.0 * l / 3.0 {
            continue;
        }
        let a = a.norm();
        if !(a > 1e-250) {
            return Err(Error::Fit(format!("mode-0 amplitude underflows at x1 = {x}")));
        }
        samples.push((x.abs(), a.ln(), usize::from(x > 0.0)));
    }
    if samples.len() < 4 {
        return Err(Error::Fit("fewer than four samples in the fit window".into()));
    }
    // coarse log scan, then golden section around the best node
    let (k_lo, k_hi) = (1e-4 / l, 200.0 / l);
    let nodes = 400;
    let kk = |t: usize| k_lo * (k_hi / k_lo).powf(t as f64 / nodes as f64);
    let best = (0..=nodes)
        .min_by(|&a, &b| {
            sinh_fit_cost(&samples, l, kk(a))
                .partial_cmp(&sinh_fit_cost(&samples, l, kk(b)))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();
    let (mut a, mut b) = (kk(best.saturating_sub(1)), kk((best + 1).min(nodes)));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |k: f64| sinh_fit_cost(&samples, l, k);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) < 1e-14 * b {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let k = 0.5 * (a + b);
    if !k.is_finite() {
        return Err(Error::Fit("decay fit diverged".into()));
    }
    Ok(k)
}

/// `max |Ψ(x₁, x₂)| − |Ψ(−x₁, d − x₂)|` over the grid, relative to `max |Ψ|`.
pub fn symmetry_defect(pair: &EigenPair, grid: &StripGrid) -> f64 {
    let m = grid.column_len();
    let scale = pair.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..grid.n1 {
        for k in 0..m {
            let a = pair.psi[grid.index(i, k)].norm();
            let b = pair.psi[grid.index(grid.n1 - 1 - i, m - 1 - k)].norm();
            worst = worst.max((a - b).abs());
        }
    }
    worst / scale
}

/// Plain-text field dump: `N1 N2 L d`, then one `i j Re Im` line per node.
pub fn write_field<W: Write>(pair: &EigenPair, grid: &StripGrid, mut w: W) -> io::Result<()> {
    writeln!(w, "{} {} {:.17e} {:.17e}", grid.n1, grid.n2, grid.l, grid.d)?;
    let m = grid.column_len();
    for i in 0..grid.n1 {
        for k in 0..m {
            let z = pair.psi[grid.index(i, k)];
            writeln!(w, "{i} {k} {:.17e} {:.17e}", z.re, z.im)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transverse::psi_eval;

    fn synthetic(params: &WaveguideParams, grid: &StripGrid, rate: f64) -> EigenPair {
        let mut psi = Vec::with_capacity(grid.dim());
        for i in 0..grid.n1 {
            for k in 0..grid.column_len() {
                let e = (-rate * grid.x1(i).abs()).exp();
                psi.push(e * psi_eval(params, 0, grid.x2(k)).unwrap());
            }
        }
        EigenPair {
            lambda: Complex64::new(0.0, 0.0),
            psi,
            residual: 0.0,
            iterations: 0,
        }
    }

    #[test]
    fn synthetic_decay_rate() {
        let p = WaveguideParams::new(1.0, 0.4).unwrap();
        let g = StripGrid::new(60.0, 1199, 10, 1.0).unwrap();
        let pair = synthetic(&p, &g, 0.3);
        let k = decay_rate(&pair, &g, &p).unwrap();
        assert!((k - 0.3).abs() < 0.003, "k = {k}");
        assert!(symmetry_defect(&pair, &g) < 1e-12);
    }

    #[test]
    fn underflow_is_reported() {
        let p = WaveguideParams::new(1.0, 0.4).unwrap();
        let g = StripGrid::new(60.0, 599, 6, 1.0).unwrap();
        let pair = synthetic(&p, &g, 40.0);
        assert!(matches!(decay_rate(&pair, &g, &p), Err(Error::Fit(_))));
    }

    #[test]
    fn discrete_threshold_converges() {
        let p = WaveguideParams::new(1.0, 0.4).unwrap();
        let e1 = discrete_threshold(&p, 15).unwrap() - 0.16;
        let e2 = discrete_threshold(&p, 31).unwrap() - 0.16;
        assert!(e2.abs() < e1.abs() / 3.0);
        assert!(e2.abs() < 1e-3);
    }

    #[test]
    fn field_dump_layout() {
        let p = WaveguideParams::new(1.0, 0.4).unwrap();
        let g = StripGrid::new(2.0, 3, 2, 1.0).unwrap();
        let pair = synthetic(&p, &g, 0.5);
        let mut buf = Vec::new();
        write_field(&pair, &g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 12);
        assert!(lines[0].starts_with("3 2 "));
        assert!(lines[5].starts_with("1 0 "));
    }
}
