//! ε-sweeps comparing the weak-coupling expansion with the FD oracle.

use std::io::Write;
use std::time::Instant;

use ptwg_core::asymptotics::{predict_with, default_bracket_quadrature, Existence, Prediction};
use ptwg_core::fd::EigenClass;
use ptwg_core::transverse::mu_j;
use ptwg_core::{Complex64, Error, PerturbationProfile, WaveguideParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, FdSettings, GridSpec};
use crate::oracle::{auto_grid, refine_eigenvalue, FdEstimate};
use crate::output::fmt_f64;

pub const CSV_HEADER: [&str; 10] = [
    "epsilon",
    "re_pred",
    "im_pred",
    "re_fd",
    "im_fd",
    "abs_err",
    "coeff_fit",
    "decay_pred",
    "decay_fd",
    "runtime_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    /// No eigenvalue predicted; the FD oracle is not run.
    Absent,
    /// The FD solve failed; the sweep continues.
    Flagged,
}

/// Which power of ε the threshold distance is fitted against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    /// `(μ₀² − λ)/ε² → α₀²⟨β⟩²`
    Quadratic,
    /// `(μ₀² − λ)/ε⁴ → τ²`
    Quartic,
}

impl Law {
    pub fn power(self) -> i32 {
        match self {
            Law::Quadratic => 2,
            Law::Quartic => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub lambda_pred: Complex64,
    pub lambda_fd: Option<Complex64>,
    pub abs_err: Option<f64>,
    pub coeff_fit: Option<f64>,
    pub decay_pred: f64,
    pub decay_fd: Option<f64>,
    pub runtime_ms: u64,
    pub status: RowStatus,
    pub class: Option<EigenClass>,
    pub message: Option<String>,
    #[serde(skip)]
    pub prediction: Option<Prediction>,
    #[serde(skip)]
    pub fd: Option<FdEstimate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub law: Law,
    /// `α₀²⟨β⟩²` or `τ²`.
    pub target: f64,
    /// Fitted coefficient at the smallest ε with an FD value.
    pub coeff_finest: Option<f64>,
    pub rel_dev_finest: Option<f64>,
    /// `|λ_fd − λ_pred| / ε³` per row (NaN where absent).
    pub err_over_eps3: Vec<f64>,
    /// Least-squares slope of `log |λ_fd − λ_pred|` against `log ε`.
    pub error_order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub fit: Option<FitSummary>,
}

/// Everything a sweep needs, detached from the file-level config.
#[derive(Debug, Clone)]
pub struct SweepInput {
    pub params: WaveguideParams,
    pub beta: Option<PerturbationProfile>,
    pub epsilons: Vec<f64>,
    pub grid: GridSpec,
    pub fd: FdSettings,
    pub tau_terms: usize,
    pub record_runtime: bool,
}

impl SweepInput {
    pub fn from_config(cfg: &ExperimentConfig) -> anyhow::Result<Self> {
        Ok(Self {
            params: cfg.params,
            beta: cfg.profile()?,
            epsilons: cfg.epsilons.clone(),
            grid: cfg.grid,
            fd: cfg.fd,
            tau_terms: cfg.tau_terms,
            record_runtime: cfg.record_runtime,
        })
    }
}

fn run_row(input: &SweepInput, eps: f64) -> anyhow::Result<SweepRow> {
    let start = Instant::now();
    let params = &input.params;
    let mu0 = mu_j(params, 0)?;
    let mut row = SweepRow {
        epsilon: eps,
        lambda_pred: Complex64::new(mu0 * mu0, 0.0),
        lambda_fd: None,
        abs_err: None,
        coeff_fit: None,
        decay_pred: 0.0,
        decay_fd: None,
        runtime_ms: 0,
        status: RowStatus::Absent,
        class: None,
        message: None,
        prediction: None,
        fd: None,
    };
    let Some(beta) = input.beta.as_ref() else {
        return Ok(row);
    };
    let pred = predict_with(params, beta, eps, input.tau_terms, &default_bracket_quadrature())?;
    row.lambda_pred = Complex64::new(pred.lambda, 0.0);
    row.decay_pred = pred.decay_rate;
    row.prediction = Some(pred);
    if pred.exists != Existence::Yes {
        return Ok(row);
    }
    let grid = match input.grid.explicit(params.d)? {
        Some(g) => g,
        None => auto_grid(params, Some(beta), Some(pred.decay_rate), &input.fd)?,
    };
    match refine_eigenvalue(params, Some(beta), eps, &grid, row.lambda_pred, &input.fd) {
        Ok(est) => {
            let law = if pred.k_coeffs[0] != 0.0 { Law::Quadratic } else { Law::Quartic };
            row.status = RowStatus::Ok;
            row.lambda_fd = Some(est.lambda);
            row.abs_err = Some((row.lambda_pred - est.lambda).norm());
            row.coeff_fit = Some((mu0 * mu0 - est.lambda.re) / eps.powi(law.power()));
            row.decay_fd = est.decay_rate;
            row.class = Some(est.class);
            row.fd = Some(est);
        }
        Err(e @ (Error::MaxIterations { .. } | Error::SingularShift { .. } | Error::Fit(_))) => {
            row.status = RowStatus::Flagged;
            row.message = Some(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    if input.record_runtime {
        row.runtime_ms = start.elapsed().as_millis() as u64;
    }
    Ok(row)
}

fn fit_summary(rows: &[SweepRow]) -> Option<FitSummary> {
    let pred = rows.iter().find_map(|r| r.prediction)?;
    if pred.exists != Existence::Yes {
        return None;
    }
    let (law, target) = if pred.k_coeffs[0] != 0.0 {
        (Law::Quadratic, pred.k_coeffs[0].powi(2))
    } else {
        (Law::Quartic, pred.k_coeffs[1].powi(2))
    };
    let finest = rows.iter().rev().find(|r| r.coeff_fit.is_some());
    let coeff_finest = finest.and_then(|r| r.coeff_fit);
    let err_over_eps3 = rows
        .iter()
        .map(|r| r.abs_err.map_or(f64::NAN, |e| e / r.epsilon.powi(3)))
        .collect();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.abs_err.filter(|&e| e > 0.0).map(|e| (r.epsilon.ln(), e.ln())))
        .collect();
    let error_order = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Some(FitSummary {
        law,
        target,
        coeff_finest,
        rel_dev_finest: coeff_finest.map(|c| (c - target).abs() / target),
        err_over_eps3,
        error_order,
    })
}

/// Runs every ε of the sweep (in parallel) and fits the threshold law.
pub fn run_sweep(input: &SweepInput) -> anyhow::Result<SweepReport> {
    let rows = input
        .epsilons
        .par_iter()
        .map(|&eps| run_row(input, eps))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let fit = fit_summary(&rows);
    Ok(SweepReport { rows, fit })
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record([
            fmt_f64(r.epsilon),
            fmt_f64(r.lambda_pred.re),
            fmt_f64(r.lambda_pred.im),
            opt(r.lambda_fd.map(|z| z.re)),
            opt(r.lambda_fd.map(|z| z.im)),
            opt(r.abs_err),
            opt(r.coeff_fit),
            fmt_f64(r.decay_pred),
            opt(r.decay_fd),
            r.runtime_ms.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn input(alpha0: f64, beta: Option<PerturbationProfile>) -> SweepInput {
        SweepInput {
            params: WaveguideParams::new(PI, alpha0).unwrap(),
            beta,
            epsilons: vec![0.2, 0.1],
            grid: GridSpec::default(),
            fd: FdSettings::default(),
            tau_terms: 16,
            record_runtime: false,
        }
    }

    #[test]
    fn unperturbed_rows_are_absent() {
        let rep = run_sweep(&input(0.5, None)).unwrap();
        assert!(rep.rows.iter().all(|r| r.status == RowStatus::Absent));
        assert!(rep.fit.is_none());
    }

    #[test]
    fn neumann_rows_are_absent() {
        let rep = run_sweep(&input(0.0, Some(PerturbationProfile::bump(0.0, 1.0, 1.0)))).unwrap();
        assert!(rep.rows.iter().all(|r| r.status == RowStatus::Absent));
    }

    #[test]
    fn csv_header_and_empty_fields() {
        let rep = run_sweep(&input(0.5, None)).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rep.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "epsilon,re_pred,im_pred,re_fd,im_fd,abs_err,coeff_fit,decay_pred,decay_fd,runtime_ms"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 10);
        assert_eq!(first[3], "");
        assert_eq!(first[9], "0");
    }
}
