//! Acceptance suite: each criterion reports what it measured against what it requires.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context};
use ptwg_core::asymptotics::{
    bracket_ode_oracle, brackets, check_th2_3, check_th2_4, construct_beta_for_th2_4,
    default_bracket_quadrature, predict, tau_neumann_limit, tau_with_doubled,
};
use ptwg_core::fd::{
    assemble, discrete_threshold, find_eigenpair, shift_scan, symmetry_defect, transverse_apply,
    BoundarySign, EigenOptions, ScanSpec, StripGrid,
};
use ptwg_core::transverse::{mu_j, psi_eval, ModeBasis, StripSource};
use ptwg_core::{Complex64, PerturbationProfile, Piece, QuadratureSpec, WaveguideParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{FdSettings, GridSpec};
use crate::oracle::{coupling, gap_threshold};
use crate::sweep::{run_sweep, RowStatus, SweepInput};

pub const CRITERIA: u8 = 10;
const SEED: u64 = 0x5eed_2024;
/// Residuals below this are rounding noise, not truncation error.
const ROUNDOFF_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    /// Top-wall sign used by the transverse-residual check.
    pub boundary_sign: BoundarySign,
    /// Gauss–Legendre nodes per panel in the Gram-matrix check.
    pub gram_nodes: usize,
    /// Criteria to run (empty means all).
    pub only: Vec<u8>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            boundary_sign: BoundarySign::SameSign,
            gram_nodes: 200,
            only: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub measured: String,
    pub required: String,
    pub passed: bool,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<26} measured: {} | required: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.required,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub criteria: Vec<CriterionReport>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.criteria {
            writeln!(f, "{c}")?;
        }
        let passed = self.criteria.iter().filter(|c| c.passed).count();
        write!(f, "{passed}/{} criteria passed", self.criteria.len())
    }
}

struct Outcome {
    measured: String,
    required: String,
    passed: bool,
}

type Check = fn(&ValidateOptions) -> anyhow::Result<Outcome>;

fn spec(id: u8) -> (&'static str, Duration, Check) {
    let s = Duration::from_secs;
    match id {
        1 => ("biorthonormality", s(1), biorthonormality),
        2 => ("transverse residual order", s(1), transverse_residual),
        3 => ("resolvent identity", s(10), resolvent_identity),
        4 => ("bracket oracle", s(10), bracket_oracle),
        5 => ("tau truncation", s(30), tau_truncation),
        6 => ("weak coupling, attractive", s(600), weak_coupling),
        7 => ("absence certification", s(600), absence),
        8 => ("critical zero-mean case", s(600), critical_case),
        9 => ("supercritical, tau > 0", s(600), supercritical),
        10 => ("symmetry suite", s(120), symmetry_suite),
        _ => panic!("unknown criterion {id}"),
    }
}

/// Runs one criterion, turning errors into failed entries.
pub fn run_criterion(id: u8, opts: &ValidateOptions) -> CriterionReport {
    let (name, limit, check) = spec(id);
    let start = Instant::now();
    let result = check(opts);
    let elapsed = start.elapsed();
    let within = elapsed <= limit;
    let (measured, required, passed) = match result {
        Ok(o) => (o.measured, o.required, o.passed),
        Err(e) => (format!("error: {e:#}"), String::from("no error"), false),
    };
    CriterionReport {
        id,
        name,
        measured,
        required: format!("{required}; runtime < {} s", limit.as_secs()),
        passed: passed && within,
        seconds: elapsed.as_secs_f64(),
    }
}

pub fn run_validate(opts: &ValidateOptions) -> ValidationReport {
    let ids: Vec<u8> = if opts.only.is_empty() {
        (1..=CRITERIA).collect()
    } else {
        opts.only.clone()
    };
    ValidationReport {
        criteria: ids.into_iter().map(|id| run_criterion(id, opts)).collect(),
    }
}

fn params(d: f64, alpha0: f64) -> anyhow::Result<WaveguideParams> {
    let p = WaveguideParams::new(d, alpha0)?;
    p.ensure_admissible()?;
    Ok(p)
}

/// `2/⟨b⟩` for the unit bump, so that the bump of half-width 1 has mean 2.
fn bump_with_mean(mean: f64) -> PerturbationProfile {
    let unit = PerturbationProfile::bump(0.0, 1.0, 1.0);
    let m = unit.moments(&QuadratureSpec::default()).mean;
    unit.amplified(mean / m)
}

/// One to three smooth bumps with random centres, widths and signed amplitudes.
pub fn random_profile(rng: &mut ChaCha8Rng) -> PerturbationProfile {
    let n = rng.gen_range(1..=3);
    let pieces = (0..n)
        .map(|_| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            Piece::bump(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.4..1.5),
                sign * rng.gen_range(0.3..1.5),
            )
        })
        .collect();
    PerturbationProfile::new(pieces).expect("valid random profile")
}

fn biorthonormality(opts: &ValidateOptions) -> anyhow::Result<Outcome> {
    let quad = QuadratureSpec::new(opts.gram_nodes, 2);
    let mut worst: f64 = 0.0;
    for d in [1.0, PI] {
        for a0 in [0.3, 0.9 * PI / d, 1.7 * PI / d] {
            let basis = ModeBasis::new(params(d, a0)?, 15)?;
            let gram = basis.biortho_gram(&quad);
            for (i, row) in gram.iter().enumerate() {
                for (j, g) in row.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g - target).norm());
                }
            }
        }
    }
    Ok(Outcome {
        measured: format!("max |Gram - I| = {worst:.2e}"),
        required: "< 1e-10".into(),
        passed: worst < 1e-10,
    })
}

fn transverse_residual_max(p: &WaveguideParams, j: usize, n2: usize, sign: BoundarySign) -> anyhow::Result<f64> {
    let h = p.d / (n2 + 1) as f64;
    let u: Vec<Complex64> = (0..n2 + 2)
        .map(|k| psi_eval(p, j, k as f64 * h))
        .collect::<ptwg_core::Result<_>>()?;
    let mu2 = mu_j(p, j)?.powi(2);
    Ok(transverse_apply(p.alpha0, p.d, &u, sign)
        .iter()
        .zip(&u)
        .map(|(tu, u)| (tu - mu2 * u).norm())
        .fold(0.0, f64::max))
}

fn transverse_residual(opts: &ValidateOptions) -> anyhow::Result<Outcome> {
    let cases = [(1.0, 0.3), (PI, 0.5), (PI, -0.5), (1.0, 0.9 * PI), (1.0, 1.7 * PI), (PI, 0.0)];
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut exact = 0;
    for (d, a0) in cases {
        let p = params(d, a0)?;
        for j in 0..=5 {
            let r1 = transverse_residual_max(&p, j, 39, opts.boundary_sign)?;
            let r2 = transverse_residual_max(&p, j, 79, opts.boundary_sign)?;
            // modes the stencil reproduces exactly leave only rounding noise
            if r1 < ROUNDOFF_RESIDUAL {
                exact += 1;
                continue;
            }
            let ratio = r1 / r2;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    Ok(Outcome {
        measured: format!(
            "residual ratio under h/2 in [{lo:.3}, {hi:.3}] (j <= 5, 6 configs; {exact} modes exact to rounding)"
        ),
        required: "every ratio in 4 +- 20% = [3.2, 4.8]".into(),
        passed: lo >= 3.2 && hi <= 4.8,
    })
}

fn resolvent_identity(_: &ValidateOptions) -> anyhow::Result<Outcome> {
    let d = PI;
    let p = params(d, 0.5)?;
    let z = Complex64::new(-1.0, 0.0);
    let bump = |s: f64| if s.abs() < 1.0 { (1.0 - 1.0 / (1.0 - s * s)).exp() } else { 0.0 };
    let f = move |x1: f64, x2: f64| Complex64::new(bump(x1 / 1.5) * bump((x2 - d / 2.0) / (0.4 * d)), 0.0);
    let source = StripSource::new((-1.5, 1.5), f);
    let basis = ModeBasis::new(p, 60)?;
    let h = 0.05;
    let x1: Vec<f64> = (0..=120).map(|i| -3.0 + h * i as f64).collect();
    let ny = 60;
    let hy = d / ny as f64;
    let x2: Vec<f64> = (0..=ny).map(|k| hy * k as f64).collect();
    let u = basis.resolvent_apply(z, &source, &x1, &x2, &QuadratureSpec::new(32, 4))?;
    // fourth-order five-point second differences
    let d2 = |a: Complex64, b: Complex64, c: Complex64, e: Complex64, g: Complex64, step: f64| {
        (-a + 16.0 * b - 30.0 * c + 16.0 * e - g) / (12.0 * step * step)
    };
    let (mut num, mut den) = (0.0, 0.0);
    for i in 2..x1.len() - 2 {
        for k in 2..x2.len() - 2 {
            let v = &u.values;
            let uxx = d2(v[i - 2][k], v[i - 1][k], v[i][k], v[i + 1][k], v[i + 2][k], h);
            let uyy = d2(v[i][k - 2], v[i][k - 1], v[i][k], v[i][k + 1], v[i][k + 2], hy);
            let lhs = -uxx - uyy - z * v[i][k];
            let fv = f(x1[i], x2[k]);
            num += (lhs - fv).norm_sqr();
            den += fv.norm_sqr();
        }
    }
    let rel = (num / den).sqrt();
    Ok(Outcome {
        measured: format!("relative interior L2 error = {rel:.2e} (J = 60, z = -1)"),
        required: "< 1e-3".into(),
        passed: rel < 1e-3,
    })
}

fn bracket_oracle(_: &ValidateOptions) -> anyhow::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let quad = default_bracket_quadrature();
    let (mut worst_rel, mut min_positive, mut worst_tail) = (0.0f64, f64::INFINITY, 0.0f64);
    let regimes = [params(PI, 0.5)?, params(PI, 2.5)?];
    for _ in 0..5 {
        let beta = random_profile(&mut rng);
        for p in &regimes {
            let idx: Vec<usize> = (1..=40).collect();
            let br = brackets(p, &beta, &idx, &quad)?;
            for b in &br {
                min_positive = min_positive.min(b.value);
                worst_tail = worst_tail.max(b.value.abs() / b.tail_error);
            }
            for b in &br[..10] {
                let o = bracket_ode_oracle(p, &beta, b.j, 4000)?;
                worst_rel = worst_rel.max((b.value - o.value).abs() / o.value.abs());
            }
        }
    }
    Ok(Outcome {
        measured: format!(
            "max rel diff (j <= 10) = {worst_rel:.2e}; min <beta v_j> = {min_positive:.3e}; max |<beta v_j>|/bound = {worst_tail:.3} (j <= 40)"
        ),
        required: "rel diff < 1e-6; all brackets > 0; ratio <= 1".into(),
        passed: worst_rel < 1e-6 && min_positive > 0.0 && worst_tail <= 1.0,
    })
}

fn tau_truncation(_: &ValidateOptions) -> anyhow::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x7a);
    let quad = QuadratureSpec::new(32, 2);
    let mut worst_gap: f64 = 0.0;
    let mut tours = 0;
    for p in [params(PI, 0.5)?, params(PI, 2.5)?, params(1.0, -0.7 * PI)?, params(PI, 0.0)?] {
        for _ in 0..2 {
            let beta = random_profile(&mut rng);
            let (t, doubled) = tau_with_doubled(&p, &beta, 64, &quad)?;
            worst_gap = worst_gap.max((doubled - t.value).abs() / t.tail_bound.max(1e-10));
            tours += 1;
        }
    }
    let neumann = params(PI, 0.0)?;
    let (mut max_tau, mut max_limit) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..20 {
        let beta = random_profile(&mut rng);
        let (t, _) = tau_with_doubled(&neumann, &beta, 64, &quad)?;
        max_tau = max_tau.max(t.value);
        max_limit = max_limit.max(tau_neumann_limit(&neumann, &beta, 64, &quad)?);
    }
    Ok(Outcome {
        measured: format!(
            "max |tau(128) - tau(64)| / max(1e-10, tail) = {worst_gap:.3} over {tours} profiles; Neumann max tau = {max_tau:.3e} (limit form {max_limit:.3e}) over 20 profiles"
        ),
        required: "ratio < 1; Neumann tau < 0".into(),
        passed: worst_gap < 1.0 && max_tau < 0.0,
    })
}

fn weak_coupling(_: &ValidateOptions) -> anyhow::Result<Outcome> {
    let input = SweepInput {
        params: params(PI, -0.5)?,
        beta: Some(bump_with_mean(2.0)),
        epsilons: vec![0.2, 0.1, 0.05],
        grid: GridSpec::default(),
        fd: FdSettings::default(),
        tau_terms: 128,
        record_runtime: false,
    };
    let rep = run_sweep(&input)?;
    ensure!(
        rep.rows.iter().all(|r| r.status == RowStatus::Ok),
        "sweep rows not all solved: {:?}",
        rep.rows.iter().map(|r| r.status).collect::<Vec<_>>()
    );
    let fit = rep.fit.context("no fit")?;
    let dev = fit.rel_dev_finest.context("no coefficient")?;
    let e = &fit.err_over_eps3;
    let growth = e.iter().cloned().fold(0.0, f64::max) / e[0];
    let spread = e.iter().cloned().fold(0.0, f64::max) / e.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        measured: format!(
            "coeff(eps=0.05) = {:.4} vs {:.4} (dev {:.1}%); |err|/eps^3 = [{}] (max / first = {growth:.2}, max / min = {spread:.2})",
            fit.coeff_finest.unwrap_or(f64::NAN),
            fit.target,
            100.0 * dev,
            e.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
        ),
        required: "dev <= 15%; max |err|/eps^3 <= 3x its value at the largest eps".into(),
        passed: dev <= 0.15 && growth <= 3.0,
    })
}

fn absence(_: &ValidateOptions) -> anyhow::Result<Outcome> {
    let beta = bump_with_mean(2.0);
    let cases: [(&str, WaveguideParams, f64); 3] = [
        ("repulsive mean", params(PI, 0.5)?, 0.1),
        ("neumann", params(PI, 0.0)?, 0.1),
        ("unperturbed", params(PI, 0.5)?, 0.0),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, p, eps) in cases {
        let grid = StripGrid::with_steps(40.0, 0.1, p.d / 16.0, p.d)?;
        let a = assemble(&p, coupling(&p, Some(&beta), eps), &grid)?;
        let mu0sq = mu_j(&p, 0)?.powi(2);
        let scan = ScanSpec {
            re: (mu0sq - 0.1, mu0sq),
            im: (-0.02, 0.02),
            n_re: 5,
            n_im: 5,
            threshold: discrete_threshold(&p, grid.n2)?,
            gap: gap_threshold(grid.l),
        };
        let rep = shift_scan(&a, &scan, &EigenOptions::default());
        let n_disc = rep.discrete().count();
        ok &= rep.absent();
        parts.push(format!(
            "{label}: {n_disc} discrete of {} found ({} unconverged, {} suspect)",
            rep.eigenvalues.len(),
            rep.unconverged,
            rep.suspect
        ));
    }
    Ok(Outcome {
        measured: parts.join("; "),
        required: "zero discrete eigenvalues in each scan (25 shifts)".into(),
        passed: ok,
    })
}

fn critical_case(_: &ValidateOptions) -> anyhow::Result<Outcome> {
    let p = params(PI, 0.5)?;
    let tilde = PerturbationProfile::odd_bump(0.0, 1.0, 1.0);
    let l = 3.0;
    let check = check_th2_3(&p, &tilde, l, &default_bracket_quadrature())?;
    let input = SweepInput {
        params: p,
        beta: Some(tilde.scaled(l)?),
        epsilons: vec![0.4, 0.3],
        grid: GridSpec::default(),
        fd: FdSettings::default(),
        tau_terms: 128,
        record_runtime: false,
    };
    let rep = run_sweep(&input)?;
    let mut ratios = Vec::new();
    let mut ok = check.holds;
    for r in &rep.rows {
        let pred = r.prediction.context("missing prediction")?;
        ok &= r.status == RowStatus::Ok;
        let Some(fd) = r.fd.as_ref() else { continue };
        let ratio = r.coeff_fit.unwrap_or(f64::NAN) / pred.tau.value.powi(2);
        ok &= fd.class == ptwg_core::fd::EigenClass::Discrete && fd.lambda.im.abs() < 1e-6;
        ok &= (0.5..=1.5).contains(&ratio);
        ratios.push(format!("eps={}: ratio {ratio:.3}, Im {:.1e}, {:?}", r.epsilon, fd.lambda.im, fd.class));
    }
    Ok(Outcome {
        measured: format!(
            "stretch condition {:.4} >= {:.4}: {}; {}",
            check.lhs,
            check.rhs,
            check.holds,
            ratios.join("; ")
        ),
        required: "checker passes; discrete real eigenvalue with (mu0^2 - Re lambda)/(eps^4 tau^2) in [0.5, 1.5]".into(),
        passed: ok,
    })
}

fn supercritical(_: &ValidateOptions) -> anyhow::Result<Outcome> {
    let d = PI;
    let p = params(d, 2.0 * PI / d * 1.01)?;
    let beta = construct_beta_for_th2_4(&p)?.amplified(0.3);
    let check = check_th2_4(&p, &beta, &default_bracket_quadrature())?;
    let pred = predict(&p, &beta, 0.3)?;
    let mu0sq = pred.lambda_coeffs[0];
    let input = SweepInput {
        params: p,
        beta: Some(beta),
        epsilons: vec![0.3],
        grid: GridSpec::default(),
        fd: FdSettings {
            h1: 0.05,
            ..Default::default()
        },
        tau_terms: 128,
        record_runtime: false,
    };
    let rep = run_sweep(&input)?;
    let row = &rep.rows[0];
    let fd = row.fd.as_ref().context("FD eigenvalue not found")?;
    let ratio = row.coeff_fit.unwrap_or(f64::NAN) / pred.tau.value.powi(2);
    let real = fd.lambda.im.abs() < 1e-6;
    let discrete = fd.class == ptwg_core::fd::EigenClass::Discrete;
    Ok(Outcome {
        measured: format!(
            "positivity condition {:.3} >= {:.3} (m = {}): {}; tau = {:.4}; lambda_fd = {:.6} ({:?}, Im {:.1e}); ratio {ratio:.3}",
            check.lhs, check.rhs, check.m, check.holds, pred.tau.value, fd.lambda.re, fd.class, fd.lambda.im
        ),
        required: "checker passes; tau > 0; discrete real eigenvalue below mu0^2; (mu0^2 - Re lambda)/(eps^4 tau^2) in [0.5, 1.5]".into(),
        passed: check.holds && pred.tau.value > 0.0 && real && discrete && fd.lambda.re < mu0sq && (0.5..=1.5).contains(&ratio),
    })
}

fn in_sector(lambda: Complex64, max_alpha: f64, tol: f64) -> bool {
    lambda.re >= -tol && lambda.im.abs() <= 2.0 * max_alpha * lambda.re.max(0.0).sqrt() + tol
}

fn symmetry_suite(_: &ValidateOptions) -> anyhow::Result<Outcome> {
    let opts = EigenOptions::default();
    let tol = 1e-8;

    // α ↦ −α
    let p = params(PI, 0.4)?;
    let q = params(PI, -0.4)?;
    let beta = PerturbationProfile::bump(0.7, 1.0, 1.0);
    let neg = beta.amplified(-1.0);
    let grid = StripGrid::with_steps(8.0, 0.1, PI / 16.0, PI)?;
    let a = assemble(&p, coupling(&p, Some(&beta), 0.3), &grid)?;
    let b = assemble(&q, coupling(&q, Some(&neg), 0.3), &grid)?;
    let max_alpha = (0..grid.n1)
        .map(|i| (0.4 + 0.3 * beta.value(grid.x1(i))).abs())
        .fold(0.0, f64::max);
    let shifts = [
        Complex64::new(0.1, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(1.2, 0.2),
        Complex64::new(2.0, -0.3),
    ];
    let mut conj_gap: f64 = 0.0;
    let mut sector_ok = true;
    let mut sector_count = 0;
    for s in shifts {
        let x = find_eigenpair(&a, s, &opts)?;
        let y = find_eigenpair(&b, s.conj(), &opts)?;
        conj_gap = conj_gap.max((y.lambda - x.lambda.conj()).norm());
        for l in [x.lambda, y.lambda] {
            sector_ok &= in_sector(l, max_alpha, tol);
            sector_count += 1;
        }
    }
    let scan = ScanSpec {
        re: (0.0, 3.0),
        im: (-0.5, 0.5),
        n_re: 4,
        n_im: 3,
        threshold: 0.0,
        gap: 0.0,
    };
    for e in shift_scan(&a, &scan, &opts).eigenvalues {
        sector_ok &= in_sector(e.lambda, max_alpha, tol);
        sector_count += 1;
    }

    // odd α about x₁ = 0
    let p0 = params(PI, 0.0)?;
    let odd = PerturbationProfile::odd_bump(0.0, 1.0, 1.0);
    let g0 = StripGrid::with_steps(5.0, 0.05, PI / 16.0, PI)?;
    let a0 = assemble(&p0, coupling(&p0, Some(&odd), 0.5), &g0)?;
    let max_odd = (0..g0.n1).map(|i| (0.5 * odd.value(g0.x1(i))).abs()).fold(0.0, f64::max);
    let (mut max_im, mut max_defect) = (0.0f64, 0.0f64);
    for s in [0.0, 0.45] {
        let pair = find_eigenpair(&a0, Complex64::new(s, 0.0), &opts)?;
        max_im = max_im.max(pair.lambda.im.abs());
        max_defect = max_defect.max(symmetry_defect(&pair, &g0));
        sector_ok &= in_sector(pair.lambda, max_odd, tol);
        sector_count += 1;
    }
    Ok(Outcome {
        measured: format!(
            "max |lambda(-alpha) - conj lambda(alpha)| = {conj_gap:.1e}; sector holds for {sector_count} eigenvalues: {sector_ok}; odd alpha: max |Im| = {max_im:.1e}, symmetry defect = {max_defect:.1e}"
        ),
        required: "conjugate within 1e-8; all in sector (tol 1e-8); |Im| < 1e-6; defect < 1e-6".into(),
        passed: conj_gap < 1e-8 && sector_ok && max_im < 1e-6 && max_defect < 1e-6,
    })
}
