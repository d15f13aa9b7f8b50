use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use ptwg::config::{ExperimentConfig, Mode};
use ptwg::oracle::{auto_grid, coupling, gap_threshold, refine_eigenvalue};
use ptwg::output::{write_json, write_mode_table};
use ptwg::sweep::{run_sweep, write_sweep_csv, SweepInput};
use ptwg::validate::{run_validate, ValidateOptions};
use ptwg_core::asymptotics::{default_bracket_quadrature, predict_with, tau, Existence};
use ptwg_core::fd::{assemble, discrete_threshold, shift_scan, write_field, BoundarySign, EigenOptions, ScanSpec};
use ptwg_core::transverse::{mu_j, ModeBasis};
use ptwg_core::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Modes,
    Tau,
    Predict,
    Fd,
    Sweep,
    Validate,
}

/// Bound states of a strip with PT-symmetric Robin walls.
#[derive(Debug, Parser)]
#[command(name = "ptwg", version)]
struct Cli {
    command: Command,
    /// Experiment TOML file (optional for `validate`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; overrides the config, defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long)]
    jobs: Option<usize>,
    /// Flip the top-wall sign of the transverse stencil (validate only).
    #[arg(long)]
    flip_boundary_sign: bool,
    /// Gauss-Legendre nodes for the Gram check (validate only).
    #[arg(long, default_value_t = 200)]
    gram_nodes: usize,
    /// Run only these criteria, e.g. `--criteria 1,2,5` (validate only).
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Serialize)]
#[serde(untagged)]
enum FdOutcome {
    Found(ptwg::oracle::FdEstimate),
    Scan {
        epsilon: f64,
        scan: ptwg_core::fd::ScanReport,
    },
}

fn run_fd(cfg: &ExperimentConfig, out: &mut dyn Write) -> anyhow::Result<()> {
    let p = &cfg.params;
    let beta = cfg.profile()?;
    let quad = default_bracket_quadrature();
    let opts = EigenOptions {
        tol: cfg.fd.tol,
        maxit: cfg.fd.maxit,
        ..Default::default()
    };
    let mu0sq = mu_j(p, 0)?.powi(2);
    let mut results = Vec::new();
    for &eps in &cfg.epsilons {
        let pred = beta
            .as_ref()
            .map(|b| predict_with(p, b, eps, cfg.tau_terms, &quad))
            .transpose()?
            .filter(|pr| pr.exists == Existence::Yes);
        let grid = match cfg.grid.explicit(p.d)? {
            Some(g) => g,
            None => auto_grid(p, beta.as_ref(), pred.map(|pr| pr.decay_rate), &cfg.fd)?,
        };
        if let Some(pr) = pred {
            let est = refine_eigenvalue(p, beta.as_ref(), eps, &grid, Complex64::new(pr.lambda, 0.0), &cfg.fd)?;
            if let Some(path) = &cfg.field_dump {
                let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_field(&est.pair, &est.finest_grid, BufWriter::new(f))?;
            }
            results.push(FdOutcome::Found(est));
        } else {
            let a = assemble(p, coupling(p, beta.as_ref(), eps), &grid)?;
            let spec = ScanSpec {
                re: (mu0sq - 0.1, mu0sq),
                im: (-0.02, 0.02),
                n_re: 5,
                n_im: 5,
                threshold: discrete_threshold(p, grid.n2)?,
                gap: gap_threshold(grid.l),
            };
            results.push(FdOutcome::Scan {
                epsilon: eps,
                scan: shift_scan(&a, &spec, &opts),
            });
        }
    }
    write_json(&results, out)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    if let Command::Validate = cli.command {
        let opts = ValidateOptions {
            boundary_sign: if cli.flip_boundary_sign {
                BoundarySign::OutwardNormal
            } else {
                BoundarySign::SameSign
            },
            gram_nodes: cli.gram_nodes,
            only: cli.criteria.clone(),
        };
        let report = run_validate(&opts);
        let mut out = sink(cli.out.as_deref())?;
        writeln!(out, "{report}")?;
        out.flush()?;
        return Ok(report.all_passed());
    }
    let Some(path) = &cli.config else {
        bail!("--config is required for this command");
    };
    let cfg = ExperimentConfig::load(path)?;
    let expected = match cli.command {
        Command::Modes => Mode::Modes,
        Command::Tau => Mode::Tau,
        Command::Predict => Mode::Predict,
        Command::Fd => Mode::Fd,
        Command::Sweep => Mode::Sweep,
        Command::Validate => unreachable!(),
    };
    if cfg.mode != expected {
        eprintln!("note: config mode is {:?}, running {:?}", cfg.mode, expected);
    }
    let mut out = sink(cli.out.as_deref().or(cfg.output.as_deref()))?;
    let quad = default_bracket_quadrature();
    match cli.command {
        Command::Modes => write_mode_table(&ModeBasis::new(cfg.params, cfg.modes)?, &mut out)?,
        Command::Tau => {
            let beta = cfg.profile()?.context("tau needs a perturbation profile")?;
            write_json(&tau(&cfg.params, &beta, cfg.tau_terms, &quad)?, &mut out)?;
        }
        Command::Predict => {
            let beta = cfg.profile()?.context("predict needs a perturbation profile")?;
            let preds = cfg
                .epsilons
                .iter()
                .map(|&e| predict_with(&cfg.params, &beta, e, cfg.tau_terms, &quad))
                .collect::<ptwg_core::Result<Vec<_>>>()?;
            write_json(&preds, &mut out)?;
        }
        Command::Fd => run_fd(&cfg, &mut out)?,
        Command::Sweep => {
            let report = run_sweep(&SweepInput::from_config(&cfg)?)?;
            write_sweep_csv(&report.rows, &mut out)?;
            if let Some(fit) = &report.fit {
                eprintln!("{}", serde_json::to_string(fit)?);
            }
        }
        Command::Validate => unreachable!(),
    }
    out.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
