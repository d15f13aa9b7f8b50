//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ptwg_core::fd::StripGrid;
use ptwg_core::{PerturbationProfile, WaveguideParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Modes,
    Tau,
    Predict,
    Fd,
    Sweep,
    Validate,
}

/// Explicit truncated grid, or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Explicit {
        #[serde(rename = "L")]
        l: f64,
        #[serde(rename = "N1")]
        n1: usize,
        #[serde(rename = "N2")]
        n2: usize,
    },
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Auto(AutoTag::Auto)
    }
}

impl GridSpec {
    pub fn explicit(&self, d: f64) -> anyhow::Result<Option<StripGrid>> {
        match *self {
            GridSpec::Explicit { l, n1, n2 } => Ok(Some(StripGrid::new(l, n1, n2, d)?)),
            GridSpec::Auto(_) => Ok(None),
        }
    }
}

/// Finite-difference knobs shared by the `fd` and `sweep` modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdSettings {
    /// Longitudinal step of the coarse auto grid.
    pub h1: f64,
    /// Interior transverse points of the coarse auto grid.
    pub n2: usize,
    /// Auto grid half-length in units of the predicted decay length.
    pub l_factor: f64,
    /// Auto grid half-length when no eigenvalue is predicted.
    pub l_absent: f64,
    /// Two-grid extrapolation in h.
    pub richardson: bool,
    pub tol: f64,
    pub maxit: usize,
}

impl Default for FdSettings {
    fn default() -> Self {
        Self {
            h1: 0.1,
            n2: 15,
            l_factor: 6.0,
            l_absent: 40.0,
            richardson: true,
            tol: 1e-9,
            maxit: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub params: WaveguideParams,
    /// Pieces of `β`; omitted or empty means the unperturbed guide.
    #[serde(default)]
    pub beta: Vec<ptwg_core::Piece>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub fd: FdSettings,
    /// Series terms for `τ`.
    #[serde(default = "default_tau_terms")]
    pub tau_terms: usize,
    /// Highest transverse index in the `modes` table.
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Write measured wall time into `runtime_ms` (breaks bit-identical output).
    #[serde(default)]
    pub record_runtime: bool,
    /// Plain-text eigenfunction dump for the `fd` mode.
    #[serde(default)]
    pub field_dump: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_tau_terms() -> usize {
    ptwg_core::asymptotics::DEFAULT_TAU_TERMS
}

fn default_modes() -> usize {
    15
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        WaveguideParams::new(self.params.d, self.params.alpha0)?.ensure_admissible()?;
        if self.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            bail!("epsilons must be positive and finite");
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            bail!("epsilons must be strictly decreasing");
        }
        if matches!(self.mode, Mode::Predict | Mode::Fd | Mode::Sweep) && self.epsilons.is_empty() {
            bail!("mode {:?} needs at least one epsilon", self.mode);
        }
        if !(self.fd.h1 > 0.0 && self.fd.n2 >= 2 && self.fd.l_factor > 0.0 && self.fd.l_absent > 0.0) {
            bail!("invalid [fd] settings");
        }
        self.profile()?;
        Ok(())
    }

    pub fn profile(&self) -> anyhow::Result<Option<PerturbationProfile>> {
        if self.beta.is_empty() {
            return Ok(None);
        }
        Ok(Some(PerturbationProfile::new(self.beta.clone())?))
    }
}
