//! Run configuration, read from a TOML file and overridden by flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use emden_core::experiments::{GridSpec, DEFAULT_BREAK_TOL};
use emden_core::minimize::SolveOptions;
use emden_core::weight::ProblemParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub grid: GridSection,
    pub solver: SolveOptions,
    pub sweep: SweepSection,
    pub moving_shell: MovingShellSection,
    pub continuity: ContinuitySection,
    pub sobolev: SobolevSection,
    pub verify: VerifySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub dim: usize,
    /// Falls back to the per-dimension default when absent.
    pub p: Option<f64>,
    pub radius: f64,
    pub alpha: f64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            dim: 3,
            p: None,
            radius: 0.0,
            alpha: 40.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Nodes of the radial grid for radial-only commands.
    pub n: usize,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let spec = GridSpec::default();
        Self {
            n: 2049,
            n_r: spec.n_r,
            n_theta: spec.n_theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub alphas: Vec<f64>,
    pub break_tol: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            alphas: vec![10.0, 20.0, 40.0, 80.0, 160.0, 320.0],
            break_tol: DEFAULT_BREAK_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MovingShellSection {
    pub delta: f64,
}

impl Default for MovingShellSection {
    fn default() -> Self {
        Self { delta: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuitySection {
    pub radii: Vec<f64>,
    pub endpoint: f64,
}

impl Default for ContinuitySection {
    fn default() -> Self {
        Self {
            radii: vec![1e-1, 1e-2, 1e-3],
            endpoint: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SobolevSection {
    pub exponents: Vec<f64>,
    /// Optional Sobolev constant for R₀ in `constants`.
    pub value: Option<f64>,
}

impl Default for SobolevSection {
    fn default() -> Self {
        Self {
            exponents: vec![1.5, 2.0, 3.0, 4.0],
            value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Radial nodes of the coarser grid of the convergence-rate pair.
    pub n: usize,
    pub dims: Vec<usize>,
    pub radii: Vec<f64>,
    pub alphas: Vec<f64>,
    /// A `solve-radial` result file whose diagnostics are recomputed.
    pub result: Option<String>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            n: 8193,
            dims: vec![1, 2, 3],
            radii: vec![0.0, 0.3, 0.7, 1.0],
            alphas: vec![5.0, 40.0],
            result: None,
        }
    }
}

/// Exponent used when the configuration leaves p open.
pub fn default_exponent(dim: usize) -> f64 {
    if dim == 3 {
        2.0
    } else {
        3.0
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn exponent(&self) -> f64 {
        self.problem.p.unwrap_or_else(|| default_exponent(self.problem.dim))
    }

    /// Problem parameters without admissibility checks.
    pub fn params(&self) -> ProblemParams {
        ProblemParams::unchecked(self.problem.dim, self.exponent(), self.problem.radius, self.problem.alpha)
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            n_r: self.grid.n_r,
            n_theta: self.grid.n_theta,
        }
    }

    /// Checks that do not need a solve, so that bad input fails before any
    /// output is produced.
    pub fn validate(&self) -> Result<()> {
        if self.problem.dim == 0 {
            bail!("problem.dim must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.problem.radius) {
            bail!("problem.radius must lie in [0, 1], got {}", self.problem.radius);
        }
        if !(self.problem.alpha >= 0.0) || !self.problem.alpha.is_finite() {
            bail!("problem.alpha must be finite and nonnegative, got {}", self.problem.alpha);
        }
        if self.grid.n < 3 {
            bail!("grid.n must be at least 3, got {}", self.grid.n);
        }
        if self.solver.window == 0 {
            bail!("solver.window must be positive");
        }
        if self.sweep.alphas.windows(2).any(|w| !(w[0] < w[1])) {
            bail!("sweep.alphas must be strictly increasing");
        }
        if !(self.sweep.break_tol > 0.0) {
            bail!("sweep.break_tol must be positive");
        }
        if self.continuity.endpoint != 0.0 && self.continuity.endpoint != 1.0 {
            bail!("continuity.endpoint must be 0 or 1");
        }
        Ok(())
    }
}
