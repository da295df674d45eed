//! Run configuration: a single JSON document, schema-checked on load.
//! The schema ships in `schemas/run_config.schema.json`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use wide_core::energy::DissipationSpec;
use wide_core::grid::{BoundaryCondition, SpatialField, SpatialGrid};
use wide_core::optimize::{SolveOptions, SolverPath};
use wide_core::presets::{preset, Preset};
use wide_core::problem::ProblemSpec;
use wide_core::wide::TimeGrid;

use crate::error::{CliError, EXIT_CONFIG};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Registry preset name, e.g. `"wave"` or `"telegraph-on-top-of(nlw(4))"`.
    pub preset: String,
    pub domain: DomainConfig,
    pub time: TimeConfig,
    /// Strictly decreasing eps schedule; `solve` requires exactly one entry.
    pub epsilons: Vec<f64>,
    /// Damping switch override: `0` strips the dissipation terms, `1`
    /// requires the preset to carry some.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<u8>,
    pub initial: InitialConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub checks: CheckConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub length: f64,
    pub nodes: usize,
    pub bc: BoundaryCondition,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub horizon: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub w0: ProfileConfig,
    pub w1: ProfileConfig,
}

/// Named initial-data profiles, or nodal values from a file (one value per
/// line, matching the stored node count).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileConfig {
    Zero,
    SingleMode {
        mode: i64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    FromFile {
        path: String,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub memory: usize,
    pub path: SolverPath,
    pub warm_start: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self {
            tolerance: d.grad_tolerance,
            max_iterations: d.max_iterations,
            memory: d.memory,
            path: d.path,
            warm_start: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    /// Relative tolerance of the energy inequality.
    pub energy_tolerance: f64,
    /// Step tolerance of the approximate-energy monotonicity, relative to
    /// `1 + F(0)`.
    pub f_monotone_tolerance: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            energy_tolerance: 0.05,
            f_monotone_tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub kind: OracleKind,
    /// Step of the leapfrog oracle.
    #[serde(default = "default_oracle_dt")]
    pub dt: f64,
}

fn default_oracle_dt() -> f64 {
    1e-3
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    #[default]
    Auto,
    ExactMode,
    Leapfrog,
    None,
}

/// Everything resolved and validated, ready to run.
pub struct ResolvedConfig {
    pub config: RunConfig,
    pub preset: Preset,
    pub problem: ProblemSpec,
    pub warnings: Vec<String>,
    /// Set when `w0` is a pure single mode with zero `w1`, enabling the
    /// closed-form oracle.
    pub single_mode: Option<(i64, f64)>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::new(EXIT_CONFIG, msg)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| invalid(format!("config {} is not valid: {e}", path.display())))
    }

    pub fn resolve(self, config_dir: &Path) -> Result<ResolvedConfig, CliError> {
        let mut warnings = Vec::new();
        let preset = preset(&self.preset).map_err(|e| invalid(format!("preset: {e}")))?;

        let grid = Arc::new(
            SpatialGrid::new(self.domain.length, self.domain.nodes, self.domain.bc)
                .map_err(|e| invalid(format!("domain: {e}")))?,
        );

        if !(self.time.dt > 0.0) {
            return Err(invalid("time.dt must be positive"));
        }
        let steps = (self.time.horizon / self.time.dt).round() as usize;
        let time = TimeGrid::new(self.time.horizon, steps.max(1))
            .map_err(|e| invalid(format!("time: {e}")))?;
        let dt = time.dt();
        if ((dt - self.time.dt) / self.time.dt).abs() > 1e-9 {
            warnings.push(format!(
                "time.dt adjusted to {dt:.12e} so that the horizon is a whole number of steps"
            ));
        }

        if self.epsilons.is_empty() {
            return Err(invalid("epsilons must be nonempty"));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(invalid("epsilons must be positive"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("epsilons must be strictly decreasing"));
        }
        let eps_min = *self.epsilons.last().unwrap();
        let eps_max = self.epsilons[0];
        if dt > eps_min / 10.0 + 1e-15 {
            return Err(invalid(format!(
                "guard dt <= eps/10 violated: dt = {dt:.6e} exceeds min(eps)/10 = {:.6e}",
                eps_min / 10.0
            )));
        }
        if self.time.horizon / eps_min > 40.0 + 1e-9 {
            return Err(invalid(format!(
                "guard T/eps <= 40 violated: horizon/min(eps) = {:.3}",
                self.time.horizon / eps_min
            )));
        }
        let horizon_ratio = self.time.horizon / eps_max;
        if horizon_ratio < 2.0 {
            return Err(invalid(format!(
                "guard T/eps >= 2 violated: horizon/max(eps) = {horizon_ratio:.3}"
            )));
        }
        if horizon_ratio < 5.0 {
            warnings.push(format!(
                "horizon/max(eps) = {horizon_ratio:.3} < 5: the largest-eps entries have no \
                 truncation-free reporting window"
            ));
        }

        // damping override
        let (energy, dissipation) = match self.kappa {
            None => (preset.energy.clone(), preset.dissipation.clone()),
            Some(0) => (preset.energy.clone(), DissipationSpec::empty()),
            Some(1) => {
                if preset.dissipation.is_empty() {
                    return Err(invalid(
                        "kappa = 1 requires a preset with dissipation terms \
                         (use a *-on-top-of wrapper)",
                    ));
                }
                (preset.energy.clone(), preset.dissipation.clone())
            }
            Some(other) => {
                return Err(invalid(format!("kappa must be 0 or 1, got {other}")));
            }
        };

        let w0 = build_profile(&self.initial.w0, &grid, config_dir)?;
        let w1 = build_profile(&self.initial.w1, &grid, config_dir)?;
        let single_mode = match (&self.initial.w0, &self.initial.w1) {
            (ProfileConfig::SingleMode { mode, amplitude }, ProfileConfig::Zero) => {
                Some((*mode, *amplitude))
            }
            _ => None,
        };

        if !(self.solver.tolerance > 0.0) {
            return Err(invalid("solver.tolerance must be positive"));
        }
        let options = SolveOptions {
            grad_tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
            memory: self.solver.memory,
            path: self.solver.path,
            ..Default::default()
        };

        let problem = ProblemSpec::new(
            preset.name.clone(),
            energy,
            dissipation,
            grid,
            time,
            w0,
            w1,
            self.epsilons.clone(),
            options,
        )
        .map_err(|e| invalid(format!("problem: {e}")))?;

        Ok(ResolvedConfig {
            config: self,
            preset,
            problem,
            warnings,
            single_mode,
        })
    }
}

fn build_profile(
    profile: &ProfileConfig,
    grid: &Arc<SpatialGrid>,
    config_dir: &Path,
) -> Result<SpatialField, CliError> {
    match profile {
        ProfileConfig::Zero => Ok(SpatialField::zeros(grid.clone())),
        ProfileConfig::SingleMode { mode, amplitude } => {
            if grid.is_periodic() {
                let xi = grid.wavenumber(*mode);
                Ok(SpatialField::from_fn(grid.clone(), |x| {
                    amplitude * (xi * x).sin()
                }))
            } else {
                // Dirichlet modes vanish at both walls
                let l = grid.length();
                let k = *mode as f64;
                Ok(SpatialField::from_fn(grid.clone(), |x| {
                    amplitude * (k * std::f64::consts::PI * x / l).sin()
                }))
            }
        }
        ProfileConfig::Gaussian {
            center,
            width,
            amplitude,
        } => {
            if !(*width > 0.0) {
                return Err(invalid("gaussian width must be positive"));
            }
            Ok(SpatialField::from_fn(grid.clone(), |x| {
                let z = (x - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }))
        }
        ProfileConfig::FromFile { path } => {
            let full = config_dir.join(path);
            let text = std::fs::read_to_string(&full).map_err(|e| {
                invalid(format!("cannot read initial data {}: {e}", full.display()))
            })?;
            let values: Vec<f64> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| {
                    l.parse::<f64>()
                        .map_err(|e| invalid(format!("bad value `{l}` in {}: {e}", full.display())))
                })
                .collect::<Result<_, _>>()?;
            SpatialField::new(grid.clone(), values)
                .map_err(|e| invalid(format!("initial data: {e}")))
        }
    }
}
