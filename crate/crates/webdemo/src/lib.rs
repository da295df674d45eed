//! Browser demo: three interactive operations exported through
//! wasm-bindgen for the static page in `www/`.
//!
//! - [`solve_demo`] minimizes the weighted space-time functional for one
//!   preset and returns the field together with the reference trajectory
//!   and the energy traces;
//! - [`sweep_demo`] runs an eps-continuation and returns the
//!   distance-to-oracle curve with its log-log slope;
//! - [`residual_demo`] evaluates the fourth-order Euler-Lagrange residual
//!   of the returned minimizer layer by layer.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use wide_core::diagnostics::{approx_energy_trace, compare, convergence_slope, energy_trace};
use wide_core::grid::{SpatialField, SpatialGrid};
use wide_core::optimize::{minimize, SolveOptions};
use wide_core::presets::preset;
use wide_core::reference::{exact_mode_trajectory, leapfrog, linear_mode_oracle, Trajectory};
use wide_core::wide::{
    el_residual, reporting_window, ConstraintSet, SpaceTimeField, TimeGrid, WeightedFunctional,
};

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

struct Instance {
    functional: WeightedFunctional,
    constraints: ConstraintSet,
    grid: Arc<SpatialGrid>,
    time: TimeGrid,
    kappa: bool,
    preset_name: String,
    mode: i64,
}

fn build_instance(
    preset_name: &str,
    eps: f64,
    nodes: usize,
    horizon: f64,
    steps: usize,
    mode: i64,
    amplitude: f64,
) -> Result<Instance, JsValue> {
    let p = preset(preset_name).map_err(err)?;
    let grid = Arc::new(SpatialGrid::periodic(TAU, nodes).map_err(err)?);
    let time = TimeGrid::new(horizon, steps).map_err(err)?;
    let kappa = p.kappa;
    let functional =
        WeightedFunctional::new(eps, p.energy, p.dissipation, time.clone()).map_err(err)?;
    let xi = grid.wavenumber(mode);
    let w0 = SpatialField::from_fn(grid.clone(), move |x| amplitude * (xi * x).sin());
    let w1 = SpatialField::zeros(grid.clone());
    let constraints = ConstraintSet::new(w0, w1).map_err(err)?;
    Ok(Instance {
        functional,
        constraints,
        grid,
        time,
        kappa,
        preset_name: preset_name.to_string(),
        mode,
    })
}

fn oracle_for(instance: &Instance, leapfrog_dt: f64) -> Result<Trajectory, JsValue> {
    if let Some(lp) = linear_mode_oracle(&instance.preset_name) {
        Ok(exact_mode_trajectory(
            lp,
            instance.constraints.w0(),
            instance.mode,
            &instance.time,
        ))
    } else {
        let p = preset(&instance.preset_name).map_err(err)?;
        leapfrog(
            &p.energy,
            &p.dissipation,
            instance.constraints.w0(),
            instance.constraints.w1(),
            leapfrog_dt,
            instance.time.horizon(),
            instance.kappa,
        )
        .map_err(err)
    }
}

/// Result of one interactive solve, consumed by the page scripts through
/// flat typed arrays.
#[wasm_bindgen]
pub struct DemoSolution {
    nodes: usize,
    layers: usize,
    dt: f64,
    eps: f64,
    coords: Vec<f64>,
    field: Vec<f64>,
    oracle: Vec<f64>,
    times: Vec<f64>,
    energy_total: Vec<f64>,
    energy_kinetic: Vec<f64>,
    cumulative_dissipation: Vec<f64>,
    rescaled_times: Vec<f64>,
    approx_energy: Vec<f64>,
    iterations: usize,
    value: f64,
    rescaled_value: f64,
    relative_distance: f64,
    window: f64,
}

#[wasm_bindgen]
impl DemoSolution {
    #[wasm_bindgen(getter)]
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    #[wasm_bindgen(getter)]
    pub fn layers(&self) -> usize {
        self.layers
    }

    #[wasm_bindgen(getter)]
    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[wasm_bindgen(getter)]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Node coordinates, length `nodes`.
    pub fn coords(&self) -> Vec<f64> {
        self.coords.clone()
    }

    /// Minimizer values, layer-major, length `layers * nodes`.
    pub fn field(&self) -> Vec<f64> {
        self.field.clone()
    }

    /// Oracle trajectory sampled on the same grid, same layout.
    pub fn oracle(&self) -> Vec<f64> {
        self.oracle.clone()
    }

    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    pub fn energy_total(&self) -> Vec<f64> {
        self.energy_total.clone()
    }

    pub fn energy_kinetic(&self) -> Vec<f64> {
        self.energy_kinetic.clone()
    }

    pub fn cumulative_dissipation(&self) -> Vec<f64> {
        self.cumulative_dissipation.clone()
    }

    /// Rescaled sample times `s = t/eps` of the approximate energy.
    pub fn rescaled_times(&self) -> Vec<f64> {
        self.rescaled_times.clone()
    }

    /// The decreasing approximate energy `F(s)`.
    pub fn approx_energy(&self) -> Vec<f64> {
        self.approx_energy.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    #[wasm_bindgen(getter)]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[wasm_bindgen(getter)]
    pub fn rescaled_value(&self) -> f64 {
        self.rescaled_value
    }

    /// Space-time distance to the oracle relative to the oracle norm.
    #[wasm_bindgen(getter)]
    pub fn relative_distance(&self) -> f64 {
        self.relative_distance
    }

    /// Right end of the truncation-free reporting window.
    #[wasm_bindgen(getter)]
    pub fn window(&self) -> f64 {
        self.window
    }
}

/// Minimize the weighted functional for `preset_name` at `eps` on the
/// `2*pi`-periodic grid with single-mode initial data, and package the
/// pieces the page plots.
#[wasm_bindgen]
pub fn solve_demo(
    preset_name: &str,
    eps: f64,
    nodes: usize,
    horizon: f64,
    steps: usize,
    mode: i64,
    amplitude: f64,
) -> Result<DemoSolution, JsValue> {
    let instance = build_instance(preset_name, eps, nodes, horizon, steps, mode, amplitude)?;
    let opts = SolveOptions::default();
    let (w, stats) =
        minimize(&instance.functional, &instance.constraints, None, &opts).map_err(err)?;
    if !stats.converged {
        return Err(JsValue::from_str("solver did not converge"));
    }

    let oracle = oracle_for(&instance, instance.time.dt().min(1e-3))?;
    let window = reporting_window(horizon, eps);
    let traj = Trajectory::from_spacetime(&w, instance.constraints.w1()).map_err(err)?;
    let distance = compare(&traj, &oracle, window.max(instance.time.dt())).map_err(err)?;

    let etrace = energy_trace(
        &traj,
        instance.functional.energy(),
        instance.functional.dissipation(),
    )
    .map_err(err)?;
    let atrace = approx_energy_trace(&w, &instance.constraints, &instance.functional, &stats)
        .map_err(err)?;

    let mut oracle_flat = Vec::with_capacity(w.values().len());
    for j in 0..instance.time.layers() {
        let t = instance.time.time(j);
        let pos = t / oracle.time.dt();
        let jo = (pos.floor() as usize).min(oracle.layers.len() - 2);
        let frac = (pos - jo as f64).clamp(0.0, 1.0);
        let a = &oracle.layers[jo];
        let b = &oracle.layers[jo + 1];
        for i in 0..instance.grid.nodes() {
            oracle_flat.push(a.values()[i] * (1.0 - frac) + b.values()[i] * frac);
        }
    }

    Ok(DemoSolution {
        nodes: instance.grid.nodes(),
        layers: instance.time.layers(),
        dt: instance.time.dt(),
        eps,
        coords: instance.grid.coords(),
        field: w.values().to_vec(),
        oracle: oracle_flat,
        times: (0..instance.time.layers())
            .map(|j| instance.time.time(j))
            .collect(),
        energy_total: etrace.total.clone(),
        energy_kinetic: etrace.kinetic.clone(),
        cumulative_dissipation: etrace.cumulative_dissipation.clone(),
        rescaled_times: atrace.rescaled_times.clone(),
        approx_energy: atrace.total.clone(),
        iterations: stats.iterations,
        value: stats.value,
        rescaled_value: stats.rescaled_value,
        relative_distance: distance.relative,
        window,
    })
}

/// Distance-to-oracle curve of an eps-continuation with its fitted
/// log-log slope.
#[wasm_bindgen]
pub struct DemoSweep {
    epsilons: Vec<f64>,
    errors: Vec<f64>,
    slope: f64,
}

#[wasm_bindgen]
impl DemoSweep {
    pub fn epsilons(&self) -> Vec<f64> {
        self.epsilons.clone()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.errors.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn slope(&self) -> f64 {
        self.slope
    }
}

#[wasm_bindgen]
pub fn sweep_demo(
    preset_name: &str,
    eps_coarsest: f64,
    entries: usize,
    nodes: usize,
    horizon: f64,
    steps: usize,
    mode: i64,
    amplitude: f64,
) -> Result<DemoSweep, JsValue> {
    if entries < 2 || entries > 8 {
        return Err(JsValue::from_str("sweep needs 2 to 8 entries"));
    }
    let schedule: Vec<f64> = (0..entries)
        .map(|k| eps_coarsest / (1 << k) as f64)
        .collect();
    let eps_min = *schedule.last().unwrap();
    let first = build_instance(
        preset_name,
        schedule[0],
        nodes,
        horizon,
        steps,
        mode,
        amplitude,
    )?;
    let oracle = oracle_for(&first, first.time.dt().min(1e-3))?;
    let window = reporting_window(horizon, eps_min).max(first.time.dt());

    let opts = SolveOptions::default();
    let mut errors = Vec::with_capacity(entries);
    let mut previous: Option<SpaceTimeField> = None;
    for &eps in &schedule {
        let instance = build_instance(preset_name, eps, nodes, horizon, steps, mode, amplitude)?;
        let (w, stats) = minimize(
            &instance.functional,
            &instance.constraints,
            previous.as_ref(),
            &opts,
        )
        .map_err(err)?;
        if !stats.converged {
            return Err(JsValue::from_str(&format!(
                "eps = {eps}: solver did not converge"
            )));
        }
        let traj = Trajectory::from_spacetime(&w, instance.constraints.w1()).map_err(err)?;
        let d = compare(&traj, &oracle, window).map_err(err)?;
        errors.push(d.spacetime_l2);
        previous = Some(w);
    }
    let points: Vec<(f64, f64)> = schedule
        .iter()
        .cloned()
        .zip(errors.iter().cloned())
        .collect();
    let slope = convergence_slope(&points).unwrap_or(f64::NAN);
    Ok(DemoSweep {
        epsilons: schedule,
        errors,
        slope,
    })
}

/// Per-layer norms of the fourth-order Euler-Lagrange operator at the
/// minimizer: `[t_0, full_0, wave_0, t_1, full_1, wave_1, ...]`.
#[wasm_bindgen]
pub fn residual_demo(
    preset_name: &str,
    eps: f64,
    nodes: usize,
    horizon: f64,
    steps: usize,
    mode: i64,
    amplitude: f64,
) -> Result<Vec<f64>, JsValue> {
    let instance = build_instance(preset_name, eps, nodes, horizon, steps, mode, amplitude)?;
    let opts = SolveOptions::default();
    let (w, stats) =
        minimize(&instance.functional, &instance.constraints, None, &opts).map_err(err)?;
    if !stats.converged {
        return Err(JsValue::from_str("solver did not converge"));
    }
    let report = el_residual(&instance.functional, &w).map_err(err)?;
    let mut flat = Vec::with_capacity(report.times.len() * 3);
    for i in 0..report.times.len() {
        flat.push(report.times[i]);
        flat.push(report.full[i]);
        flat.push(report.wave_part[i]);
    }
    Ok(flat)
}

/// Preset names offered by the page.
#[wasm_bindgen]
pub fn demo_presets() -> Vec<JsValue> {
    [
        "wave",
        "klein-gordon",
        "biharmonic",
        "nlw(4)",
        "sine-gordon",
        "kirchhoff",
        "fractional-wave(0.5,0,2)",
        "telegraph-on-top-of(wave)",
        "telegraph-on-top-of(nlw(4))",
        "strong-damping-on-top-of(wave)",
    ]
    .iter()
    .map(|s| JsValue::from_str(s))
    .collect()
}
