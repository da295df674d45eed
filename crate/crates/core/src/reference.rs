//! Independent solution oracles: a leapfrog time stepper for the
//! second-order equations and closed-form single-mode amplitudes for the
//! linear presets.
//!
//! The stepper shares the spatial operators of the grid and energy modules,
//! so comparisons against the space-time minimizers isolate the time
//! dimension.

use std::sync::Arc;

use crate::energy::{eval_energy, grad_dissipation, grad_energy, DissipationSpec, EnergySpec};
use crate::error::{Result, WideError};
use crate::grid::{l2_inner, SpatialField, SpatialGrid};
use crate::wide::{SpaceTimeField, TimeGrid};

/// Discrete solution layers with velocities, shared by the stepper and the
/// diagnostics on minimizers.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub time: TimeGrid,
    pub layers: Vec<SpatialField>,
    pub velocities: Vec<SpatialField>,
}

impl Trajectory {
    pub fn grid(&self) -> &Arc<SpatialGrid> {
        self.layers[0].grid()
    }

    /// Reinterpret a space-time minimizer as a trajectory. Velocities are
    /// reconstructed by centered differences; layer 0 carries the prescribed
    /// velocity and layer 1 the one-sided difference consistent with the
    /// first-order constraint encoding.
    pub fn from_spacetime(w: &SpaceTimeField, w1: &SpatialField) -> Result<Self> {
        let time = w.time().clone();
        let grid = w.grid().clone();
        if w1.grid().as_ref() != grid.as_ref() {
            return Err(WideError::GridMismatch(
                "velocity data does not live on the field grid".into(),
            ));
        }
        let dt = time.dt();
        let j_max = time.steps();
        let n = grid.nodes();
        let mut layers = Vec::with_capacity(time.layers());
        for j in 0..time.layers() {
            layers.push(w.layer_field(j));
        }
        let mut velocities = Vec::with_capacity(time.layers());
        velocities.push(w1.clone());
        for j in 1..time.layers() {
            let vals: Vec<f64> = if j == 1 {
                (0..n)
                    .map(|i| (w.layer(1)[i] - w.layer(0)[i]) / dt)
                    .collect()
            } else if j < j_max {
                (0..n)
                    .map(|i| (w.layer(j + 1)[i] - w.layer(j - 1)[i]) / (2.0 * dt))
                    .collect()
            } else {
                (0..n)
                    .map(|i| (w.layer(j_max)[i] - w.layer(j_max - 1)[i]) / dt)
                    .collect()
            };
            velocities.push(SpatialField::new(grid.clone(), vals)?);
        }
        Ok(Self {
            time,
            layers,
            velocities,
        })
    }
}

/// Conjugate-gradient solve of `(I + c B) x = rhs` where `B` is the
/// symmetric positive semidefinite dissipation operator. Used for the
/// implicit velocity coupling of the damped stepper.
fn solve_damped_system(
    spec: &DissipationSpec,
    c: f64,
    rhs: &SpatialField,
    tol: f64,
) -> Result<SpatialField> {
    let apply = |v: &SpatialField| -> Result<SpatialField> {
        let bv = grad_dissipation(spec, v)?;
        v.axpy(c, &bv)
    };
    let mut x = rhs.clone();
    let mut r = rhs.axpy(-1.0, &apply(&x)?)?;
    let mut d = r.clone();
    let mut rho = l2_inner(&r, &r)?;
    let target = tol * tol * l2_inner(rhs, rhs)?.max(1e-300);
    for _ in 0..10_000 {
        if rho <= target {
            break;
        }
        let q = apply(&d)?;
        let alpha = rho / l2_inner(&d, &q)?;
        x = x.axpy(alpha, &d)?;
        r = r.axpy(-alpha, &q)?;
        let rho_next = l2_inner(&r, &r)?;
        d = r.axpy(rho_next / rho, &d)?;
        rho = rho_next;
    }
    Ok(x)
}

/// Two-step central (leapfrog) integration of
/// `w'' = -grad G(w) - kappa grad D(w')` with the centered implicit
/// velocity in the damping term. Aborts when the undamped energy grows
/// tenfold, the stability guard for state-dependent stiffness.
#[allow(clippy::too_many_arguments)]
pub fn leapfrog(
    energy: &EnergySpec,
    dissipation: &DissipationSpec,
    w0: &SpatialField,
    w1: &SpatialField,
    dt: f64,
    horizon: f64,
    kappa: bool,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(horizon > dt) {
        return Err(WideError::InvalidParameter(
            "stepper needs 0 < dt < horizon".into(),
        ));
    }
    if w0.grid().as_ref() != w1.grid().as_ref() {
        return Err(WideError::GridMismatch(
            "initial data on mismatched grids".into(),
        ));
    }
    let steps = (horizon / dt).round() as usize;
    if steps < 4 {
        return Err(WideError::InvalidParameter(
            "stepper needs at least 4 steps".into(),
        ));
    }
    let time = TimeGrid::new(horizon, steps)?;
    let dt = time.dt();
    let grid = w0.grid().clone();

    let accel0 = {
        let mut a = grad_energy(energy, w0)?.scaled(-1.0);
        if kappa {
            a = a.axpy(-1.0, &grad_dissipation(dissipation, w1)?)?;
        }
        a
    };
    let mut prev = w0.clone();
    // second-order start: w^1 = w0 + dt w1 + dt^2/2 a0
    let mut here = w0.axpy(dt, w1)?.axpy(0.5 * dt * dt, &accel0)?;

    let initial_energy = 0.5 * l2_inner(w1, w1)? + eval_energy(energy, w0)?;
    let guard = 10.0 * initial_energy + 1e-9;

    let mut layers = vec![prev.clone(), here.clone()];
    for step in 1..steps {
        let force = grad_energy(energy, &here)?.scaled(-1.0);
        // w^{n+1} = 2 w^n - w^{n-1} + dt^2 (force - kappa B v_centered)
        // with v_centered = (w^{n+1} - w^{n-1})/(2 dt); since B is linear the
        // update reduces to one symmetric positive definite solve.
        let next = if kappa {
            let b_prev = grad_dissipation(dissipation, &prev)?;
            let rhs = here
                .scaled(2.0)
                .axpy(-1.0, &prev)?
                .axpy(dt * dt, &force)?
                .axpy(dt / 2.0, &b_prev)?;
            solve_damped_system(dissipation, dt / 2.0, &rhs, 1e-14)?
        } else {
            here.scaled(2.0).axpy(-1.0, &prev)?.axpy(dt * dt, &force)?
        };
        if next.values().iter().any(|v| !v.is_finite()) {
            return Err(WideError::Instability(format!(
                "non-finite field at step {step}"
            )));
        }
        if !kappa {
            let v = next.axpy(-1.0, &prev)?.scaled(1.0 / (2.0 * dt));
            let e = 0.5 * l2_inner(&v, &v)? + eval_energy(energy, &here)?;
            if e > guard {
                return Err(WideError::Instability(format!(
                    "energy grew from {initial_energy:.3e} to {e:.3e} at step {step}; \
                     reduce dt"
                )));
            }
        }
        layers.push(next.clone());
        prev = here;
        here = next;
    }

    // centered velocities, one-sided at the ends
    let n = grid.nodes();
    let mut velocities = Vec::with_capacity(layers.len());
    velocities.push(w1.clone());
    for j in 1..layers.len() {
        let vals: Vec<f64> = if j + 1 < layers.len() {
            (0..n)
                .map(|i| (layers[j + 1].values()[i] - layers[j - 1].values()[i]) / (2.0 * dt))
                .collect()
        } else {
            (0..n)
                .map(|i| (layers[j].values()[i] - layers[j - 1].values()[i]) / dt)
                .collect()
        };
        velocities.push(SpatialField::new(grid.clone(), vals)?);
    }
    Ok(Trajectory {
        time,
        layers,
        velocities,
    })
}

/// Linear presets with closed-form single-mode dynamics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearPreset {
    Wave,
    KleinGordon,
    Biharmonic,
    /// Fractional Laplacian of order `s`, potential switched off.
    FractionalWave(f64),
    Telegraph,
    StrongDamping,
}

impl LinearPreset {
    /// Angular frequency squared and damping rate of the mode with physical
    /// wavenumber `xi`.
    pub fn mode_coefficients(&self, xi: f64) -> (f64, f64) {
        match self {
            LinearPreset::Wave => (xi * xi, 0.0),
            LinearPreset::KleinGordon => (xi * xi + 1.0, 0.0),
            LinearPreset::Biharmonic => (xi.powi(4), 0.0),
            LinearPreset::FractionalWave(s) => (xi.abs().powf(2.0 * s), 0.0),
            LinearPreset::Telegraph => (xi * xi, 1.0),
            LinearPreset::StrongDamping => (xi * xi, xi * xi),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "wave" => Some(LinearPreset::Wave),
            "klein-gordon" => Some(LinearPreset::KleinGordon),
            "biharmonic" => Some(LinearPreset::Biharmonic),
            "telegraph" => Some(LinearPreset::Telegraph),
            "strong-damping" => Some(LinearPreset::StrongDamping),
            _ => None,
        }
    }
}

/// Amplitude of the damped oscillator `a'' = -omega2 a - c a'` with
/// `a(0) = 1`, `a'(0) = 0`, at time `t`. All three root branches of
/// `r^2 + c r + omega2 = 0` are handled, including the degenerate double
/// root.
pub fn mode_amplitude(omega2: f64, c: f64, t: f64) -> f64 {
    let disc = c * c / 4.0 - omega2;
    let half = c / 2.0;
    if disc.abs() <= 1e-12 * (c * c / 4.0 + omega2.abs()).max(1e-30) {
        // critical damping
        (-half * t).exp() * (1.0 + half * t)
    } else if disc < 0.0 {
        let beta = (-disc).sqrt();
        (-half * t).exp() * ((beta * t).cos() + half / beta * (beta * t).sin())
    } else {
        let root = disc.sqrt();
        let rp = -half + root;
        let rm = -half - root;
        (rp * (rm * t).exp() - rm * (rp * t).exp()) / (rp - rm)
    }
}

/// Map a registry preset name to its closed-form mode oracle, when one
/// exists: the undamped linear equations, the potential-free fractional
/// wave, and the mass- or gradient-damped wave.
pub fn linear_mode_oracle(name: &str) -> Option<LinearPreset> {
    let name = name.trim();
    if let Some(lp) = LinearPreset::from_name(name) {
        return match lp {
            // telegraph/strong-damping are wrapper names, not base presets
            LinearPreset::Telegraph | LinearPreset::StrongDamping => None,
            other => Some(other),
        };
    }
    if name == "telegraph-on-top-of(wave)" {
        return Some(LinearPreset::Telegraph);
    }
    if name == "strong-damping-on-top-of(wave)" {
        return Some(LinearPreset::StrongDamping);
    }
    if let Some(args) = name
        .strip_prefix("fractional-wave(")
        .and_then(|rest| rest.strip_suffix(')'))
    {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() == 3 {
            if let (Ok(s), Ok(lambda)) = (parts[0].parse::<f64>(), parts[1].parse::<f64>()) {
                if lambda == 0.0 && s > 0.0 && s <= 1.0 {
                    return Some(LinearPreset::FractionalWave(s));
                }
            }
        }
    }
    None
}

/// Closed-form amplitude `a(t)` of integer mode `k` on the `2*pi`-periodic
/// domain, i.e. physical wavenumber `xi = k`. Errors on nonlinear presets.
pub fn exact_mode(preset: &str, k: i64, t: f64) -> Result<f64> {
    let lp = match preset {
        "fractional-wave" => LinearPreset::FractionalWave(0.5),
        other => LinearPreset::from_name(other).ok_or_else(|| {
            WideError::Unsupported(format!("no closed-form mode solution for preset `{other}`"))
        })?,
    };
    let (omega2, c) = lp.mode_coefficients(k as f64);
    Ok(mode_amplitude(omega2, c, t))
}

/// Exact single-mode trajectory `w0_amplitude * sin/cos profile * a(t)`
/// sampled on a grid, for linear presets with zero initial velocity.
pub fn exact_mode_trajectory(
    lp: LinearPreset,
    w0: &SpatialField,
    k: i64,
    time: &TimeGrid,
) -> Trajectory {
    let grid = w0.grid().clone();
    let xi = grid.wavenumber(k);
    let (omega2, c) = lp.mode_coefficients(xi);
    let mut layers = Vec::with_capacity(time.layers());
    let mut velocities = Vec::with_capacity(time.layers());
    let dt = time.dt();
    for j in 0..time.layers() {
        let t = time.time(j);
        let a = mode_amplitude(omega2, c, t);
        layers.push(w0.scaled(a));
        // centered rate of the closed form, exact enough for diagnostics
        let da =
            (mode_amplitude(omega2, c, t + dt) - mode_amplitude(omega2, c, t - dt)) / (2.0 * dt);
        velocities.push(w0.scaled(da));
    }
    Trajectory {
        time: time.clone(),
        layers,
        velocities,
    }
}
