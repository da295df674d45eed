//! Numerical checks of the energy identities and a priori estimates on
//! trajectories and minimizers: the exponential averaging operator, the
//! approximate-energy trace and its monotonicity, the energy inequality,
//! sliding-window bounds with fitted constants, and distances to oracle
//! trajectories.

use crate::energy::{eval_dissipation, eval_energy, DissipationSpec, EnergySpec, EnergyTerm};
use crate::error::{Result, WideError};
use crate::grid::{l2_inner, l2_norm, neg_sobolev_norm, SpatialField};
use crate::optimize::SolveStats;
use crate::reference::Trajectory;
use crate::wide::{ConstraintSet, SpaceTimeField, WeightedFunctional};

/// Forward exponential average `Af(s_j) ~ integral_s^inf e^{-(t-s)} f dt` on
/// a uniform grid, trapezoid-in-`s` with the half weight at the left
/// endpoint (the right end is a truncation cut, not a boundary). The tail
/// beyond the last sample is dropped; see [`avg_tail_bound`].
pub fn avg_op(f: &[f64], ds: f64) -> Result<Vec<f64>> {
    check_avg_input(f, ds)?;
    let n = f.len();
    let q = (-ds).exp();
    let mut out = vec![0.0; n];
    // backward recurrence of the full-weight sum, then correct the endpoint
    let mut running = 0.0;
    for j in (0..n).rev() {
        running = f[j] + q * running;
        out[j] = ds * (running - 0.5 * f[j]);
    }
    Ok(out)
}

/// Iterated average computed two ways: by applying [`avg_op`] twice and by
/// the closed-form kernel `(t-s) e^{-(t-s)}` (discretized with the
/// `ds^2/4` self-weight that is the exact self-convolution of the
/// one-sided trapezoid rule). The two routes coincide algebraically, so any
/// gap is pure floating-point noise.
#[derive(Clone, Debug)]
pub struct IteratedAverage {
    pub iterated: Vec<f64>,
    pub kernel: Vec<f64>,
}

impl IteratedAverage {
    pub fn max_relative_gap(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.iterated.iter().zip(&self.kernel) {
            let scale = a.abs().max(b.abs()).max(1e-12);
            worst = worst.max((a - b).abs() / scale);
        }
        worst
    }

    pub fn values(&self) -> &[f64] {
        &self.kernel
    }
}

pub fn avg_op2(f: &[f64], ds: f64) -> Result<IteratedAverage> {
    check_avg_input(f, ds)?;
    let iterated = avg_op(&avg_op(f, ds)?, ds)?;
    let n = f.len();
    let q = (-ds).exp();
    let mut kernel = vec![0.0; n];
    // kernel route, backward recurrences for sum of k q^k f and sum q^k f
    let mut weighted = 0.0; // sum_{l>=j} (l-j) q^{l-j} f_l
    let mut plain = 0.0; // sum_{l>=j} q^{l-j} f_l
    for j in (0..n).rev() {
        weighted = q * (weighted + plain);
        kernel[j] = ds * ds * (weighted + 0.25 * f[j]);
        plain = f[j] + q * plain;
    }
    Ok(IteratedAverage { iterated, kernel })
}

/// Bound on the dropped tail of `Af` at sample `j`:
/// `e^{-(S - s_j)} * max f`.
pub fn avg_tail_bound(f: &[f64], ds: f64, j: usize) -> f64 {
    let n = f.len();
    let span = (n - 1 - j) as f64 * ds;
    let max = f.iter().fold(0.0f64, |m, v| m.max(*v));
    (-span).exp() * max
}

/// Tail bound for the iterated average, kernel `(1 + span) e^{-span}`.
pub fn avg2_tail_bound(f: &[f64], ds: f64, j: usize) -> f64 {
    let n = f.len();
    let span = (n - 1 - j) as f64 * ds;
    let max = f.iter().fold(0.0f64, |m, v| m.max(*v));
    (1.0 + span) * (-span).exp() * max
}

fn check_avg_input(f: &[f64], ds: f64) -> Result<()> {
    if !(ds > 0.0) {
        return Err(WideError::InvalidParameter(
            "average operator needs a positive step".into(),
        ));
    }
    if f.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(WideError::InvalidParameter(
            "average operator expects nonnegative finite samples".into(),
        ));
    }
    Ok(())
}

/// Physical energy trace `E(t) = kinetic + potential` with the cumulative
/// dissipation `2 int_0^t D(w')` as a separate nondecreasing column.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub potential: Vec<f64>,
    pub cumulative_dissipation: Vec<f64>,
    pub total: Vec<f64>,
}

pub fn energy_trace(
    traj: &Trajectory,
    energy: &EnergySpec,
    dissipation: &DissipationSpec,
) -> Result<EnergyTrace> {
    let layers = traj.layers.len();
    let dt = traj.time.dt();
    let mut trace = EnergyTrace {
        times: Vec::with_capacity(layers),
        kinetic: Vec::with_capacity(layers),
        potential: Vec::with_capacity(layers),
        cumulative_dissipation: Vec::with_capacity(layers),
        total: Vec::with_capacity(layers),
    };
    let mut cumulative = 0.0;
    let mut prev_d = eval_dissipation(dissipation, &traj.velocities[0])?;
    for j in 0..layers {
        let kin = 0.5 * l2_inner(&traj.velocities[j], &traj.velocities[j])?;
        let pot = eval_energy(energy, &traj.layers[j])?;
        if j > 0 {
            let d = eval_dissipation(dissipation, &traj.velocities[j])?;
            cumulative += dt * (prev_d + d); // trapezoid of 2 D
            prev_d = d;
        }
        trace.times.push(traj.time.time(j));
        trace.kinetic.push(kin);
        trace.potential.push(pot);
        trace.cumulative_dissipation.push(cumulative);
        trace.total.push(kin + pot);
    }
    Ok(trace)
}

/// Outcome of a pass/fail diagnostic with its margin.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CheckVerdict {
    pub pass: bool,
    /// Worst relative excess over the admissible level (negative = slack).
    pub margin: f64,
    pub description: String,
}

/// Energy inequality `E(t) + 2 kappa int D <= E(0) (1 + tolerance)` over
/// `t <= window`.
pub fn check_energy_inequality(
    trace: &EnergyTrace,
    kappa: bool,
    tolerance: f64,
    window: f64,
) -> Result<CheckVerdict> {
    if !(window >= 0.0) {
        return Err(WideError::Window("empty reporting window".into()));
    }
    let e0 = trace.total[0].max(1e-300);
    let mut worst = f64::NEG_INFINITY;
    let mut seen = false;
    for j in 0..trace.times.len() {
        if trace.times[j] > window + 1e-12 {
            break;
        }
        seen = true;
        let lhs = trace.total[j]
            + if kappa {
                trace.cumulative_dissipation[j]
            } else {
                0.0
            };
        worst = worst.max(lhs / e0 - 1.0);
    }
    if !seen {
        return Err(WideError::Window("empty reporting window".into()));
    }
    Ok(CheckVerdict {
        pass: worst <= tolerance,
        margin: worst,
        description: format!(
            "energy inequality over [0, {window:.4}]: worst relative excess {worst:.3e} \
             (tolerance {tolerance:.1e})"
        ),
    })
}

/// Approximate-energy trace on the rescaled grid `s = t/eps`:
/// kinetic part evaluated pointwise, potential part doubly averaged, and
/// the auxiliary inertia/dissipation/Lagrangian columns.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ApproxEnergyTrace {
    pub rescaled_times: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub averaged_potential: Vec<f64>,
    /// `F(s) = kinetic + averaged potential`.
    pub total: Vec<f64>,
    pub inertia: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub lagrangian: Vec<f64>,
    /// Cumulative `int_0^s H` (trapezoid), rescaled time.
    pub cumulative_dissipation: Vec<f64>,
    /// Agreement of the two iterated-average routes (floating point only).
    pub two_route_gap: f64,
    /// Dropped-tail bound of the averaged potential per sample.
    pub tail_bound: Vec<f64>,
}

/// Build the approximate-energy trace of a converged minimizer.
pub fn approx_energy_trace(
    w: &SpaceTimeField,
    constraints: &ConstraintSet,
    f: &WeightedFunctional,
    stats: &SolveStats,
) -> Result<ApproxEnergyTrace> {
    if !stats.converged {
        return Err(WideError::NotConverged(
            "approximate-energy trace requires a converged minimizer".into(),
        ));
    }
    let eps = f.eps();
    let traj = Trajectory::from_spacetime(w, constraints.w1())?;
    let layers = traj.layers.len();
    let dt = w.time().dt();
    let ds = dt / eps;

    let mut kinetic = Vec::with_capacity(layers);
    let mut potential = Vec::with_capacity(layers);
    let mut dissipation_col = Vec::with_capacity(layers);
    for j in 0..layers {
        // K(s) = (1/2 eps^2) |u'(s)|^2 = (1/2) |w'(t)|^2
        kinetic.push(0.5 * l2_inner(&traj.velocities[j], &traj.velocities[j])?);
        potential.push(eval_energy(f.energy(), &traj.layers[j])?);
        // H(s) = D(u'(s)) = eps^2 D(w'(t))
        dissipation_col.push(eps * eps * eval_dissipation(f.dissipation(), &traj.velocities[j])?);
    }
    // inertia D(s) = (eps^2/2)|w''(t)|^2, interior stencil, ends copied
    let mut inertia = vec![0.0; layers];
    let n = w.nodes();
    for j in 1..layers - 1 {
        let mut acc = 0.0;
        for i in 0..n {
            let d2 = (w.layer(j + 1)[i] - 2.0 * w.layer(j)[i] + w.layer(j - 1)[i]) / (dt * dt);
            acc += d2 * d2;
        }
        inertia[j] = 0.5 * eps * eps * w.grid().spacing() * acc;
    }
    if layers > 2 {
        inertia[0] = inertia[1];
        inertia[layers - 1] = inertia[layers - 2];
    }

    let averaged = avg_op2(&potential, ds)?;
    let two_route_gap = averaged.max_relative_gap();
    let averaged_potential = averaged.kernel;

    let mut cumulative = Vec::with_capacity(layers);
    let mut acc = 0.0;
    for j in 0..layers {
        if j > 0 {
            acc += 0.5 * ds * (dissipation_col[j - 1] + dissipation_col[j]);
        }
        cumulative.push(acc);
    }

    let mut total = Vec::with_capacity(layers);
    let mut lagrangian = Vec::with_capacity(layers);
    let mut tail = Vec::with_capacity(layers);
    let kappa_over_eps = if f.kappa() { 1.0 / eps } else { 0.0 };
    for j in 0..layers {
        total.push(kinetic[j] + averaged_potential[j]);
        lagrangian.push(inertia[j] + potential[j] + kappa_over_eps * dissipation_col[j]);
        tail.push(avg2_tail_bound(&potential, ds, j));
    }
    Ok(ApproxEnergyTrace {
        rescaled_times: (0..layers).map(|j| j as f64 * ds).collect(),
        kinetic,
        averaged_potential,
        total,
        inertia,
        dissipation: dissipation_col,
        lagrangian,
        cumulative_dissipation: cumulative,
        two_route_gap,
        tail_bound: tail,
    })
}

/// Monotonicity of the approximate energy:
/// `F(s_{j+1}) <= F(s_j) + tolerance (1 + F(0))` for all samples in the
/// rescaled window.
pub fn check_f_monotone(
    trace: &ApproxEnergyTrace,
    tolerance: f64,
    window_s: f64,
) -> Result<CheckVerdict> {
    if !(window_s >= 0.0) {
        return Err(WideError::Window("empty reporting window".into()));
    }
    let scale = 1.0 + trace.total[0].abs();
    let mut worst = f64::NEG_INFINITY;
    for j in 0..trace.total.len() - 1 {
        if trace.rescaled_times[j + 1] > window_s + 1e-12 {
            break;
        }
        worst = worst.max((trace.total[j + 1] - trace.total[j]) / scale);
    }
    if worst == f64::NEG_INFINITY {
        return Err(WideError::Window("empty reporting window".into()));
    }
    Ok(CheckVerdict {
        pass: worst <= tolerance,
        margin: worst,
        description: format!(
            "approximate energy monotone on rescaled [0, {window_s:.3}]: worst step \
             increase {worst:.3e} relative to 1 + F(0) (tolerance {tolerance:.1e})"
        ),
    })
}

/// Fitted constant of the level bound
/// `F(s) + (2 kappa/eps) int_0^s H <= |w1|^2/2 + G(w0) + C sqrt(eps)`.
pub fn approx_energy_bound_constant(
    trace: &ApproxEnergyTrace,
    f: &WeightedFunctional,
    constraints: &ConstraintSet,
    window_s: f64,
) -> Result<f64> {
    let w1 = constraints.w1();
    let rhs0 = 0.5 * l2_inner(w1, w1)? + eval_energy(f.energy(), constraints.w0())?;
    let eps = f.eps();
    let kappa_factor = if f.kappa() { 2.0 / eps } else { 0.0 };
    let mut c_fit = f64::NEG_INFINITY;
    for j in 0..trace.total.len() {
        if trace.rescaled_times[j] > window_s + 1e-12 {
            break;
        }
        let lhs = trace.total[j] + kappa_factor * trace.cumulative_dissipation[j];
        c_fit = c_fit.max((lhs - rhs0) / eps.sqrt());
    }
    if c_fit == f64::NEG_INFINITY {
        return Err(WideError::Window("empty reporting window".into()));
    }
    Ok(c_fit)
}

/// Fitted constants of the a priori estimates over a reporting window.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AprioriReport {
    /// Largest window average `(1/T') int_tau^{tau+T'} G dt` over windows of
    /// length at least `eps`.
    pub potential_window_constant: f64,
    /// Largest `|w'(t)|^2`.
    pub kinetic_constant: f64,
    /// Largest `|w(t)|^2 / (1 + t^2)`.
    pub displacement_constant: f64,
    /// Largest dual norm `|w''(t)|` in the spectral surrogate of `W'`, when
    /// the leading energy term is quadratic on a periodic grid.
    pub dual_constant: Option<f64>,
    /// `int D(w') dt` over the window, damped problems only.
    pub dissipation_integral: Option<f64>,
    /// Discrete sliding-window consequence of the kernel bound
    /// `A^2 W <= F` (always true up to quadrature slack).
    pub sliding_window_ok: bool,
    pub window: f64,
}

/// Sobolev order of the leading energy term when every term of that order
/// is quadratic (the condition for the dual-norm surrogate).
fn leading_quadratic_order(spec: &EnergySpec) -> Option<f64> {
    let order_of = |t: &EnergyTerm| -> f64 {
        match t {
            EnergyTerm::DerivPower { order, .. } => *order as f64,
            EnergyTerm::SobolevQuadratic { order, .. } => *order,
            EnergyTerm::CosinePotential { .. } => 0.0,
            EnergyTerm::KirchhoffQuartic { .. } => 1.0,
        }
    };
    let max_order = spec
        .terms()
        .iter()
        .map(order_of)
        .fold(f64::NEG_INFINITY, f64::max);
    let leading_all_quadratic = spec
        .terms()
        .iter()
        .filter(|t| order_of(t) == max_order)
        .all(|t| t.is_quadratic());
    if leading_all_quadratic && max_order > 0.0 {
        Some(max_order)
    } else {
        None
    }
}

pub fn apriori_checks(
    w: &SpaceTimeField,
    constraints: &ConstraintSet,
    f: &WeightedFunctional,
    stats: &SolveStats,
    window: f64,
) -> Result<AprioriReport> {
    if !stats.converged {
        return Err(WideError::NotConverged(
            "a priori checks require a converged minimizer".into(),
        ));
    }
    let eps = f.eps();
    if window < eps {
        return Err(WideError::Window(format!(
            "window {window} shorter than eps {eps}"
        )));
    }
    let traj = Trajectory::from_spacetime(w, constraints.w1())?;
    let dt = w.time().dt();
    let layers = traj.layers.len();
    let in_window = |j: usize| -> bool { traj.time.time(j) <= window + 1e-12 };

    // potential over sliding windows via a cumulative trapezoid
    let potential: Vec<f64> = traj
        .layers
        .iter()
        .map(|l| eval_energy(f.energy(), l))
        .collect::<Result<_>>()?;
    let mut cum_g = vec![0.0; layers];
    for j in 1..layers {
        cum_g[j] = cum_g[j - 1] + 0.5 * dt * (potential[j - 1] + potential[j]);
    }
    let mut pot_const = 0.0f64;
    let steps_per_eps = (eps / dt).round().max(1.0) as usize;
    let last = (0..layers).rev().find(|j| in_window(*j)).unwrap_or(0);
    let mut width = steps_per_eps;
    while width <= last {
        for start in (0..=last - width).step_by(steps_per_eps.max(1)) {
            let integral = cum_g[start + width] - cum_g[start];
            pot_const = pot_const.max(integral / (width as f64 * dt));
        }
        width += steps_per_eps;
    }

    let mut kin_const = 0.0f64;
    let mut disp_const = 0.0f64;
    for j in 0..layers {
        if !in_window(j) {
            break;
        }
        let t = traj.time.time(j);
        kin_const = kin_const.max(l2_inner(&traj.velocities[j], &traj.velocities[j])?);
        let sq = l2_inner(&traj.layers[j], &traj.layers[j])?;
        disp_const = disp_const.max(sq / (1.0 + t * t));
    }

    // dual norm of w'' through the spectral negative-norm surrogate
    let dual_constant = if w.grid().is_periodic() {
        leading_quadratic_order(f.energy()).map(|m| {
            let mut worst = 0.0f64;
            for j in 1..layers - 1 {
                if !in_window(j) {
                    break;
                }
                let n = w.nodes();
                let vals: Vec<f64> = (0..n)
                    .map(|i| {
                        (w.layer(j + 1)[i] - 2.0 * w.layer(j)[i] + w.layer(j - 1)[i]) / (dt * dt)
                    })
                    .collect();
                let acc = SpatialField::new(w.grid().clone(), vals).expect("layer length");
                worst = worst.max(neg_sobolev_norm(&acc, m).expect("periodic grid"));
            }
            worst
        })
    } else {
        None
    };

    let dissipation_integral = if f.kappa() {
        let mut acc = 0.0;
        let mut prev = eval_dissipation(f.dissipation(), &traj.velocities[0])?;
        for j in 1..layers {
            if !in_window(j) {
                break;
            }
            let d = eval_dissipation(f.dissipation(), &traj.velocities[j])?;
            acc += 0.5 * dt * (prev + d);
            prev = d;
        }
        Some(acc)
    } else {
        None
    };

    let sliding_window_ok = sliding_window_check(w, constraints, f, stats, window)?;

    Ok(AprioriReport {
        potential_window_constant: pot_const,
        kinetic_constant: kin_const,
        displacement_constant: disp_const,
        dual_constant,
        dissipation_integral,
        sliding_window_ok,
        window,
    })
}

/// Discrete consequence of `A^2 l <= m` (here `l = W`, `m = F`): for
/// window parameters `a > 0`, `delta in (0,1)`,
/// `Y(delta a) int_{T+delta a}^{T+a} l <= int_T^{T+a} m` with
/// `Y(z) = 1 - (1+z) e^{-z}`, up to quadrature slack.
fn sliding_window_check(
    w: &SpaceTimeField,
    constraints: &ConstraintSet,
    f: &WeightedFunctional,
    stats: &SolveStats,
    window: f64,
) -> Result<bool> {
    let trace = approx_energy_trace(w, constraints, f, stats)?;
    let ds = trace.rescaled_times[1] - trace.rescaled_times[0];
    let pot: Vec<f64> = {
        let traj = Trajectory::from_spacetime(w, constraints.w1())?;
        traj.layers
            .iter()
            .map(|l| eval_energy(f.energy(), l))
            .collect::<Result<_>>()?
    };
    let window_s = window / f.eps();
    let max_l = pot.iter().cloned().fold(0.0f64, f64::max);
    let y = |z: f64| 1.0 - (1.0 + z) * (-z).exp();
    let integral = |samples: &[f64], from: f64, to: f64| -> f64 {
        let mut acc = 0.0;
        for j in 0..samples.len() - 1 {
            let s0 = j as f64 * ds;
            let s1 = s0 + ds;
            if s1 <= from || s0 >= to {
                continue;
            }
            let lo = s0.max(from);
            let hi = s1.min(to);
            // trapezoid restricted to the overlap
            let f0 = samples[j] + (samples[j + 1] - samples[j]) * (lo - s0) / ds;
            let f1 = samples[j] + (samples[j + 1] - samples[j]) * (hi - s0) / ds;
            acc += 0.5 * (hi - lo) * (f0 + f1);
        }
        acc
    };
    let mut ok = true;
    for &a in &[1.0, 2.0] {
        for &delta in &[0.25, 0.5] {
            let mut t0 = 0.0;
            while t0 + a <= window_s {
                let lhs = y(delta * a) * integral(&pot, t0 + delta * a, t0 + a);
                let rhs = integral(&trace.total, t0, t0 + a);
                let slack = 2.0 * ds * max_l * (1.0 + a) + 1e-9 * (1.0 + rhs.abs());
                if lhs > rhs + slack {
                    ok = false;
                }
                t0 += a;
            }
        }
    }
    Ok(ok)
}

/// Per-time and space-time distances between a trajectory and an oracle,
/// evaluated at the first trajectory's layer times (the oracle is sampled
/// by linear interpolation when the time grids differ).
#[derive(Clone, Debug, serde::Serialize)]
pub struct TrajectoryDistance {
    pub times: Vec<f64>,
    pub per_time_l2: Vec<f64>,
    pub spacetime_l2: f64,
    /// Distance relative to the oracle's space-time norm.
    pub relative: f64,
}

fn sample_trajectory(traj: &Trajectory, t: f64) -> SpatialField {
    let dt = traj.time.dt();
    let j_max = traj.layers.len() - 1;
    let pos = (t / dt).clamp(0.0, j_max as f64);
    let j = (pos.floor() as usize).min(j_max - 1);
    let mut frac = pos - j as f64;
    // snap to the node when the grids align, keeping aligned comparisons
    // bit-exact
    if frac < 1e-9 {
        frac = 0.0;
    } else if frac > 1.0 - 1e-9 {
        frac = 1.0;
    }
    if frac == 0.0 {
        return traj.layers[j].clone();
    }
    traj.layers[j]
        .scaled(1.0 - frac)
        .axpy(frac, &traj.layers[j + 1])
        .expect("same grid")
}

pub fn compare(traj: &Trajectory, oracle: &Trajectory, window: f64) -> Result<TrajectoryDistance> {
    if traj.grid().as_ref() != oracle.grid().as_ref() {
        return Err(WideError::GridMismatch(
            "trajectories live on different spatial grids".into(),
        ));
    }
    if window > traj.time.horizon() + 1e-12 || window > oracle.time.horizon() + 1e-12 {
        return Err(WideError::Window(format!(
            "window {window} exceeds a trajectory horizon"
        )));
    }
    let dt = traj.time.dt();
    let mut times = Vec::new();
    let mut per_time = Vec::new();
    let mut err_sq = 0.0;
    let mut ref_sq = 0.0;
    for j in 0..traj.layers.len() {
        let t = traj.time.time(j);
        if t > window + 1e-12 {
            break;
        }
        let oracle_layer = sample_trajectory(oracle, t);
        let d = l2_norm(&traj.layers[j].axpy(-1.0, &oracle_layer)?);
        let r = l2_norm(&oracle_layer);
        times.push(t);
        per_time.push(d);
        // trapezoid weights in time
        let weight = if j == 0 || t + dt > window + 1e-12 {
            0.5 * dt
        } else {
            dt
        };
        err_sq += weight * d * d;
        ref_sq += weight * r * r;
    }
    if times.is_empty() {
        return Err(WideError::Window("empty comparison window".into()));
    }
    let spacetime_l2 = err_sq.sqrt();
    Ok(TrajectoryDistance {
        times,
        per_time_l2: per_time,
        spacetime_l2,
        relative: spacetime_l2 / ref_sq.sqrt().max(1e-300),
    })
}

/// Least-squares slope of `log error` against `log eps`.
pub fn convergence_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(e, _)| e.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, d)| d.max(1e-300).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    Some(num / den)
}
