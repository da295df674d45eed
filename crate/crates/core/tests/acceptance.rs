//! Acceptance suite: every numbered criterion below is one test that prints
//! a single pass/fail line. Tolerances are pinned here, not configurable.
//!
//! Criterion 2 (shipped-instance minimality) and criterion 10 (bit-exact
//! reproducibility) exercise the command-line front end and live in the
//! `wide-cli` acceptance suite.

use std::sync::Arc;

use wide_core::diagnostics::{
    approx_energy_bound_constant, approx_energy_trace, apriori_checks, avg2_tail_bound, avg_op,
    avg_op2, avg_tail_bound, check_energy_inequality, check_f_monotone, compare, convergence_slope,
    energy_trace,
};
use wide_core::gradcheck;
use wide_core::grid::{diff, fractional_laplacian, SpatialField, SpatialGrid};
use wide_core::optimize::{minimize, SolveOptions, SolveStats};
use wide_core::presets::preset;
use wide_core::reference::{leapfrog, Trajectory};
use wide_core::wide::{ConstraintSet, SpaceTimeField, TimeGrid, WeightedFunctional};

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn verdict(criterion: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {criterion}: {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// The reference instance shared by criteria 3-7: 1D periodic wave data
/// `w0 = sin x`, `w1 = 0` on `[0, 2 pi]`, `N = 64`, `T = 1`, `dt = 1/400`.
fn reference_instance() -> (Arc<SpatialGrid>, TimeGrid, ConstraintSet) {
    let grid = Arc::new(SpatialGrid::periodic(TAU, 64).unwrap());
    let time = TimeGrid::new(1.0, 400).unwrap();
    let w0 = SpatialField::from_fn(grid.clone(), |x| x.sin());
    let w1 = SpatialField::zeros(grid.clone());
    (grid, time, ConstraintSet::new(w0, w1).unwrap())
}

fn solve_instance(
    preset_name: &str,
    eps: f64,
    tolerance: f64,
) -> (
    WeightedFunctional,
    ConstraintSet,
    SpaceTimeField,
    SolveStats,
) {
    let (_, time, constraints) = reference_instance();
    let p = preset(preset_name).unwrap();
    let f = WeightedFunctional::new(eps, p.energy, p.dissipation, time).unwrap();
    let opts = SolveOptions {
        grad_tolerance: tolerance,
        ..Default::default()
    };
    let (w, stats) = minimize(&f, &constraints, None, &opts).unwrap();
    assert!(stats.converged, "{preset_name} eps={eps} did not converge");
    (f, constraints, w, stats)
}

#[test]
fn criterion_1_gradient_consistency() {
    let rows = gradcheck::run(7, 5).unwrap();
    let worst = rows
        .iter()
        .map(|r| {
            r.energy_error
                .max(r.dissipation_error)
                .max(r.functional_error)
        })
        .fold(0.0f64, f64::max);
    verdict(
        "1 (gradient consistency)",
        rows.iter().all(|r| r.pass()),
        &format!(
            "{} presets x 5 seeded fields, worst finite-difference relative error {worst:.3e} \
             (tolerance 1e-6)",
            rows.len()
        ),
    );
}

#[test]
fn criterion_3_eps_convergence_linear_wave() {
    let (grid, time, constraints) = reference_instance();
    let p = preset("wave").unwrap();
    let schedule = [0.4, 0.2, 0.1, 0.05];
    let window = 0.75;
    let opts = SolveOptions::default();
    let mut errors: Vec<(f64, f64)> = Vec::new();
    let mut previous: Option<SpaceTimeField> = None;
    for &eps in &schedule {
        let f = WeightedFunctional::new(eps, p.energy.clone(), p.dissipation.clone(), time.clone())
            .unwrap();
        let (w, stats) = minimize(&f, &constraints, previous.as_ref(), &opts).unwrap();
        assert!(stats.converged);
        // exact solution sin(x) cos(t) sampled on the layer grid
        let mut exact_layers = Vec::with_capacity(time.layers());
        let mut exact_velocities = Vec::with_capacity(time.layers());
        for j in 0..time.layers() {
            let t = time.time(j);
            exact_layers.push(SpatialField::from_fn(grid.clone(), |x| x.sin() * t.cos()));
            exact_velocities.push(SpatialField::from_fn(grid.clone(), |x| -x.sin() * t.sin()));
        }
        let exact = Trajectory {
            time: time.clone(),
            layers: exact_layers,
            velocities: exact_velocities,
        };
        let traj = Trajectory::from_spacetime(&w, constraints.w1()).unwrap();
        let d = compare(&traj, &exact, window).unwrap();
        errors.push((eps, d.spacetime_l2));
        previous = Some(w);
    }
    let monotone = errors.windows(2).all(|pair| pair[1].1 < pair[0].1);
    let slope = convergence_slope(&errors).unwrap();
    let detail = format!(
        "errors {:?} on window [0, {window}], log-log slope {slope:.3} (needs monotone decrease \
         and slope >= 0.8)",
        errors
            .iter()
            .map(|(_, e)| format!("{e:.3e}"))
            .collect::<Vec<_>>()
    );
    verdict(
        "3 (eps-convergence, linear wave)",
        monotone && slope >= 0.8,
        &detail,
    );
}

#[test]
fn criterion_4_energy_inequality() {
    // undamped wave at eps = 0.05
    let (f, constraints, w, _) = solve_instance("wave", 0.05, 1e-8);
    let traj = Trajectory::from_spacetime(&w, constraints.w1()).unwrap();
    let trace = energy_trace(&traj, f.energy(), f.dissipation()).unwrap();
    let window = 0.75;
    let wave_verdict = check_energy_inequality(&trace, false, 0.05, window).unwrap();

    // dissipative variant on the telegraph instance
    let (f, constraints, w, _) = solve_instance("telegraph-on-top-of(nlw(4))", 0.05, 1e-8);
    let traj = Trajectory::from_spacetime(&w, constraints.w1()).unwrap();
    let trace = energy_trace(&traj, f.energy(), f.dissipation()).unwrap();
    let telegraph_verdict = check_energy_inequality(&trace, true, 0.05, window).unwrap();

    verdict(
        "4 (energy inequality)",
        wave_verdict.pass && telegraph_verdict.pass,
        &format!(
            "wave: E(t) <= 1.05 E(0) with worst excess {:.3e}; telegraph: E(t) + 2 int D <= \
             1.05 E(0) with worst excess {:.3e}",
            wave_verdict.margin, telegraph_verdict.margin
        ),
    );
}

#[test]
fn criterion_5_approximate_energy_monotone() {
    let eps = 0.2;
    let (f, constraints, w, stats) = solve_instance("wave", eps, 1e-10);
    let trace = approx_energy_trace(&w, &constraints, &f, &stats).unwrap();
    let window_s = 0.75 / eps;
    let mono = check_f_monotone(&trace, 1e-3, window_s).unwrap();
    let c_fit = approx_energy_bound_constant(&trace, &f, &constraints, window_s).unwrap();
    verdict(
        "5 (approximate-energy monotonicity)",
        mono.pass && c_fit.is_finite(),
        &format!(
            "worst step increase {:.3e} relative to 1 + F(0) (tolerance 1e-3); level-bound \
             constant C = {c_fit:.4} (finite)",
            mono.margin
        ),
    );
}

#[test]
fn criterion_6_oracle_equivalence_nonlinear() {
    let window = 0.5;
    let mut detail = String::new();
    let mut pass = true;
    for name in ["sine-gordon", "nlw(4)"] {
        let (f, constraints, w, _) = solve_instance(name, 0.05, 1e-8);
        let oracle = leapfrog(
            f.energy(),
            f.dissipation(),
            constraints.w0(),
            constraints.w1(),
            1e-3,
            1.0,
            f.kappa(),
        )
        .unwrap();
        let traj = Trajectory::from_spacetime(&w, constraints.w1()).unwrap();
        let d = compare(&traj, &oracle, window).unwrap();
        pass &= d.relative <= 0.05;
        detail.push_str(&format!(
            "{name}: relative L2 distance {:.4e}; ",
            d.relative
        ));
    }
    verdict(
        "6 (oracle equivalence, nonlinear presets)",
        pass,
        &format!("{detail}window [0, {window}], tolerance 5e-2 vs leapfrog at dt = 1e-3"),
    );
}

/// Fitted constants of one sweep entry, in a fixed order.
fn apriori_constants(preset_name: &str, eps: f64) -> Vec<(&'static str, f64)> {
    let (f, constraints, w, stats) = solve_instance(preset_name, eps, 1e-10);
    let report = apriori_checks(&w, &constraints, &f, &stats, 0.75).unwrap();
    let mut out = vec![
        ("potential-window", report.potential_window_constant),
        ("kinetic", report.kinetic_constant),
        ("displacement", report.displacement_constant),
    ];
    if let Some(d) = report.dual_constant {
        out.push(("dual", d));
    }
    if let Some(d) = report.dissipation_integral {
        out.push(("dissipation-integral", d));
    }
    assert!(report.sliding_window_ok, "sliding-window bound violated");
    out
}

#[test]
fn criterion_7_eps_uniform_apriori_constants() {
    // The two largest entries of the shipped schedule sit inside the
    // truncation tail (T < 6 eps) where the window constants are not
    // defined, so uniformity is asserted on the eps <= T/6 tail of the
    // schedule, extended by one halving: the geometric-tail extrapolation
    // of each fitted constant must stay within 20% of its last value, and
    // in particular the increments must keep contracting.
    let schedule = [0.1, 0.05, 0.025];
    let mut pass = true;
    let mut detail = String::new();
    for name in ["wave", "telegraph-on-top-of(nlw(4))"] {
        let fits: Vec<Vec<(&'static str, f64)>> = schedule
            .iter()
            .map(|&eps| apriori_constants(name, eps))
            .collect();
        for k in 0..fits[0].len() {
            let label = fits[0][k].0;
            let c: Vec<f64> = fits.iter().map(|f| f[k].1).collect();
            let inc1 = c[1] - c[0];
            let inc2 = c[2] - c[1];
            // contraction ratio of the increments; nonpositive growth is
            // trivially uniform
            let projected_excess = if inc2 <= 0.0 {
                0.0
            } else if inc2 >= inc1 {
                f64::INFINITY
            } else {
                let r = inc2 / inc1;
                inc2 * r / (1.0 - r) / c[2]
            };
            let ok = projected_excess <= 0.20;
            pass &= ok;
            detail.push_str(&format!(
                "{name}/{label}: fits {:.4} -> {:.4} -> {:.4}, projected remaining growth \
                 {:.1}%{}; ",
                c[0],
                c[1],
                c[2],
                projected_excess * 100.0,
                if ok { "" } else { " EXCEEDS 20%" }
            ));
        }
    }
    verdict("7 (eps-uniform a priori constants)", pass, &detail);
}

#[test]
fn criterion_8_averaging_operator_identities() {
    let ds = 0.01;
    let horizon = 20.0;
    let n = (horizon / ds) as usize + 1;
    let ones = vec![1.0; n];
    let a1 = avg_op(&ones, ds).unwrap();
    let a2 = avg_op2(&ones, ds).unwrap();
    let mut ok = true;
    let mut worst1 = 0.0f64;
    let mut worst2 = 0.0f64;
    for j in (0..n / 2).step_by(50) {
        let gap1 = (a1[j] - 1.0).abs();
        let gap2 = (a2.kernel[j] - 1.0).abs();
        ok &= gap1 <= ds + avg_tail_bound(&ones, ds, j);
        ok &= gap2 <= ds + avg2_tail_bound(&ones, ds, j);
        worst1 = worst1.max(gap1);
        worst2 = worst2.max(gap2);
    }
    ok &= a2.max_relative_gap() <= 1e-10;

    // derivative identity (Af)' = Af - f at second order under halving
    let residual = |ds: f64| -> f64 {
        let n = (horizon / ds) as usize + 1;
        let f: Vec<f64> = (0..n)
            .map(|j| {
                let s = j as f64 * ds;
                2.0 + (0.7 * s).sin()
            })
            .collect();
        let a = avg_op(&f, ds).unwrap();
        let j_hi = ((horizon - 6.0) / ds) as usize;
        let mut worst = 0.0f64;
        for j in 1..j_hi {
            let deriv = (a[j + 1] - a[j - 1]) / (2.0 * ds);
            worst = worst.max((deriv - (a[j] - f[j])).abs());
        }
        worst
    };
    let r1 = residual(0.02);
    let r2 = residual(0.01);
    let order = (r1 / r2).log2();
    ok &= order >= 1.8;
    verdict(
        "8 (averaging-operator identities)",
        ok,
        &format!(
            "A1 and A^2 1 within step+tail (worst gaps {worst1:.3e}, {worst2:.3e}); two-route \
             gap {:.3e}; derivative-identity order {order:.2} (needs >= 1.8)",
            a2.max_relative_gap()
        ),
    );
}

#[test]
fn criterion_9_spectral_operator_exactness() {
    let grid = Arc::new(SpatialGrid::periodic(TAU, 64).unwrap());
    let mut ok = true;
    let mut worst_eig = 0.0f64;
    for k in [1i64, 3, 7] {
        for s in [0.25, 0.5, 0.75, 1.0] {
            let u = SpatialField::from_fn(grid.clone(), |x| (k as f64 * x).sin());
            let lam = (k as f64).abs().powf(2.0 * s);
            let out = fractional_laplacian(&u, s).unwrap();
            let defect = out.axpy(-lam, &u).unwrap().sup_norm();
            worst_eig = worst_eig.max(defect);
            ok &= defect <= 1e-10;
        }
    }
    // s = 1 agrees with the stencil Laplacian at second order
    let err = |n: usize| -> f64 {
        let grid = Arc::new(SpatialGrid::periodic(TAU, n).unwrap());
        let u = SpatialField::from_fn(grid, |x| (x.sin()).exp());
        let spectral = fractional_laplacian(&u, 1.0).unwrap();
        let stencil = diff(&u, 2).unwrap().scaled(-1.0);
        spectral.axpy(-1.0, &stencil).unwrap().sup_norm()
    };
    let e1 = err(64);
    let e2 = err(128);
    let order = (e1 / e2).log2();
    ok &= (order - 2.0).abs() <= 0.1;
    verdict(
        "9 (spectral operator exactness)",
        ok,
        &format!(
            "worst eigenvalue defect {worst_eig:.3e} (tolerance 1e-10); stencil agreement \
             order {order:.2} (needs 2.0 +- 0.1)"
        ),
    );
}
