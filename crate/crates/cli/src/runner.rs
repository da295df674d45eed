//! Run orchestration: minimize per eps entry, evaluate the diagnostic
//! checks, persist fields and traces, and assemble the JSON report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use wide_core::diagnostics::{
    approx_energy_bound_constant, approx_energy_trace, apriori_checks, check_energy_inequality,
    check_f_monotone, compare, convergence_slope, energy_trace, AprioriReport, CheckVerdict,
};
use wide_core::energy::eval_energy;
use wide_core::grid::l2_inner;
use wide_core::optimize::{minimize, SolveStats};
use wide_core::reference::{exact_mode_trajectory, leapfrog, linear_mode_oracle, Trajectory};
use wide_core::wide::{el_residual, reporting_window, SpaceTimeField};

use crate::config::{OracleConfig, OracleKind, ResolvedConfig};
use crate::csvio::{num, write_atomic, write_csv, write_csv_cells};
use crate::error::{CliError, EXIT_CHECKS, EXIT_SOLVER};

#[derive(Clone, Debug, Serialize)]
pub struct NamedCheck {
    pub name: String,
    /// `pass`, `fail` or `skipped`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub detail: String,
}

impl NamedCheck {
    fn from_verdict(name: &str, v: &CheckVerdict) -> Self {
        Self {
            name: name.into(),
            status: if v.pass { "pass" } else { "fail" }.into(),
            margin: Some(v.margin),
            detail: v.description.clone(),
        }
    }

    fn skipped(name: &str, why: &str) -> Self {
        Self {
            name: name.into(),
            status: "skipped".into(),
            margin: None,
            detail: why.into(),
        }
    }

    fn passed(&self) -> bool {
        self.status != "fail"
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    pub window: f64,
    pub spacetime_l2: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualSummary {
    /// Largest per-layer norm of the fourth-order operator in the window.
    pub max_full: f64,
    /// Largest norm of the limit-equation part alone.
    pub max_wave_part: f64,
    /// Largest norm of the eps-order damping correction, reported
    /// separately because it vanishes as eps -> 0.
    pub max_damping_correction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryReport {
    pub eps: f64,
    /// Reporting window `[0, T - 5 eps]`, clamped at zero.
    pub window: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<SolveStats>,
    pub checks: Vec<NamedCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub apriori: Option<AprioriReport>,
    /// Fitted constant of the approximate-energy level bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<ResidualSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_distance: Option<DistanceReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub preset: String,
    pub equation: String,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    pub entries: Vec<EntryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_slope: Option<f64>,
    pub checks_enabled: bool,
    pub all_checks_passed: bool,
    pub seed: u64,
    /// Excluded from reproducibility comparisons.
    pub wall_time_ms: f64,
}

pub struct RunOutcome {
    pub report: RunReport,
    pub solver_failed: bool,
}

struct EntryComputation {
    report: EntryReport,
    minimizer: Option<SpaceTimeField>,
}

/// Solve one eps entry and evaluate its checks; write per-entry files into
/// `dir`.
fn run_entry(
    resolved: &ResolvedConfig,
    eps: f64,
    init: Option<&SpaceTimeField>,
    with_checks: bool,
    dir: &Path,
) -> Result<EntryComputation, CliError> {
    let problem = &resolved.problem;
    let horizon = problem.time.horizon();
    let window = reporting_window(horizon, eps);
    let mut checks = Vec::new();

    let functional = problem
        .functional(eps)
        .map_err(|e| CliError::new(EXIT_SOLVER, format!("eps = {eps}: {e}")))?;
    let constraints = problem
        .constraints()
        .map_err(|e| CliError::new(EXIT_SOLVER, e.to_string()))?;

    let outcome = minimize(&functional, &constraints, init, &problem.options)
        .map_err(|e| CliError::new(EXIT_SOLVER, format!("eps = {eps}: {e}")));
    let (w, stats) = match outcome {
        Ok((w, stats)) if stats.converged => (w, stats),
        Ok((_, stats)) => {
            return Ok(EntryComputation {
                report: EntryReport {
                    eps,
                    window,
                    error: Some(format!(
                        "solver did not converge: gradient norm {:.3e} after {} iterations",
                        stats.grad_sup_norm, stats.iterations
                    )),
                    stats: Some(stats),
                    checks,
                    apriori: None,
                    bound_constant: None,
                    residual: None,
                    oracle_distance: None,
                },
                minimizer: None,
            });
        }
        Err(e) => {
            return Ok(EntryComputation {
                report: EntryReport {
                    eps,
                    window,
                    error: Some(e.message),
                    stats: None,
                    checks,
                    apriori: None,
                    bound_constant: None,
                    residual: None,
                    oracle_distance: None,
                },
                minimizer: None,
            });
        }
    };

    let io = |e: wide_core::WideError| CliError::new(EXIT_SOLVER, e.to_string());

    // persist the field and the traces
    write_field_csv(&dir.join("field.csv"), &w)?;
    let traj = Trajectory::from_spacetime(&w, constraints.w1()).map_err(io)?;
    let etrace = energy_trace(&traj, &problem.energy, &problem.dissipation).map_err(io)?;
    {
        let rows: Vec<Vec<f64>> = (0..etrace.times.len())
            .map(|j| {
                vec![
                    etrace.times[j],
                    etrace.kinetic[j],
                    etrace.potential[j],
                    etrace.cumulative_dissipation[j],
                    etrace.total[j],
                ]
            })
            .collect();
        write_csv(
            &dir.join("energy.csv"),
            &[
                "t",
                "kinetic",
                "potential",
                "cumulative_dissipation",
                "total",
            ],
            &rows,
        )?;
    }
    let atrace = approx_energy_trace(&w, &constraints, &functional, &stats).map_err(io)?;
    {
        let rows: Vec<Vec<f64>> = (0..atrace.rescaled_times.len())
            .map(|j| {
                vec![
                    atrace.rescaled_times[j],
                    atrace.kinetic[j],
                    atrace.averaged_potential[j],
                    atrace.total[j],
                    atrace.inertia[j],
                    atrace.dissipation[j],
                    atrace.lagrangian[j],
                ]
            })
            .collect();
        write_csv(
            &dir.join("approx_energy.csv"),
            &[
                "s",
                "kinetic",
                "averaged_potential",
                "total",
                "inertia",
                "dissipation",
                "lagrangian",
            ],
            &rows,
        )?;
    }

    let mut apriori = None;
    let mut bound_constant = None;
    if with_checks {
        // discrete minimality against the admissible competitor
        let psi = constraints.competitor(functional.time());
        let f_psi = functional.eval(&psi).map_err(io)?;
        let slack = 1e-10 * (1.0 + f_psi.abs());
        checks.push(NamedCheck {
            name: "minimality".into(),
            status: if stats.value <= f_psi + slack {
                "pass"
            } else {
                "fail"
            }
            .into(),
            margin: Some((stats.value - f_psi) / (1.0 + f_psi.abs())),
            detail: format!(
                "F(minimizer) = {:.12e} vs F(competitor) = {f_psi:.12e}",
                stats.value
            ),
        });

        // rescaled level bound, zero-velocity data only
        let w1_norm = l2_inner(constraints.w1(), constraints.w1()).map_err(io)?;
        if w1_norm == 0.0 {
            let g0 = eval_energy(&problem.energy, constraints.w0()).map_err(io)?;
            let bound = g0 + 10.0 * eps * (1.0 + g0);
            checks.push(NamedCheck {
                name: "level-bound".into(),
                status: if stats.rescaled_value <= bound {
                    "pass"
                } else {
                    "fail"
                }
                .into(),
                margin: Some(stats.rescaled_value - bound),
                detail: format!(
                    "rescaled level J = {:.6e} vs G(w0) + 10 eps (1 + G(w0)) = {bound:.6e}",
                    stats.rescaled_value
                ),
            });
        } else {
            checks.push(NamedCheck::skipped(
                "level-bound",
                "initial velocity is nonzero",
            ));
        }

        if window > 0.0 {
            let v = check_energy_inequality(
                &etrace,
                problem.kappa,
                resolved.config.checks.energy_tolerance,
                window,
            )
            .map_err(io)?;
            checks.push(NamedCheck::from_verdict("energy-inequality", &v));
            let v = check_f_monotone(
                &atrace,
                resolved.config.checks.f_monotone_tolerance,
                window / eps,
            )
            .map_err(io)?;
            checks.push(NamedCheck::from_verdict("approx-energy-monotone", &v));
            bound_constant = Some(
                approx_energy_bound_constant(&atrace, &functional, &constraints, window / eps)
                    .map_err(io)?,
            );
        } else {
            checks.push(NamedCheck::skipped(
                "energy-inequality",
                "no truncation-free reporting window (T < 5 eps)",
            ));
            checks.push(NamedCheck::skipped(
                "approx-energy-monotone",
                "no truncation-free reporting window (T < 5 eps)",
            ));
        }

        if window >= eps {
            apriori =
                Some(apriori_checks(&w, &constraints, &functional, &stats, window).map_err(io)?);
        }
    }

    let residual = {
        let report = el_residual(&functional, &w).map_err(io)?;
        let horizon = w.time().horizon();
        let t_rep = if window > 0.0 { window } else { horizon };
        let mut max_wave = 0.0f64;
        let mut max_corr = 0.0f64;
        for (t, (wave, corr)) in report
            .times
            .iter()
            .zip(report.wave_part.iter().zip(&report.damping_correction))
        {
            if *t <= t_rep {
                max_wave = max_wave.max(*wave);
                max_corr = max_corr.max(*corr);
            }
        }
        ResidualSummary {
            max_full: report.max_in_window(t_rep, horizon).map_err(io)?,
            max_wave_part: max_wave,
            max_damping_correction: max_corr,
        }
    };

    Ok(EntryComputation {
        report: EntryReport {
            eps,
            window,
            error: None,
            stats: Some(stats),
            checks,
            apriori,
            bound_constant,
            residual: Some(residual),
            oracle_distance: None,
        },
        minimizer: Some(w),
    })
}

fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let grid = traj.grid();
    let mut out = String::with_capacity(traj.layers.len() * grid.nodes() * 30);
    out.push_str("t,x,w\n");
    for (j, layer) in traj.layers.iter().enumerate() {
        let t = traj.time.time(j);
        for (i, v) in layer.values().iter().enumerate() {
            out.push_str(&num(t));
            out.push(',');
            out.push_str(&num(grid.coord(i)));
            out.push(',');
            out.push_str(&num(*v));
            out.push('\n');
        }
    }
    write_atomic(path, &out)
}

fn write_field_csv(path: &Path, w: &SpaceTimeField) -> Result<(), CliError> {
    let grid = w.grid();
    let mut out = String::with_capacity(w.values().len() * 30);
    out.push_str("t,x,w\n");
    for j in 0..w.time().layers() {
        let t = w.time().time(j);
        let layer = w.layer(j);
        for (i, v) in layer.iter().enumerate() {
            out.push_str(&num(t));
            out.push(',');
            out.push_str(&num(grid.coord(i)));
            out.push(',');
            out.push_str(&num(*v));
            out.push('\n');
        }
    }
    write_atomic(path, &out)
}

fn oracle_trajectory(
    resolved: &ResolvedConfig,
    oracle: &OracleConfig,
) -> Result<Option<(String, Trajectory)>, CliError> {
    let problem = &resolved.problem;
    let kind = match oracle.kind {
        OracleKind::None => return Ok(None),
        OracleKind::Auto => {
            let linear = linear_mode_oracle(&resolved.config.preset).is_some();
            if linear && resolved.single_mode.is_some() && problem.grid.is_periodic() {
                OracleKind::ExactMode
            } else {
                OracleKind::Leapfrog
            }
        }
        k => k,
    };
    match kind {
        OracleKind::ExactMode => {
            let lp = linear_mode_oracle(&resolved.config.preset).ok_or_else(|| {
                CliError::new(
                    EXIT_SOLVER,
                    format!(
                        "no closed-form mode oracle for preset {}",
                        resolved.config.preset
                    ),
                )
            })?;
            let (mode, _) = resolved.single_mode.ok_or_else(|| {
                CliError::new(
                    EXIT_SOLVER,
                    "the closed-form oracle needs single-mode w0 with zero w1",
                )
            })?;
            let traj = exact_mode_trajectory(lp, &problem.w0, mode, &problem.time);
            Ok(Some(("exact-mode".into(), traj)))
        }
        OracleKind::Leapfrog => {
            let traj = leapfrog(
                &problem.energy,
                &problem.dissipation,
                &problem.w0,
                &problem.w1,
                oracle.dt,
                problem.time.horizon(),
                problem.kappa,
            )
            .map_err(|e| CliError::new(EXIT_SOLVER, format!("oracle integration: {e}")))?;
            Ok(Some(("leapfrog".into(), traj)))
        }
        _ => unreachable!(),
    }
}

/// Run the whole schedule. `sweep` enables the oracle comparison and the
/// per-entry subdirectories; `solve` requires a single-entry schedule.
pub fn run(
    resolved: &ResolvedConfig,
    out_dir: &Path,
    with_checks: bool,
    threads: usize,
    is_sweep: bool,
) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let problem = &resolved.problem;
    let epsilons = &problem.epsilons;

    let entry_dir = |i: usize| -> PathBuf {
        if is_sweep {
            out_dir.join(format!("eps_{:.6}", epsilons[i]))
        } else {
            out_dir.to_path_buf()
        }
    };

    let warm = resolved.config.solver.warm_start;
    let mut computations: Vec<Option<EntryComputation>> = Vec::new();
    if warm || threads <= 1 || epsilons.len() == 1 {
        let mut previous: Option<SpaceTimeField> = None;
        for (i, &eps) in epsilons.iter().enumerate() {
            let init = if warm { previous.as_ref() } else { None };
            let computed = run_entry(resolved, eps, init, with_checks, &entry_dir(i))?;
            if warm {
                if let Some(w) = &computed.minimizer {
                    previous = Some(w.clone());
                }
            }
            computations.push(Some(computed));
        }
    } else {
        // cold-started entries are independent; run them in waves of
        // `threads` workers, keeping the output order fixed
        let mut results: Vec<Result<EntryComputation, CliError>> = Vec::new();
        for wave in (0..epsilons.len()).collect::<Vec<_>>().chunks(threads) {
            let wave_results: Vec<Result<EntryComputation, CliError>> =
                std::thread::scope(|scope| {
                    let handles: Vec<_> = wave
                        .iter()
                        .map(|&i| {
                            let dir = entry_dir(i);
                            let eps = epsilons[i];
                            scope.spawn(move || run_entry(resolved, eps, None, with_checks, &dir))
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("worker panicked"))
                        .collect()
                });
            results.extend(wave_results);
        }
        for r in results {
            computations.push(Some(r?));
        }
    }

    let mut entries: Vec<EntryReport> = Vec::new();
    let mut minimizers: Vec<Option<SpaceTimeField>> = Vec::new();
    for c in computations.into_iter().flatten() {
        entries.push(c.report);
        minimizers.push(c.minimizer);
    }

    // oracle comparison across the sweep on the common window
    let mut oracle_name = None;
    let mut slope = None;
    if is_sweep {
        let oracle_cfg = resolved.config.oracle.clone().unwrap_or(OracleConfig {
            kind: OracleKind::Auto,
            dt: 1e-3,
        });
        if let Some((name, oracle)) = oracle_trajectory(resolved, &oracle_cfg)? {
            let eps_min = *epsilons.last().unwrap();
            let common_window = reporting_window(problem.time.horizon(), eps_min);
            for (entry, minimizer) in entries.iter_mut().zip(&minimizers) {
                if let Some(w) = minimizer {
                    let traj = Trajectory::from_spacetime(w, &problem.w1)
                        .map_err(|e| CliError::new(EXIT_SOLVER, e.to_string()))?;
                    let d = compare(&traj, &oracle, common_window)
                        .map_err(|e| CliError::new(EXIT_SOLVER, e.to_string()))?;
                    entry.oracle_distance = Some(DistanceReport {
                        window: common_window,
                        spacetime_l2: d.spacetime_l2,
                        relative: d.relative,
                    });
                }
            }
            oracle_name = Some(name);
            let points: Vec<(f64, f64)> = entries
                .iter()
                .filter_map(|e| e.oracle_distance.as_ref().map(|d| (e.eps, d.spacetime_l2)))
                .collect();
            slope = convergence_slope(&points);

            let rows: Vec<Vec<String>> = entries
                .iter()
                .map(|e| {
                    vec![
                        num(e.eps),
                        e.oracle_distance
                            .as_ref()
                            .map(|d| num(d.spacetime_l2))
                            .unwrap_or_default(),
                        slope.map(num).unwrap_or_default(),
                    ]
                })
                .collect();
            write_csv_cells(
                &out_dir.join("convergence.csv"),
                &["epsilon", "spacetime_l2_error", "slope"],
                &rows,
            )?;
            write_trajectory_csv(&out_dir.join("oracle.csv"), &oracle)?;
        }
    }

    let solver_failed = entries.iter().any(|e| e.error.is_some());
    let all_checks_passed = entries
        .iter()
        .flat_map(|e| e.checks.iter())
        .all(NamedCheck::passed);

    let report = RunReport {
        preset: resolved.preset.name.clone(),
        equation: resolved.preset.equation.clone(),
        warnings: resolved.warnings.clone(),
        oracle: oracle_name,
        entries,
        convergence_slope: slope,
        checks_enabled: with_checks,
        all_checks_passed,
        seed: resolved.config.seed,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::new(EXIT_SOLVER, format!("report serialization: {e}")))?;
    write_atomic(&out_dir.join("report.json"), &(json + "\n"))?;

    Ok(RunOutcome {
        report,
        solver_failed,
    })
}

/// Map a finished run to the process exit code.
pub fn exit_code(outcome: &RunOutcome) -> i32 {
    if outcome.solver_failed {
        EXIT_SOLVER
    } else if outcome.report.checks_enabled && !outcome.report.all_checks_passed {
        EXIT_CHECKS
    } else {
        0
    }
}
