//! Minimization of the discrete weighted functional.
//!
//! Fully quadratic instances take a preconditioned conjugate-gradient path
//! on the constrained subspace; everything else runs limited-memory
//! quasi-Newton with a monotone Armijo line search. On periodic grids the
//! preconditioner is exact: the optimality system decouples across spatial
//! Fourier modes into pentadiagonal symmetric positive-definite systems in
//! time, factored once per solve. On Dirichlet grids the diagonal layer
//! weight scaling is used instead.
//!
//! Convergence is always measured by the sup-norm of the preconditioned
//! gradient (diagonal layer scaling), so the reported norms are uniformly
//! scaled across layers regardless of the inner preconditioner.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::energy::{EnergySpec, EnergyTerm};
use crate::error::{Result, WideError};
use crate::grid::{diff, l2_inner, SpatialGrid};
use crate::problem::ProblemSpec;
use crate::wide::{precondition, ConstraintSet, SpaceTimeField, WeightedFunctional};

/// Which solver path to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    Auto,
    Quadratic,
    Nonlinear,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct SolveOptions {
    /// Sup-norm tolerance on the preconditioned gradient.
    pub grad_tolerance: f64,
    pub max_iterations: usize,
    /// Armijo sufficient-decrease constant.
    pub sufficient_decrease: f64,
    /// Backtracking factor of the line search.
    pub backtrack_factor: f64,
    /// Quasi-Newton history length.
    pub memory: usize,
    pub path: SolverPath,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            grad_tolerance: 1e-8,
            max_iterations: 10_000,
            sufficient_decrease: 1e-4,
            backtrack_factor: 0.5,
            memory: 10,
            path: SolverPath::Auto,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tolerance > 0.0) {
            return Err(WideError::InvalidParameter(
                "gradient tolerance must be positive".into(),
            ));
        }
        if self.memory == 0 {
            return Err(WideError::InvalidParameter(
                "quasi-Newton memory must be at least 1".into(),
            ));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(WideError::InvalidParameter(
                "backtracking factor must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one minimization.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final sup-norm of the preconditioned gradient.
    pub grad_sup_norm: f64,
    /// Floating-point noise floor of that sup-norm; see
    /// [`stationarity_floor`]. Convergence is declared at
    /// `max(tolerance, floor)`.
    pub stationarity_floor: f64,
    /// Functional value at the returned field.
    pub value: f64,
    /// Rescaled level `F/eps`.
    pub rescaled_value: f64,
    pub converged: bool,
    pub path: &'static str,
    pub wall_time_ms: f64,
    /// Set when a warm start was discarded for being worse than the
    /// admissible competitor.
    pub restarted_from_competitor: bool,
}

/// Attainable accuracy of the preconditioned gradient in double precision.
///
/// Evaluating the optimality system rounds the field to machine precision
/// first, so the preconditioned gradient carries noise of the order of the
/// system's stiffness (dominated by the fourth-difference inertia block
/// `16 eps^2 / dt^4`) times machine epsilon times the field scale. Below
/// this level the sup-norm is not meaningful and iteration cannot improve
/// the minimizer.
pub fn stationarity_floor(f: &WeightedFunctional, grid: &SpatialGrid, field_scale: f64) -> f64 {
    let dt = f.time().dt();
    let eps = f.eps();
    let h = grid.spacing();
    let mut stiff = 16.0 * eps * eps / (dt * dt * dt * dt);
    for term in f.energy().terms() {
        stiff += match term {
            EnergyTerm::DerivPower {
                order,
                exponent,
                coeff,
            } => {
                let curvature = (exponent - 1.0).max(1.0)
                    * field_scale.max(1.0).powf((exponent - 2.0).max(0.0));
                coeff * curvature * (4.0 / (h * h)).powi(*order as i32)
            }
            EnergyTerm::SobolevQuadratic { order, coeff } => {
                coeff * (std::f64::consts::PI / h).powf(2.0 * order)
            }
            EnergyTerm::CosinePotential { coeff } => *coeff,
            EnergyTerm::KirchhoffQuartic { coeff } => {
                let q_scale = field_scale.max(1.0).powi(2) / (h * h);
                coeff * q_scale * 4.0 / (h * h)
            }
        };
    }
    if f.kappa() {
        let d_bound: f64 = f
            .dissipation()
            .terms()
            .iter()
            .map(|(order, coeff)| coeff * (4.0 / (h * h)).powi(*order as i32))
            .sum();
        stiff += eps * d_bound / dt;
    }
    4.0 * f64::EPSILON * stiff * field_scale.max(1.0)
}

/// Diagonal entry of the Gram matrix of the order-`k` stencil (the sum of
/// squared coefficients over the spacing power), the Jacobi surrogate of
/// the spatial operator on non-periodic grids.
fn stencil_gram_diagonal(order: usize, h: f64) -> f64 {
    let sum_sq = match order {
        0 => 1.0,
        1 => 0.5,
        2 => 6.0,
        3 => 2.5,
        4 => 70.0,
        _ => unreachable!("orders validated on construction"),
    };
    sum_sq / h.powi(2 * order as i32)
}

/// Symbol of the order-`k` central stencil (squared modulus, with spacing).
fn stencil_symbol_sq(order: usize, theta: f64, h: f64) -> f64 {
    match order {
        0 => 1.0,
        1 => {
            let s = theta.sin() / h;
            s * s
        }
        2 => {
            let s = (2.0 - 2.0 * theta.cos()) / (h * h);
            s * s
        }
        3 => {
            let s = ((2.0 * theta).sin() - 2.0 * theta.sin()) / (h * h * h);
            s * s
        }
        4 => {
            let s = (2.0 * (2.0 * theta).cos() - 8.0 * theta.cos() + 6.0) / (h * h * h * h);
            s * s
        }
        _ => unreachable!("orders validated on construction"),
    }
}

/// Per-mode spatial symbol of the Hessian of the quadratic energy terms,
/// plus optional curvature surrogates for the non-quadratic ones (used only
/// to precondition the quasi-Newton path).
fn energy_symbol(
    spec: &EnergySpec,
    grid: &SpatialGrid,
    mode: i64,
    surrogate_for: Option<&crate::grid::SpatialField>,
) -> f64 {
    let h = grid.spacing();
    let n = grid.nodes() as f64;
    let theta = 2.0 * std::f64::consts::PI * mode as f64 / n;
    let xi = grid.wavenumber(mode).abs();
    let mut sym = 0.0;
    for term in spec.terms() {
        match term {
            EnergyTerm::DerivPower {
                order,
                exponent,
                coeff,
            } => {
                if (*exponent - 2.0).abs() < 1e-14 {
                    sym += coeff * stencil_symbol_sq(*order, theta, h);
                } else if let Some(w0) = surrogate_for {
                    // Jacobi-style average of the regularized p-curvature at
                    // the initial datum.
                    let d = diff(w0, *order).expect("order validated");
                    let delta = spec.p_regularization();
                    let p = *exponent;
                    let avg: f64 = d
                        .values()
                        .iter()
                        .map(|g| (g * g + delta * delta).powf((p - 2.0) / 2.0))
                        .sum::<f64>()
                        / d.len() as f64;
                    sym += coeff * (p - 1.0) * avg * stencil_symbol_sq(*order, theta, h);
                }
            }
            EnergyTerm::SobolevQuadratic { order, coeff } => {
                sym += coeff * xi.powf(2.0 * order);
            }
            EnergyTerm::CosinePotential { coeff } => {
                if surrogate_for.is_some() {
                    sym += coeff;
                }
            }
            EnergyTerm::KirchhoffQuartic { coeff } => {
                if let Some(w0) = surrogate_for {
                    let d = diff(w0, 1).expect("first derivative");
                    let q = l2_inner(&d, &d).expect("same grid");
                    sym += coeff * q * stencil_symbol_sq(1, theta, h);
                }
            }
        }
    }
    sym
}

fn dissipation_symbol(f: &WeightedFunctional, grid: &SpatialGrid, mode: i64) -> f64 {
    let h = grid.spacing();
    let n = grid.nodes() as f64;
    let theta = 2.0 * std::f64::consts::PI * mode as f64 / n;
    f.dissipation()
        .terms()
        .iter()
        .map(|(order, coeff)| coeff * stencil_symbol_sq(*order, theta, h))
        .sum()
}

/// Symmetric pentadiagonal LDL^T factorization.
struct BandedLdl {
    d: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl BandedLdl {
    /// Factor from the three lower bands (`diag`, `sub1`, `sub2`).
    fn factor(diag: &[f64], sub1: &[f64], sub2: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            let mut di = diag[i];
            if i >= 1 {
                di -= l1[i - 1] * l1[i - 1] * d[i - 1];
            }
            if i >= 2 {
                di -= l2[i - 2] * l2[i - 2] * d[i - 2];
            }
            if !(di > 0.0) || !di.is_finite() {
                return Err(WideError::InvalidParameter(format!(
                    "optimality system lost positive definiteness at row {i} (pivot {di:.3e})"
                )));
            }
            d[i] = di;
            if i + 1 < n {
                let mut e = sub1[i];
                if i >= 1 {
                    e -= l1[i - 1] * l2[i - 1] * d[i - 1];
                }
                l1[i] = e / di;
            }
            if i + 2 < n {
                l2[i] = sub2[i] / di;
            }
        }
        Ok(Self { d, l1, l2 })
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n {
            if i >= 1 {
                b[i] -= self.l1[i - 1] * b[i - 1];
            }
            if i >= 2 {
                b[i] -= self.l2[i - 2] * b[i - 2];
            }
        }
        for i in 0..n {
            b[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                b[i] -= self.l1[i] * b[i + 1];
            }
            if i + 2 < n {
                b[i] -= self.l2[i] * b[i + 2];
            }
        }
    }
}

/// Assemble the lower bands of the free block (layers `2..=J`) of the
/// per-mode time system for spatial symbols `(g_sym, d_sym)`.
fn mode_time_bands(
    f: &WeightedFunctional,
    g_sym: f64,
    d_sym: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let time = f.time();
    let j_max = time.steps();
    let dt = time.dt();
    let eps = f.eps();
    let layers = time.layers();
    // full bands over all layers, then slice out the free block
    let mut diag = vec![0.0; layers];
    let mut sub1 = vec![0.0; layers]; // A[l+1][l]
    let mut sub2 = vec![0.0; layers]; // A[l+2][l]
    let beta = [1.0, -2.0, 1.0]; // offsets -1, 0, +1
    let sgn = [-1.0, 0.0, 1.0];
    let inertia = eps * eps / (dt * dt * dt * dt);
    let damping = if f.kappa() {
        eps * d_sym / (4.0 * dt * dt)
    } else {
        0.0
    };
    for j in 1..j_max {
        let a = dt * f.weights()[j];
        for p in 0..3usize {
            for q in p..3usize {
                let l = j + p;
                let m = j + q; // l <= m after the offset shift; rows are l-1..l+1
                let contrib = a * (inertia * beta[p] * beta[q] + damping * sgn[p] * sgn[q]);
                // offsets p,q in {0,1,2} represent layers j-1, j, j+1
                let (row, col) = (m - 1, l - 1); // col <= row
                match row - col {
                    0 => diag[col] += contrib,
                    1 => sub1[col] += contrib,
                    2 => sub2[col] += contrib,
                    _ => unreachable!(),
                }
            }
        }
        diag[j] += a * g_sym;
    }
    (diag, sub1, sub2)
}

/// Exact per-mode factorization of the optimality system on periodic grids;
/// used as the conjugate-gradient preconditioner (exact for quadratic
/// instances) and as the quasi-Newton initial matrix.
struct SpectralPreconditioner {
    grid: Arc<SpatialGrid>,
    factors: Vec<BandedLdl>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl SpectralPreconditioner {
    fn build(
        f: &WeightedFunctional,
        grid: &Arc<SpatialGrid>,
        surrogate_for: Option<&crate::grid::SpatialField>,
    ) -> Result<Self> {
        let n = grid.nodes();
        let mut factors = Vec::with_capacity(n / 2 + 1);
        for bin in 0..=n / 2 {
            let mode = grid.mode_of_bin(bin);
            let g_sym = energy_symbol(f.energy(), grid, mode, surrogate_for);
            let d_sym = dissipation_symbol(f, grid, mode);
            let (diag, sub1, sub2) = mode_time_bands(f, g_sym, d_sym);
            // free block: layers 2..=J
            let layers = f.time().layers();
            let free = layers - 2;
            let d: Vec<f64> = diag[2..].to_vec();
            let mut s1: Vec<f64> = sub1[2..].to_vec();
            let mut s2: Vec<f64> = sub2[2..].to_vec();
            s1.truncate(free.saturating_sub(1));
            s2.truncate(free.saturating_sub(2));
            s1.resize(free, 0.0);
            s2.resize(free, 0.0);
            factors.push(BandedLdl::factor(&d, &s1, &s2)?);
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid: grid.clone(),
            factors,
            fft_fwd: planner.plan_fft_forward(n),
            fft_inv: planner.plan_fft_inverse(n),
        })
    }

    /// Apply the inverse of the factored operator to a masked gradient.
    fn apply(&self, g: &SpaceTimeField) -> SpaceTimeField {
        let n = self.grid.nodes();
        let layers = g.time().layers();
        let free = layers - 2;
        // forward transform every free layer
        let mut spectra = vec![Complex64::new(0.0, 0.0); layers * n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for j in 2..layers {
            for (b, v) in buf.iter_mut().zip(g.layer(j)) {
                *b = Complex64::new(*v, 0.0);
            }
            self.fft_fwd.process(&mut buf);
            spectra[j * n..(j + 1) * n].copy_from_slice(&buf);
        }
        // per-bin pentadiagonal solves (real matrix, complex right-hand side)
        let mut re = vec![0.0; free];
        let mut im = vec![0.0; free];
        for bin in 0..=n / 2 {
            for j in 0..free {
                let c = spectra[(j + 2) * n + bin];
                re[j] = c.re;
                im[j] = c.im;
            }
            let ldl = &self.factors[bin];
            ldl.solve_in_place(&mut re);
            ldl.solve_in_place(&mut im);
            for j in 0..free {
                let c = Complex64::new(re[j], im[j]);
                spectra[(j + 2) * n + bin] = c;
                if bin != 0 && bin != n - bin {
                    spectra[(j + 2) * n + (n - bin)] = c.conj();
                }
            }
        }
        // inverse transform
        let mut out = SpaceTimeField::zeros(g.time().clone(), g.grid().clone());
        let scale = 1.0 / n as f64;
        for j in 2..layers {
            buf.copy_from_slice(&spectra[j * n..(j + 1) * n]);
            self.fft_inv.process(&mut buf);
            for (o, b) in out.layer_mut(j).iter_mut().zip(&buf) {
                *o = b.re * scale;
            }
        }
        out
    }
}

/// Time-exact preconditioner for non-periodic grids: one pentadiagonal
/// factorization of the weighted time operator with the spatial operator
/// replaced by its Jacobi diagonal, applied per node column.
struct NodeBlockPreconditioner {
    factor: BandedLdl,
}

impl NodeBlockPreconditioner {
    fn build(
        f: &WeightedFunctional,
        grid: &SpatialGrid,
        surrogate_for: Option<&crate::grid::SpatialField>,
    ) -> Result<Self> {
        let h = grid.spacing();
        let mut g_diag = 0.0;
        for term in f.energy().terms() {
            g_diag += match term {
                EnergyTerm::DerivPower {
                    order,
                    exponent,
                    coeff,
                } => {
                    if (*exponent - 2.0).abs() < 1e-14 {
                        coeff * stencil_gram_diagonal(*order, h)
                    } else if let Some(w0) = surrogate_for {
                        let d = diff(w0, *order).expect("order validated");
                        let delta = f.energy().p_regularization();
                        let p = *exponent;
                        let avg: f64 = d
                            .values()
                            .iter()
                            .map(|g| (g * g + delta * delta).powf((p - 2.0) / 2.0))
                            .sum::<f64>()
                            / d.len() as f64;
                        coeff * (p - 1.0) * avg * stencil_gram_diagonal(*order, h)
                    } else {
                        0.0
                    }
                }
                EnergyTerm::SobolevQuadratic { order, coeff } => {
                    coeff * stencil_gram_diagonal(order.round() as usize, h)
                }
                EnergyTerm::CosinePotential { coeff } => {
                    if surrogate_for.is_some() {
                        *coeff
                    } else {
                        0.0
                    }
                }
                EnergyTerm::KirchhoffQuartic { coeff } => {
                    if let Some(w0) = surrogate_for {
                        let d = diff(w0, 1).expect("first derivative");
                        let q = l2_inner(&d, &d).expect("same grid");
                        coeff * q * stencil_gram_diagonal(1, h)
                    } else {
                        0.0
                    }
                }
            };
        }
        let d_diag: f64 = f
            .dissipation()
            .terms()
            .iter()
            .map(|(order, coeff)| coeff * stencil_gram_diagonal(*order, h))
            .sum();
        let (diag, sub1, sub2) = mode_time_bands(f, g_diag, d_diag);
        let layers = f.time().layers();
        let free = layers - 2;
        let d: Vec<f64> = diag[2..].to_vec();
        let mut s1: Vec<f64> = sub1[2..].to_vec();
        let mut s2: Vec<f64> = sub2[2..].to_vec();
        s1.truncate(free.saturating_sub(1));
        s2.truncate(free.saturating_sub(2));
        s1.resize(free, 0.0);
        s2.resize(free, 0.0);
        Ok(Self {
            factor: BandedLdl::factor(&d, &s1, &s2)?,
        })
    }

    fn apply(&self, g: &SpaceTimeField) -> SpaceTimeField {
        let n = g.grid().nodes();
        let layers = g.time().layers();
        let free = layers - 2;
        let mut out = SpaceTimeField::zeros(g.time().clone(), g.grid().clone());
        let mut column = vec![0.0; free];
        for i in 0..n {
            for j in 0..free {
                column[j] = g.layer(j + 2)[i];
            }
            self.factor.solve_in_place(&mut column);
            for j in 0..free {
                out.layer_mut(j + 2)[i] = column[j];
            }
        }
        out
    }
}

/// SPD preconditioner choices behind one interface.
enum Preconditioner {
    /// Diagonal layer scaling `1/(dt mu_j)`.
    #[allow(dead_code)]
    Diagonal,
    Spectral(Box<SpectralPreconditioner>),
    NodeBlock(Box<NodeBlockPreconditioner>),
}

impl Preconditioner {
    fn apply(&self, g: &SpaceTimeField, f: &WeightedFunctional) -> SpaceTimeField {
        match self {
            Preconditioner::Diagonal => precondition(g, f),
            Preconditioner::Spectral(p) => p.apply(g),
            Preconditioner::NodeBlock(p) => p.apply(g),
        }
    }
}

/// Wall-clock stopwatch; a no-op on targets without a monotonic clock
/// (the browser demo).
struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64() * 1e3
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

fn check_finite(value: f64, iteration: usize, what: &str) -> Result<()> {
    if !value.is_finite() {
        return Err(WideError::NonFinite {
            iteration,
            context: format!("{what} = {value}"),
        });
    }
    Ok(())
}

/// Minimize the weighted functional subject to the initial-data constraints.
///
/// `init` is the warm start; when absent (or worse than the admissible
/// competitor `w0 + t w1`) the competitor is used, so the returned value
/// never exceeds the competitor level.
pub fn minimize(
    f: &WeightedFunctional,
    constraints: &ConstraintSet,
    init: Option<&SpaceTimeField>,
    opts: &SolveOptions,
) -> Result<(SpaceTimeField, SolveStats)> {
    opts.validate()?;
    f.energy().check_grid(constraints.w0().grid())?;
    let start = Stopwatch::start();

    let competitor = constraints.competitor(f.time());
    let competitor_value = f.eval(&competitor)?;
    check_finite(competitor_value, 0, "competitor value")?;

    let mut restarted = false;
    let mut w = match init {
        Some(given) => {
            let mut w = given.clone();
            constraints.apply(&mut w)?;
            if !w.is_finite() || f.eval(&w)? > competitor_value {
                restarted = init.is_some();
                competitor.clone()
            } else {
                w
            }
        }
        None => competitor.clone(),
    };

    let grid = constraints.w0().grid().clone();
    let quadratic = match opts.path {
        SolverPath::Auto => f.is_quadratic(),
        SolverPath::Quadratic => {
            if !f.is_quadratic() {
                return Err(WideError::InvalidParameter(
                    "quadratic path requested for a non-quadratic functional".into(),
                ));
            }
            true
        }
        SolverPath::Nonlinear => false,
    };

    let precond = if grid.is_periodic() {
        let surrogate = if quadratic {
            None
        } else {
            Some(constraints.w0())
        };
        Preconditioner::Spectral(Box::new(SpectralPreconditioner::build(
            f, &grid, surrogate,
        )?))
    } else {
        let surrogate = if quadratic {
            None
        } else {
            Some(constraints.w0())
        };
        Preconditioner::NodeBlock(Box::new(NodeBlockPreconditioner::build(
            f, &grid, surrogate,
        )?))
    };

    let floor = stationarity_floor(f, &grid, competitor.sup_norm());
    let effective_tol = opts.grad_tolerance.max(floor);
    let (iterations, grad_sup) = if quadratic {
        solve_quadratic_pcg(f, constraints, &mut w, &precond, opts, effective_tol)?
    } else {
        solve_lbfgs(f, constraints, &mut w, &precond, opts, effective_tol)?
    };

    let value = f.eval(&w)?;
    // the competitor is admissible, so never return anything worse
    let w = if value <= competitor_value {
        w
    } else {
        restarted = true;
        competitor
    };
    let value = f.eval(&w)?;
    let converged = grad_sup <= effective_tol;
    Ok((
        w.clone(),
        SolveStats {
            iterations,
            grad_sup_norm: grad_sup,
            stationarity_floor: floor,
            value,
            rescaled_value: value / f.eps(),
            converged,
            path: if quadratic { "quadratic-pcg" } else { "lbfgs" },
            wall_time_ms: start.elapsed_ms(),
            restarted_from_competitor: restarted,
        },
    ))
}

fn precond_sup_norm(g: &SpaceTimeField, f: &WeightedFunctional) -> f64 {
    precondition(g, f).sup_norm()
}

/// Preconditioned conjugate gradients on the constrained subspace. The
/// gradient map of a quadratic functional is affine, so matrix-vector
/// products are gradient differences.
fn solve_quadratic_pcg(
    f: &WeightedFunctional,
    constraints: &ConstraintSet,
    w: &mut SpaceTimeField,
    precond: &Preconditioner,
    opts: &SolveOptions,
    tol: f64,
) -> Result<(usize, f64)> {
    let grad_at = |field: &SpaceTimeField| -> Result<SpaceTimeField> { f.gradient(field) };
    let base = w.clone();
    let grad_base = grad_at(&base)?;

    let apply_hessian = |v: &SpaceTimeField| -> Result<SpaceTimeField> {
        let shifted = base.axpy(1.0, v)?;
        let g = grad_at(&shifted)?;
        g.axpy(-1.0, &grad_base)
    };

    // state: z is the update over the initial iterate
    let mut z = SpaceTimeField::zeros(f.time().clone(), w.grid().clone());
    let mut r = grad_base.scaled(-1.0);
    let mut sup = precond_sup_norm(&r, f);
    if sup <= tol {
        return Ok((0, sup));
    }
    let mut d = precond.apply(&r, f);
    let mut rho = r.dot(&d);
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let q = apply_hessian(&d)?;
        let dq = d.dot(&q);
        check_finite(dq, iterations, "curvature")?;
        if dq <= 0.0 {
            return Err(WideError::InvalidParameter(format!(
                "conjugate gradient met nonpositive curvature {dq:.3e}"
            )));
        }
        let alpha = rho / dq;
        z = z.axpy(alpha, &d)?;
        r = r.axpy(-alpha, &q)?;
        sup = precond_sup_norm(&r, f);
        check_finite(sup, iterations, "gradient norm")?;
        if sup <= tol {
            break;
        }
        let s = precond.apply(&r, f);
        let rho_next = r.dot(&s);
        let beta = rho_next / rho;
        rho = rho_next;
        d = s.axpy(beta, &d)?;
    }
    *w = base.axpy(1.0, &z)?;
    constraints.apply(w)?;
    // report the true gradient at the final iterate
    let sup = precond_sup_norm(&f.gradient(w)?, f);
    Ok((iterations, sup))
}

/// Limited-memory BFGS with the preconditioner as initial matrix and a
/// monotone backtracking line search.
fn solve_lbfgs(
    f: &WeightedFunctional,
    constraints: &ConstraintSet,
    w: &mut SpaceTimeField,
    precond: &Preconditioner,
    opts: &SolveOptions,
    tol: f64,
) -> Result<(usize, f64)> {
    constraints.apply(w)?;
    let mut value = f.eval(w)?;
    check_finite(value, 0, "functional value")?;
    let mut grad = f.gradient(w)?;
    let mut sup = precond_sup_norm(&grad, f);
    let mut pairs: Vec<(SpaceTimeField, SpaceTimeField, f64)> = Vec::new(); // (s, y, 1/<s,y>)
    let mut gamma = 1.0;
    let mut iterations = 0;

    // resolution of the functional value itself; steps whose predicted
    // decrease falls below it cannot be certified by the line search and
    // are accepted on a no-increase basis instead
    let noise_f = 8.0 * f64::EPSILON * (1.0 + value.abs());
    let mut best: Option<(f64, SpaceTimeField)> = None;
    let mut stall = 0usize;
    let mut resets = 0usize;

    while sup > tol && iterations < opts.max_iterations {
        iterations += 1;
        // two-loop recursion
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * s.dot(&q);
            q = q.axpy(-a, y)?;
            alphas.push(a);
        }
        let mut dir = precond.apply(&q, f).scaled(gamma);
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * y.dot(&dir);
            dir = dir.axpy(a - b, s)?;
        }
        let mut dir = dir.scaled(-1.0);

        let mut slope = grad.dot(&dir);
        if !(slope < 0.0) {
            // not a descent direction; drop history and fall back to the
            // preconditioned gradient
            pairs.clear();
            gamma = 1.0;
            dir = precond.apply(&grad, f).scaled(-1.0);
            slope = grad.dot(&dir);
            if !(slope < 0.0) {
                break;
            }
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        let mut new_value = value;
        let mut candidate = w.clone();
        for _ in 0..60 {
            candidate = w.axpy(alpha, &dir)?;
            new_value = f.eval(&candidate)?;
            check_finite(new_value, iterations, "functional value")?;
            let wanted = opts.sufficient_decrease * alpha * slope;
            if new_value <= value + wanted
                || (wanted.abs() <= noise_f && new_value <= value + noise_f)
            {
                accepted = true;
                break;
            }
            alpha *= opts.backtrack_factor;
        }
        if !accepted {
            // the direction is numerically exhausted
            break;
        }
        let new_grad = f.gradient(&candidate)?;
        let s = candidate.axpy(-1.0, w)?;
        let y = new_grad.axpy(-1.0, &grad)?;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.dot(&s).sqrt() * y.dot(&y).sqrt() {
            let py = precond.apply(&y, f);
            let ypy = y.dot(&py);
            if ypy > 0.0 {
                gamma = sy / ypy;
            }
            pairs.push((s, y, 1.0 / sy));
            if pairs.len() > opts.memory {
                pairs.remove(0);
            }
        }
        *w = candidate;
        value = new_value;
        grad = new_grad;
        sup = precond_sup_norm(&grad, f);
        check_finite(sup, iterations, "gradient norm")?;

        // stall detection: no meaningful progress on the stationarity
        // measure for a while means the iteration is wandering at the
        // floating-point floor
        match &mut best {
            Some((b, field)) if sup < 0.98 * *b => {
                *b = sup;
                *field = w.clone();
                stall = 0;
            }
            Some(_) => stall += 1,
            None => best = Some((sup, w.clone())),
        }
        if stall >= 30 {
            if resets == 0 {
                pairs.clear();
                gamma = 1.0;
                resets = 1;
                stall = 0;
            } else {
                break;
            }
        }
    }
    if let Some((b, field)) = best {
        if b < sup {
            *w = field;
            sup = b;
        }
    }
    Ok((iterations, sup))
}

/// Strictly decreasing schedule of `eps` values for the continuation study.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct SweepPlan {
    pub epsilons: Vec<f64>,
    pub warm_start: bool,
}

impl SweepPlan {
    pub fn new(epsilons: Vec<f64>, warm_start: bool) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(WideError::InvalidParameter(
                "eps schedule must be nonempty".into(),
            ));
        }
        if epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(WideError::InvalidParameter(
                "eps values must be positive".into(),
            ));
        }
        if epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(WideError::InvalidParameter(
                "eps schedule must be strictly decreasing".into(),
            ));
        }
        Ok(Self {
            epsilons,
            warm_start,
        })
    }
}

/// One entry of a sweep; failed entries carry the error text and the sweep
/// continues past them.
#[derive(Debug)]
pub struct SweepEntry {
    pub eps: f64,
    pub minimizer: Option<SpaceTimeField>,
    pub stats: Option<SolveStats>,
    pub error: Option<String>,
}

impl SweepEntry {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Solve the schedule in order, warm-starting each entry from the previous
/// minimizer when requested. Non-convergence marks the entry failed.
pub fn sweep(plan: &SweepPlan, problem: &ProblemSpec) -> Result<Vec<SweepEntry>> {
    let constraints = problem.constraints()?;
    let mut entries = Vec::with_capacity(plan.epsilons.len());
    let mut previous: Option<SpaceTimeField> = None;
    for &eps in &plan.epsilons {
        let outcome = problem.functional(eps).and_then(|f| {
            let init = if plan.warm_start {
                previous.as_ref()
            } else {
                None
            };
            let (w, stats) = minimize(&f, &constraints, init, &problem.options)?;
            if !stats.converged {
                return Err(WideError::NotConverged(format!(
                    "eps = {eps}: gradient norm {:.3e} after {} iterations",
                    stats.grad_sup_norm, stats.iterations
                )));
            }
            Ok((w, stats))
        });
        match outcome {
            Ok((w, stats)) => {
                if plan.warm_start {
                    previous = Some(w.clone());
                }
                entries.push(SweepEntry {
                    eps,
                    minimizer: Some(w),
                    stats: Some(stats),
                    error: None,
                });
            }
            Err(e) => entries.push(SweepEntry {
                eps,
                minimizer: None,
                stats: None,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{eval_energy, DissipationSpec};
    use crate::grid::SpatialField;
    use crate::presets::preset;
    use crate::testsupport::SplitMix64;
    use crate::wide::TimeGrid;
    use std::f64::consts::PI;

    fn tau() -> f64 {
        2.0 * PI
    }

    fn wave_instance(
        eps: f64,
        steps: usize,
    ) -> (WeightedFunctional, ConstraintSet, Arc<SpatialGrid>) {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 64).unwrap());
        let time = TimeGrid::new(1.0, steps).unwrap();
        let p = preset("wave").unwrap();
        let f = WeightedFunctional::new(eps, p.energy, p.dissipation, time).unwrap();
        let w0 = SpatialField::from_fn(grid.clone(), |x| x.sin());
        let w1 = SpatialField::zeros(grid.clone());
        let c = ConstraintSet::new(w0, w1).unwrap();
        (f, c, grid)
    }

    #[test]
    fn banded_factorization_solves_reference_system() {
        // compare against dense Gaussian elimination on a seeded SPD
        // pentadiagonal matrix
        let n = 12;
        let mut rng = SplitMix64::new(17);
        let mut diag = vec![0.0; n];
        let mut sub1 = vec![0.0; n];
        let mut sub2 = vec![0.0; n];
        for i in 0..n {
            sub1[i] = rng.uniform(-1.0, 1.0);
            sub2[i] = rng.uniform(-0.5, 0.5);
        }
        for i in 0..n {
            diag[i] = 4.0 + rng.uniform(0.0, 1.0);
        }
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = diag[i];
            if i + 1 < n {
                dense[i + 1][i] = sub1[i];
                dense[i][i + 1] = sub1[i];
            }
            if i + 2 < n {
                dense[i + 2][i] = sub2[i];
                dense[i][i + 2] = sub2[i];
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        // dense solve
        let mut a = dense.clone();
        let mut x = b.clone();
        for col in 0..n {
            let piv = a[col][col];
            for row in col + 1..n {
                let m = a[row][col] / piv;
                for k in col..n {
                    a[row][k] -= m * a[col][k];
                }
                x[row] -= m * x[col];
            }
        }
        for row in (0..n).rev() {
            for k in row + 1..n {
                x[row] -= a[row][k] * x[k];
            }
            x[row] /= a[row][row];
        }
        let ldl = BandedLdl::factor(&diag, &sub1, &sub2).unwrap();
        let mut y = b;
        ldl.solve_in_place(&mut y);
        for i in 0..n {
            assert!(
                (x[i] - y[i]).abs() <= 1e-10,
                "entry {i}: {} vs {}",
                x[i],
                y[i]
            );
        }
    }

    #[test]
    fn minimizer_beats_the_competitor() {
        let (f, c, _) = wave_instance(0.2, 200);
        let opts = SolveOptions::default();
        let (w, stats) = minimize(&f, &c, None, &opts).unwrap();
        assert!(stats.converged, "gradient norm {:.3e}", stats.grad_sup_norm);
        let psi = c.competitor(f.time());
        let f_psi = f.eval(&psi).unwrap();
        assert!(
            stats.value <= f_psi + 1e-10 * (1.0 + f_psi.abs()),
            "minimizer {} vs competitor {}",
            stats.value,
            f_psi
        );
        assert!(c.is_satisfied(&w));
    }

    #[test]
    fn quadratic_and_nonlinear_paths_agree() {
        let (f, c, _) = wave_instance(0.2, 100);
        let mut opts = SolveOptions {
            grad_tolerance: 1e-9,
            ..Default::default()
        };
        opts.path = SolverPath::Quadratic;
        let (wq, sq) = minimize(&f, &c, None, &opts).unwrap();
        opts.path = SolverPath::Nonlinear;
        let (wn, sn) = minimize(&f, &c, None, &opts).unwrap();
        assert!(sq.converged && sn.converged);
        let gap = wq.axpy(-1.0, &wn).unwrap().sup_norm();
        assert!(gap <= 1e-6, "paths differ by {gap:.3e}");
    }

    #[test]
    fn preconditioned_gradient_small_at_minimizer() {
        let (f, c, _) = wave_instance(0.2, 100);
        let opts = SolveOptions {
            grad_tolerance: 1e-10,
            ..Default::default()
        };
        let (w, stats) = minimize(&f, &c, None, &opts).unwrap();
        assert!(stats.converged);
        // the first-order optimality residual sits at the floating-point
        // floor of the stiff optimality system
        let sup = precondition(&f.gradient(&w).unwrap(), &f).sup_norm();
        let bound = stats.stationarity_floor.max(1e-8);
        assert!(
            sup <= bound,
            "preconditioned gradient {sup:.3e} vs {bound:.3e}"
        );
    }

    #[test]
    fn sine_gordon_reaches_a_stationary_point() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 32).unwrap());
        let time = TimeGrid::new(1.0, 60).unwrap();
        let p = preset("sine-gordon").unwrap();
        let f = WeightedFunctional::new(0.15, p.energy, p.dissipation, time).unwrap();
        let w0 = SpatialField::from_fn(grid.clone(), |x| x.sin());
        let w1 = SpatialField::zeros(grid.clone());
        let c = ConstraintSet::new(w0, w1).unwrap();
        let (_, stats) = minimize(&f, &c, None, &SolveOptions::default()).unwrap();
        assert!(stats.converged, "gradient norm {:.3e}", stats.grad_sup_norm);
        assert_eq!(stats.path, "lbfgs");
    }

    #[test]
    fn dirichlet_quadratic_instance_converges() {
        let grid = Arc::new(SpatialGrid::dirichlet(1.0, 24).unwrap());
        let time = TimeGrid::new(0.5, 40).unwrap();
        let p = preset("wave").unwrap();
        let f = WeightedFunctional::new(0.1, p.energy, p.dissipation, time).unwrap();
        let w0 = SpatialField::from_fn(grid.clone(), |x| (PI * x).sin());
        let w1 = SpatialField::zeros(grid.clone());
        let c = ConstraintSet::new(w0, w1).unwrap();
        let opts = SolveOptions {
            max_iterations: 50_000,
            ..Default::default()
        };
        let (w, stats) = minimize(&f, &c, None, &opts).unwrap();
        assert!(stats.converged, "gradient norm {:.3e}", stats.grad_sup_norm);
        let psi = c.competitor(f.time());
        assert!(stats.value <= f.eval(&psi).unwrap() + 1e-10);
        assert!(c.is_satisfied(&w));
    }

    #[test]
    fn determinism_bitwise_across_runs() {
        let (f, c, _) = wave_instance(0.25, 80);
        let run = || {
            let (w, stats) = minimize(&f, &c, None, &SolveOptions::default()).unwrap();
            (w, stats.value)
        };
        let (w1, v1) = run();
        let (w2, v2) = run();
        assert_eq!(v1.to_bits(), v2.to_bits());
        assert_eq!(w1.values(), w2.values());
    }

    #[test]
    fn level_bound_on_the_rescaled_value() {
        // J = F/eps <= G(w0) + 10 eps (1 + G(w0)) for zero initial velocity
        for eps in [0.4, 0.2, 0.1] {
            let (f, c, _) = wave_instance(eps, 100);
            let (_, stats) = minimize(&f, &c, None, &SolveOptions::default()).unwrap();
            let g0 = eval_energy(f.energy(), c.w0()).unwrap();
            let bound = g0 + 10.0 * eps * (1.0 + g0);
            assert!(
                stats.rescaled_value <= bound,
                "eps={eps}: J = {} exceeds {bound}",
                stats.rescaled_value
            );
        }
    }

    #[test]
    fn sweep_single_entry_matches_minimize() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 32).unwrap());
        let problem = ProblemSpec::from_preset(
            "wave",
            grid.clone(),
            TimeGrid::new(1.0, 80).unwrap(),
            SpatialField::from_fn(grid.clone(), |x| x.sin()),
            SpatialField::zeros(grid.clone()),
            vec![0.2],
            SolveOptions::default(),
        )
        .unwrap();
        let plan = SweepPlan::new(vec![0.2], true).unwrap();
        let entries = sweep(&plan, &problem).unwrap();
        assert_eq!(entries.len(), 1);
        assert!(!entries[0].failed());
        let f = problem.functional(0.2).unwrap();
        let c = problem.constraints().unwrap();
        let (w, _) = minimize(&f, &c, None, &problem.options).unwrap();
        assert_eq!(entries[0].minimizer.as_ref().unwrap().values(), w.values());
    }

    #[test]
    fn consecutive_sweep_minimizers_form_a_cauchy_like_sequence() {
        // space-time distance between consecutive minimizers decreases
        // along the geometric eps schedule, the numerical proxy for
        // convergence of the family as eps -> 0
        let grid = Arc::new(SpatialGrid::periodic(tau(), 64).unwrap());
        let problem = ProblemSpec::from_preset(
            "wave",
            grid.clone(),
            TimeGrid::new(1.0, 200).unwrap(),
            SpatialField::from_fn(grid.clone(), |x| x.sin()),
            SpatialField::zeros(grid.clone()),
            vec![0.4, 0.2, 0.1, 0.05],
            SolveOptions::default(),
        )
        .unwrap();
        let plan = SweepPlan::new(vec![0.4, 0.2, 0.1, 0.05], true).unwrap();
        let entries = sweep(&plan, &problem).unwrap();
        assert!(entries.iter().all(|e| !e.failed()));
        let window = 0.75;
        let h = grid.spacing();
        let dt = problem.time.dt();
        let distance = |a: &SpaceTimeField, b: &SpaceTimeField| -> f64 {
            let mut acc = 0.0;
            for j in 0..a.time().layers() {
                if a.time().time(j) > window {
                    break;
                }
                let sq: f64 = a
                    .layer(j)
                    .iter()
                    .zip(b.layer(j))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                acc += dt * h * sq;
            }
            acc.sqrt()
        };
        let mut gaps = Vec::new();
        for pair in entries.windows(2) {
            gaps.push(distance(
                pair[0].minimizer.as_ref().unwrap(),
                pair[1].minimizer.as_ref().unwrap(),
            ));
        }
        assert!(
            gaps.windows(2).all(|g| g[1] < g[0]),
            "consecutive distances not decreasing: {gaps:?}"
        );
    }

    #[test]
    fn sweep_continues_past_failed_entries() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 16).unwrap());
        let mut options = SolveOptions::default();
        options.max_iterations = 1;
        options.grad_tolerance = 1e-14;
        options.path = SolverPath::Nonlinear;
        let problem = ProblemSpec::from_preset(
            "nlw(4)",
            grid.clone(),
            TimeGrid::new(1.0, 40).unwrap(),
            SpatialField::from_fn(grid.clone(), |x| x.sin()),
            SpatialField::zeros(grid.clone()),
            vec![0.4, 0.2],
            options,
        )
        .unwrap();
        let plan = SweepPlan::new(vec![0.4, 0.2], false).unwrap();
        let entries = sweep(&plan, &problem).unwrap();
        assert_eq!(entries.len(), 2);
        assert!(entries.iter().all(|e| e.failed()));
        assert!(entries[0]
            .error
            .as_ref()
            .unwrap()
            .contains("did not converge"));
    }

    #[test]
    fn warm_start_not_slower_than_cold() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 32).unwrap());
        let time = TimeGrid::new(1.0, 100).unwrap();
        let p = preset("nlw(4)").unwrap();
        let w0 = SpatialField::from_fn(grid.clone(), |x| x.sin());
        let w1 = SpatialField::zeros(grid.clone());
        let c = ConstraintSet::new(w0, w1).unwrap();
        let opts = SolveOptions::default();

        let coarse =
            WeightedFunctional::new(0.1, p.energy.clone(), p.dissipation.clone(), time.clone())
                .unwrap();
        let (w_coarse, _) = minimize(&coarse, &c, None, &opts).unwrap();

        let fine = WeightedFunctional::new(0.05, p.energy, p.dissipation, time).unwrap();
        let (_, cold) = minimize(&fine, &c, None, &opts).unwrap();
        let (_, warm) = minimize(&fine, &c, Some(&w_coarse), &opts).unwrap();
        assert!(cold.converged && warm.converged);
        let budget = (1.2 * cold.iterations as f64).ceil() as usize;
        assert!(
            warm.iterations <= budget,
            "warm {} vs cold {}",
            warm.iterations,
            cold.iterations
        );
    }

    #[test]
    fn invalid_schedules_rejected() {
        assert!(SweepPlan::new(vec![], true).is_err());
        assert!(SweepPlan::new(vec![0.1, 0.2], true).is_err());
        assert!(SweepPlan::new(vec![0.2, -0.1], true).is_err());
    }
}
