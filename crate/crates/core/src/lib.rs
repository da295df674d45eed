//! Variational space-time solver for defocusing hyperbolic Cauchy problems.
//!
//! Approximate solutions of `w'' = -grad G(w) - kappa grad D(w')` with
//! prescribed `w(0)` and `w'(0)` are obtained by globally minimizing the
//! exponentially weighted inertia-dissipation-energy functional
//!
//! ```text
//! F_eps(w) = eps^2/2 ∬ e^{-t/eps} |w''|^2 dx dt
//!          + ∫ e^{-t/eps} [ G(w(t)) + kappa eps D(w'(t)) ] dt
//! ```
//!
//! over space-time fields, with the initial data acting as boundary
//! conditions on the first two layers. As `eps` decreases, the minimizers
//! approach the hyperbolic evolution; the [`diagnostics`] module verifies
//! the supporting estimates (energy inequalities, approximate-energy
//! monotonicity, minimality level bounds, a priori constants) numerically
//! against leapfrog integration and closed-form mode solutions.
//!
//! Module map:
//! - [`grid`]: 1D periodic/Dirichlet grids, stencil and spectral operators;
//! - [`energy`]: the catalog of energy and dissipation functionals;
//! - [`presets`]: named equations built from the catalog;
//! - [`wide`]: the discrete weighted functional, gradient and residuals;
//! - [`optimize`]: conjugate-gradient and quasi-Newton minimization with
//!   eps-continuation sweeps;
//! - [`reference`]: leapfrog and closed-form oracles;
//! - [`diagnostics`]: estimate checks and trajectory comparison.
//!
//! Solving the linear wave equation with single-mode data and checking
//! the minimizer against the closed-form solution:
//!
//! ```
//! use std::sync::Arc;
//! use wide_core::grid::{SpatialField, SpatialGrid};
//! use wide_core::optimize::{minimize, SolveOptions};
//! use wide_core::presets::preset;
//! use wide_core::wide::{ConstraintSet, TimeGrid, WeightedFunctional};
//!
//! let grid = Arc::new(SpatialGrid::periodic(2.0 * std::f64::consts::PI, 32)?);
//! let time = TimeGrid::new(1.0, 100)?;
//! let p = preset("wave")?;
//! let functional = WeightedFunctional::new(0.1, p.energy, p.dissipation, time.clone())?;
//! let data = ConstraintSet::new(
//!     SpatialField::from_fn(grid.clone(), |x| x.sin()),
//!     SpatialField::zeros(grid.clone()),
//! )?;
//!
//! let (w, stats) = minimize(&functional, &data, None, &SolveOptions::default())?;
//! assert!(stats.converged);
//!
//! // at t = 0.5 the minimizer tracks sin(x) cos(t) up to O(eps)
//! let layer = w.layer_field(50);
//! let exact = SpatialField::from_fn(grid, |x| x.sin() * 0.5f64.cos());
//! assert!(layer.axpy(-1.0, &exact)?.sup_norm() < 0.1);
//! # Ok::<(), wide_core::WideError>(())
//! ```

pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod gradcheck;
pub mod grid;
pub mod optimize;
pub mod presets;
pub mod problem;
pub mod reference;
pub mod testsupport;
pub mod wide;

pub use error::{Result, WideError};
