//! The discrete weighted space-time functional and its first-order
//! machinery: evaluation, exact gradient, initial-data constraints, the
//! fourth-order Euler-Lagrange residual and the layer preconditioner.
//!
//! With layers `w_j` at times `t_j = j*dt`, weights `mu_j = exp(-t_j/eps)`
//! and the central stencils
//! `d2w_j = (w_{j+1} - 2 w_j + w_{j-1})/dt^2`,
//! `dw_j = (w_{j+1} - w_{j-1})/(2 dt)`, the functional is
//!
//! ```text
//! F = sum_{j=1}^{J-1} dt mu_j [ eps^2/2 |d2w_j|^2 + G(w_j) + kappa eps D(dw_j) ]
//!     + dt mu_0 G(w_0)
//! ```
//!
//! a left-endpoint-in-weight rectangle rule over the truncated horizon
//! `[0, T]`; layer `J` carries no one-sided stencil terms. The gradient
//! below is the exact derivative of this sum (in the same `per-h`
//! convention as the energy module), so finite-difference consistency
//! holds by construction.

use std::sync::Arc;

use crate::energy::{
    eval_dissipation, eval_energy, grad_dissipation, grad_energy, DissipationSpec, EnergySpec,
};
use crate::error::{Result, WideError};
use crate::grid::{l2_inner, SpatialField, SpatialGrid};

/// Hard ceiling on `T/eps`: beyond this the weight span `exp(-T/eps)`
/// underflows the double-precision optimality system.
pub const MAX_HORIZON_OVER_EPS: f64 = 40.0;

/// Uniform time grid on `[0, T]` with `J+1` layers.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(WideError::InvalidParameter(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if steps < 4 {
            return Err(WideError::InvalidParameter(format!(
                "time grid needs at least 4 steps, got {steps}"
            )));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps `J`; the grid stores `J+1` layers.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn layers(&self) -> usize {
        self.steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }
}

/// Nodal values over the full space-time grid, the minimization unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    time: TimeGrid,
    grid: Arc<SpatialGrid>,
    /// Flat layout `values[j * n + i]`.
    values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn zeros(time: TimeGrid, grid: Arc<SpatialGrid>) -> Self {
        let len = time.layers() * grid.nodes();
        Self {
            time,
            grid,
            values: vec![0.0; len],
        }
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn nodes(&self) -> usize {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn layer(&self, j: usize) -> &[f64] {
        let n = self.grid.nodes();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn layer_mut(&mut self, j: usize) -> &mut [f64] {
        let n = self.grid.nodes();
        &mut self.values[j * n..(j + 1) * n]
    }

    pub fn layer_field(&self, j: usize) -> SpatialField {
        SpatialField::new(self.grid.clone(), self.layer(j).to_vec())
            .expect("layer length matches grid by construction")
    }

    pub fn set_layer(&mut self, j: usize, f: &SpatialField) {
        self.layer_mut(j).copy_from_slice(f.values());
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn axpy(&self, alpha: f64, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(SpaceTimeField {
            time: self.time.clone(),
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn scaled(&self, alpha: f64) -> SpaceTimeField {
        SpaceTimeField {
            time: self.time.clone(),
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Plain Euclidean dot product over all entries (used by the solver).
    pub fn dot(&self, other: &SpaceTimeField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn check_compatible(&self, other: &SpaceTimeField) -> Result<()> {
        if self.time != other.time || self.grid.as_ref() != other.grid.as_ref() {
            return Err(WideError::GridMismatch(
                "space-time fields live on different grids".into(),
            ));
        }
        Ok(())
    }
}

/// Initial data `(w0, w1)` and its encoding into the first two layers:
/// `layer 0 = w0`, `layer 1 = w0 + dt * w1`, mirroring the admissible
/// competitor `w0 + t*w1`.
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    w0: SpatialField,
    w1: SpatialField,
}

impl ConstraintSet {
    pub fn new(w0: SpatialField, w1: SpatialField) -> Result<Self> {
        if w0.grid().as_ref() != w1.grid().as_ref() {
            return Err(WideError::GridMismatch(
                "initial position and velocity live on different grids".into(),
            ));
        }
        Ok(Self { w0, w1 })
    }

    pub fn w0(&self) -> &SpatialField {
        &self.w0
    }

    pub fn w1(&self) -> &SpatialField {
        &self.w1
    }

    /// Overwrite layers 0 and 1 of `w` with the encoded data. Idempotent.
    pub fn apply(&self, w: &mut SpaceTimeField) -> Result<()> {
        if w.grid().as_ref() != self.w0.grid().as_ref() {
            return Err(WideError::GridMismatch(
                "constraints and field live on different grids".into(),
            ));
        }
        let dt = w.time().dt();
        let encoded = self.w0.axpy(dt, &self.w1)?;
        w.set_layer(0, &self.w0);
        w.set_layer(1, &encoded);
        Ok(())
    }

    pub fn is_satisfied(&self, w: &SpaceTimeField) -> bool {
        let dt = w.time().dt();
        let first = self.w0.values();
        let second: Vec<f64> = self
            .w0
            .values()
            .iter()
            .zip(self.w1.values())
            .map(|(a, b)| a + dt * b)
            .collect();
        w.layer(0) == first && w.layer(1) == second.as_slice()
    }

    /// The admissible competitor `psi_j = w0 + t_j * w1`, also the cold
    /// start of the solver.
    pub fn competitor(&self, time: &TimeGrid) -> SpaceTimeField {
        let mut w = SpaceTimeField::zeros(time.clone(), self.w0.grid().clone());
        for j in 0..time.layers() {
            let t = time.time(j);
            let layer = self.w0.axpy(t, &self.w1).expect("same grid");
            w.set_layer(j, &layer);
        }
        w
    }

    /// Zero out layers 0 and 1 (gradient mask).
    pub fn mask(&self, g: &mut SpaceTimeField) {
        g.layer_mut(0).fill(0.0);
        g.layer_mut(1).fill(0.0);
    }
}

/// The assembled discrete functional: weights, damping switch and term
/// specs. Immutable after construction.
#[derive(Clone, Debug)]
pub struct WeightedFunctional {
    eps: f64,
    kappa: bool,
    energy: EnergySpec,
    dissipation: DissipationSpec,
    time: TimeGrid,
    weights: Vec<f64>,
}

impl WeightedFunctional {
    pub fn new(
        eps: f64,
        energy: EnergySpec,
        dissipation: DissipationSpec,
        time: TimeGrid,
    ) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(WideError::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        let t_over_eps = time.horizon() / eps;
        if t_over_eps > MAX_HORIZON_OVER_EPS {
            return Err(WideError::ConditioningGuard {
                t_over_eps,
                limit: MAX_HORIZON_OVER_EPS,
            });
        }
        let weights = (0..time.layers())
            .map(|j| (-time.time(j) / eps).exp())
            .collect();
        Ok(Self {
            eps,
            kappa: !dissipation.is_empty(),
            energy,
            dissipation,
            time,
            weights,
        })
    }

    /// Testing constructor with `mu_j = 1` (the eps -> infinity limit of the
    /// weights, with all other machinery unchanged).
    pub fn with_uniform_weights(
        eps: f64,
        energy: EnergySpec,
        dissipation: DissipationSpec,
        time: TimeGrid,
    ) -> Result<Self> {
        let mut f = Self::new(eps, energy, dissipation, time)?;
        f.weights = vec![1.0; f.time.layers()];
        Ok(f)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn kappa(&self) -> bool {
        self.kappa
    }

    pub fn energy(&self) -> &EnergySpec {
        &self.energy
    }

    pub fn dissipation(&self) -> &DissipationSpec {
        &self.dissipation
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    /// Layer weights `mu_j`, strictly decreasing with `mu_0 = 1`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_quadratic(&self) -> bool {
        self.energy.is_quadratic()
    }

    fn stencils(&self, w: &SpaceTimeField, j: usize) -> (SpatialField, SpatialField) {
        let dt = self.time.dt();
        let n = w.nodes();
        let prev = w.layer(j - 1);
        let here = w.layer(j);
        let next = w.layer(j + 1);
        let mut d2 = vec![0.0; n];
        let mut d1 = vec![0.0; n];
        for i in 0..n {
            d2[i] = (next[i] - 2.0 * here[i] + prev[i]) / (dt * dt);
            d1[i] = (next[i] - prev[i]) / (2.0 * dt);
        }
        let grid = w.grid().clone();
        (
            SpatialField::new(grid.clone(), d2).expect("stencil length"),
            SpatialField::new(grid, d1).expect("stencil length"),
        )
    }

    /// Value of the discrete functional. Finite and nonnegative on
    /// constraint-satisfying fields.
    pub fn eval(&self, w: &SpaceTimeField) -> Result<f64> {
        self.check_field(w)?;
        let dt = self.time.dt();
        let j_max = self.time.steps();
        let mut total = self.weights[0] * dt * eval_energy(&self.energy, &w.layer_field(0))?;
        for j in 1..j_max {
            let a = dt * self.weights[j];
            let (d2, d1) = self.stencils(w, j);
            let inertia = 0.5 * self.eps * self.eps * l2_inner(&d2, &d2)?;
            let potential = eval_energy(&self.energy, &w.layer_field(j))?;
            let mut layer = inertia + potential;
            if self.kappa {
                layer += self.eps * eval_dissipation(&self.dissipation, &d1)?;
            }
            total += a * layer;
        }
        Ok(total)
    }

    /// Rescaled value `J = F/eps`, the level checked against `G(w0)`.
    pub fn rescaled_value(&self, w: &SpaceTimeField) -> Result<f64> {
        Ok(self.eval(w)? / self.eps)
    }

    /// Exact gradient of [`Self::eval`] in the `per-h` convention, with the
    /// constrained layers 0 and 1 forced to zero.
    pub fn gradient(&self, w: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check_field(w)?;
        let dt = self.time.dt();
        let dt2 = dt * dt;
        let j_max = self.time.steps();
        let n = w.nodes();
        let mut g = SpaceTimeField::zeros(self.time.clone(), w.grid().clone());
        for j in 1..j_max {
            let a = dt * self.weights[j];
            let (d2, d1) = self.stencils(w, j);
            // inertia: a * eps^2 * d2 scattered through the second-difference stencil
            let coeff = a * self.eps * self.eps / dt2;
            {
                let d2v = d2.values();
                let target = g.layer_mut(j - 1);
                for i in 0..n {
                    target[i] += coeff * d2v[i];
                }
                let target = g.layer_mut(j);
                for i in 0..n {
                    target[i] -= 2.0 * coeff * d2v[i];
                }
                let target = g.layer_mut(j + 1);
                for i in 0..n {
                    target[i] += coeff * d2v[i];
                }
            }
            // potential
            let ge = grad_energy(&self.energy, &w.layer_field(j))?;
            {
                let target = g.layer_mut(j);
                for (t, s) in target.iter_mut().zip(ge.values()) {
                    *t += a * s;
                }
            }
            // dissipation through the centered velocity stencil
            if self.kappa {
                let gd = grad_dissipation(&self.dissipation, &d1)?;
                let c = a * self.eps / (2.0 * dt);
                let target = g.layer_mut(j + 1);
                for (t, s) in target.iter_mut().zip(gd.values()) {
                    *t += c * s;
                }
                let target = g.layer_mut(j - 1);
                for (t, s) in target.iter_mut().zip(gd.values()) {
                    *t -= c * s;
                }
            }
        }
        g.layer_mut(0).fill(0.0);
        g.layer_mut(1).fill(0.0);
        Ok(g)
    }

    /// Directional derivative by central finite differences, the oracle for
    /// gradient checks. `eta` should vanish on layers 0 and 1.
    pub fn directional_fd(
        &self,
        w: &SpaceTimeField,
        eta: &SpaceTimeField,
        step: f64,
    ) -> Result<f64> {
        let plus = self.eval(&w.axpy(step, eta)?)?;
        let minus = self.eval(&w.axpy(-step, eta)?)?;
        Ok((plus - minus) / (2.0 * step))
    }

    /// Relative gap between the gradient pairing and the finite difference.
    pub fn grad_fd_error(
        &self,
        w: &SpaceTimeField,
        eta: &SpaceTimeField,
        step: f64,
    ) -> Result<f64> {
        let g = self.gradient(w)?;
        let h = w.grid().spacing();
        let ip = h * g.dot(eta);
        let fd = self.directional_fd(w, eta, step)?;
        Ok(crate::energy::relative_gap(ip, fd))
    }

    fn check_field(&self, w: &SpaceTimeField) -> Result<()> {
        if w.time() != &self.time {
            return Err(WideError::GridMismatch(
                "field time grid does not match the functional".into(),
            ));
        }
        self.energy.check_grid(w.grid())?;
        Ok(())
    }
}

/// Divide layer `j` of a gradient by `dt * mu_j`, leaving the constrained
/// layers zero. This uniformizes the optimality system across layers, whose
/// raw rows are scaled by the quadrature weight.
pub fn precondition(g: &SpaceTimeField, f: &WeightedFunctional) -> SpaceTimeField {
    let dt = f.time().dt();
    let mut out = g.clone();
    for j in 2..f.time().layers() {
        let scale = 1.0 / (dt * f.weights()[j]);
        for v in out.layer_mut(j) {
            *v *= scale;
        }
    }
    out.layer_mut(0).fill(0.0);
    out.layer_mut(1).fill(0.0);
    out
}

/// Per-layer norms of the fourth-order Euler-Lagrange operator
/// `eps^2 w'''' - 2 eps w''' + w'' + grad G(w) + kappa grad D(w')
///  - kappa eps (grad D(w'))'`
/// under central differences, on the interior layers that admit the
/// five-point stencils.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ElResidualReport {
    /// First interior layer index covered (always 2).
    pub first_layer: usize,
    /// Times `t_j` of the covered layers.
    pub times: Vec<f64>,
    /// `L^2` norm per layer of the full operator, damping correction
    /// included.
    pub full: Vec<f64>,
    /// Norm of the limit-equation part `w'' + grad G + kappa grad D(w')`.
    pub wave_part: Vec<f64>,
    /// Norm of the `eps^2 w''''` term alone.
    pub fourth_order: Vec<f64>,
    /// Norm of the `-2 eps w'''` term alone.
    pub third_order: Vec<f64>,
    /// Norm of the `-kappa eps (grad D(w'))'` correction, reported
    /// separately because it vanishes as eps -> 0.
    pub damping_correction: Vec<f64>,
}

impl ElResidualReport {
    /// Max of the full residual over layers with `t_j <= t_rep`.
    pub fn max_in_window(&self, t_rep: f64, horizon: f64) -> Result<f64> {
        if t_rep > horizon + 1e-12 {
            return Err(WideError::Window(format!(
                "reporting window {t_rep} exceeds horizon {horizon}"
            )));
        }
        let mut worst = 0.0f64;
        for (t, r) in self.times.iter().zip(&self.full) {
            if *t <= t_rep {
                worst = worst.max(*r);
            }
        }
        Ok(worst)
    }
}

/// Evaluate the Euler-Lagrange residual of `w` for the functional `f`.
/// Requires at least 6 steps so that the five-point time stencils fit.
pub fn el_residual(f: &WeightedFunctional, w: &SpaceTimeField) -> Result<ElResidualReport> {
    let j_max = w.time().steps();
    if j_max < 6 {
        return Err(WideError::InvalidParameter(
            "Euler-Lagrange residual needs at least 6 time steps".into(),
        ));
    }
    let dt = w.time().dt();
    let n = w.nodes();
    let grid = w.grid().clone();
    let eps = f.eps();

    let mut report = ElResidualReport {
        first_layer: 2,
        times: Vec::new(),
        full: Vec::new(),
        wave_part: Vec::new(),
        fourth_order: Vec::new(),
        third_order: Vec::new(),
        damping_correction: Vec::new(),
    };

    let velocity = |j: usize| -> SpatialField {
        let prev = w.layer(j - 1);
        let next = w.layer(j + 1);
        let vals = (0..n).map(|i| (next[i] - prev[i]) / (2.0 * dt)).collect();
        SpatialField::new(grid.clone(), vals).expect("length")
    };

    for j in 2..=j_max - 2 {
        let wm2 = w.layer(j - 2);
        let wm1 = w.layer(j - 1);
        let w0 = w.layer(j);
        let wp1 = w.layer(j + 1);
        let wp2 = w.layer(j + 2);

        let mut fourth = vec![0.0; n];
        let mut third = vec![0.0; n];
        let mut second = vec![0.0; n];
        for i in 0..n {
            fourth[i] =
                (wm2[i] - 4.0 * wm1[i] + 6.0 * w0[i] - 4.0 * wp1[i] + wp2[i]) / (dt * dt * dt * dt);
            third[i] = (wp2[i] - 2.0 * wp1[i] + 2.0 * wm1[i] - wm2[i]) / (2.0 * dt * dt * dt);
            second[i] = (wp1[i] - 2.0 * w0[i] + wm1[i]) / (dt * dt);
        }

        let ge = grad_energy(f.energy(), &w.layer_field(j))?;
        let (gd, gd_rate) = if f.kappa() {
            let v = velocity(j);
            let gd = grad_dissipation(f.dissipation(), &v)?;
            // grad D is linear, so its time derivative is grad D applied to
            // the centered difference of the velocity
            let vp = velocity(j + 1);
            let vm = velocity(j - 1);
            let dv = vp.axpy(-1.0, &vm)?.scaled(1.0 / (2.0 * dt));
            let gd_rate = grad_dissipation(f.dissipation(), &dv)?;
            (gd, gd_rate)
        } else {
            (
                SpatialField::zeros(grid.clone()),
                SpatialField::zeros(grid.clone()),
            )
        };

        let mut full = vec![0.0; n];
        let mut wave = vec![0.0; n];
        let mut e2 = vec![0.0; n];
        let mut e1 = vec![0.0; n];
        let mut corr = vec![0.0; n];
        for i in 0..n {
            e2[i] = eps * eps * fourth[i];
            e1[i] = -2.0 * eps * third[i];
            wave[i] = second[i] + ge.values()[i] + gd.values()[i];
            corr[i] = -eps * gd_rate.values()[i];
            full[i] = e2[i] + e1[i] + wave[i] + corr[i];
        }
        let norm = |v: Vec<f64>| -> f64 {
            let field = SpatialField::new(grid.clone(), v).expect("length");
            crate::grid::l2_norm(&field)
        };
        report.times.push(w.time().time(j));
        report.full.push(norm(full));
        report.wave_part.push(norm(wave));
        report.fourth_order.push(norm(e2));
        report.third_order.push(norm(e1));
        report.damping_correction.push(norm(corr));
    }
    Ok(report)
}

/// Reporting window `[0, T - 5 eps]`: the retained weight past the window is
/// at most `exp(-5)`, keeping truncation-tail artifacts out of the checks.
pub fn reporting_window(horizon: f64, eps: f64) -> f64 {
    (horizon - 5.0 * eps).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyTerm;
    use crate::presets::preset;
    use crate::testsupport::SplitMix64;
    use std::f64::consts::PI;

    fn tau() -> f64 {
        2.0 * PI
    }

    fn wave_spec() -> EnergySpec {
        EnergySpec::new(vec![EnergyTerm::DerivPower {
            order: 1,
            exponent: 2.0,
            coeff: 1.0,
        }])
        .unwrap()
    }

    fn mode_data(grid: &Arc<SpatialGrid>) -> ConstraintSet {
        let w0 = SpatialField::from_fn(grid.clone(), |x| x.sin());
        let w1 = SpatialField::zeros(grid.clone());
        ConstraintSet::new(w0, w1).unwrap()
    }

    fn random_spacetime(
        time: &TimeGrid,
        grid: &Arc<SpatialGrid>,
        rng: &mut SplitMix64,
    ) -> SpaceTimeField {
        let mut w = SpaceTimeField::zeros(time.clone(), grid.clone());
        for v in w.values_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        w
    }

    /// Test direction vanishing on the constrained layers.
    fn random_direction(
        time: &TimeGrid,
        grid: &Arc<SpatialGrid>,
        rng: &mut SplitMix64,
    ) -> SpaceTimeField {
        let mut eta = random_spacetime(time, grid, rng);
        eta.layer_mut(0).fill(0.0);
        eta.layer_mut(1).fill(0.0);
        eta
    }

    #[test]
    fn constant_field_leaves_only_the_potential_term() {
        // w identically w0: the discrete value is the exact geometric sum
        // G(w0) * dt * sum mu_j, within 6% of the continuum integral
        // G(w0) * eps * (1 - exp(-T/eps)) at dt = eps/10 (the left-endpoint
        // rule overestimates a decaying weight by about dt/(2 eps)).
        let grid = Arc::new(SpatialGrid::periodic(tau(), 32).unwrap());
        let eps = 0.25;
        let horizon = 2.0;
        let steps = (horizon / (eps / 10.0)) as usize;
        let time = TimeGrid::new(horizon, steps).unwrap();
        let data = mode_data(&grid);
        let f = WeightedFunctional::new(eps, wave_spec(), DissipationSpec::empty(), time.clone())
            .unwrap();
        let mut w = SpaceTimeField::zeros(time.clone(), grid.clone());
        for j in 0..time.layers() {
            w.set_layer(j, data.w0());
        }
        let g0 = eval_energy(&wave_spec(), data.w0()).unwrap();
        let value = f.eval(&w).unwrap();

        let dt = time.dt();
        let geometric: f64 = (0..time.steps()).map(|j| dt * f.weights()[j]).sum();
        assert!((value - g0 * geometric).abs() <= 1e-12 * value.max(1.0));

        let continuum = g0 * eps * (1.0 - (-horizon / eps).exp());
        let rel = (value - continuum).abs() / continuum;
        assert!(rel <= 0.06, "quadrature error {rel:.4}");
    }

    #[test]
    fn competitor_with_zero_velocity_reaches_the_level_bound() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 32).unwrap());
        let eps = 0.25;
        let time = TimeGrid::new(2.0, 80).unwrap();
        let data = mode_data(&grid);
        let f = WeightedFunctional::new(eps, wave_spec(), DissipationSpec::empty(), time.clone())
            .unwrap();
        let psi = data.competitor(&time);
        let g0 = eval_energy(&wave_spec(), data.w0()).unwrap();
        let rescaled = f.rescaled_value(&psi).unwrap();
        let expected = g0 * (1.0 - (-time.horizon() / eps).exp());
        let rel = (rescaled - expected).abs() / expected;
        assert!(rel <= 0.06, "quadrature error {rel:.4}");
    }

    #[test]
    fn zero_data_gives_zero_value() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 16).unwrap());
        let time = TimeGrid::new(1.0, 20).unwrap();
        let f = WeightedFunctional::new(0.2, wave_spec(), DissipationSpec::empty(), time.clone())
            .unwrap();
        let w = SpaceTimeField::zeros(time, grid);
        assert_eq!(f.eval(&w).unwrap(), 0.0);
    }

    #[test]
    fn gradient_matches_directional_finite_differences() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 16).unwrap());
        let time = TimeGrid::new(1.0, 12).unwrap();
        let mut rng = SplitMix64::new(42);
        for name in [
            "wave",
            "sine-gordon",
            "telegraph-on-top-of(nlw(4))",
            "kirchhoff",
        ] {
            let p = preset(name).unwrap();
            let f = WeightedFunctional::new(0.3, p.energy, p.dissipation, time.clone()).unwrap();
            let w = random_spacetime(&time, &grid, &mut rng);
            for _ in 0..10 {
                let eta = random_direction(&time, &grid, &mut rng);
                let err = f.grad_fd_error(&w, &eta, 1e-5).unwrap();
                assert!(err <= 1e-6, "{name}: fd error {err:.3e}");
            }
        }
    }

    #[test]
    fn gradient_vanishes_on_constrained_layers() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 16).unwrap());
        let time = TimeGrid::new(1.0, 12).unwrap();
        let mut rng = SplitMix64::new(9);
        let f = WeightedFunctional::new(0.3, wave_spec(), DissipationSpec::empty(), time.clone())
            .unwrap();
        let w = random_spacetime(&time, &grid, &mut rng);
        let g = f.gradient(&w).unwrap();
        assert!(g.layer(0).iter().all(|v| *v == 0.0));
        assert!(g.layer(1).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gradient_is_affine_for_quadratic_specs() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 16).unwrap());
        let time = TimeGrid::new(1.0, 12).unwrap();
        let mut rng = SplitMix64::new(77);
        let f = WeightedFunctional::new(0.3, wave_spec(), DissipationSpec::empty(), time.clone())
            .unwrap();
        let w = random_spacetime(&time, &grid, &mut rng);
        let v = random_spacetime(&time, &grid, &mut rng);
        let zero = SpaceTimeField::zeros(time.clone(), grid.clone());
        let lhs = f.gradient(&w.axpy(1.0, &v).unwrap()).unwrap();
        let rhs = f
            .gradient(&w)
            .unwrap()
            .axpy(1.0, &f.gradient(&v).unwrap())
            .unwrap()
            .axpy(-1.0, &f.gradient(&zero).unwrap())
            .unwrap();
        let defect = lhs.axpy(-1.0, &rhs).unwrap().sup_norm();
        let scale = 1.0 + lhs.sup_norm();
        assert!(defect <= 1e-12 * scale, "defect {defect:.3e}");
    }

    #[test]
    fn preconditioner_uniform_weights_is_dt_scaling() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 8).unwrap());
        let time = TimeGrid::new(1.0, 10).unwrap();
        let mut rng = SplitMix64::new(3);
        let f = WeightedFunctional::with_uniform_weights(
            0.3,
            wave_spec(),
            DissipationSpec::empty(),
            time.clone(),
        )
        .unwrap();
        let mut g = random_spacetime(&time, &grid, &mut rng);
        g.layer_mut(0).fill(0.0);
        g.layer_mut(1).fill(0.0);
        let p = precondition(&g, &f);
        let expected = g.scaled(1.0 / time.dt());
        let defect = p.axpy(-1.0, &expected).unwrap().sup_norm();
        assert!(defect <= 1e-13 * expected.sup_norm().max(1.0));
    }

    #[test]
    fn preconditioner_is_diagonal_scaling() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 8).unwrap());
        let time = TimeGrid::new(1.0, 10).unwrap();
        let mut rng = SplitMix64::new(4);
        let f = WeightedFunctional::new(0.2, wave_spec(), DissipationSpec::empty(), time.clone())
            .unwrap();
        let mut g = random_spacetime(&time, &grid, &mut rng);
        g.layer_mut(0).fill(0.0);
        g.layer_mut(1).fill(0.0);
        let twice = precondition(&precondition(&g, &f), &f);
        let dt = time.dt();
        // applying the preconditioner twice multiplies layer j by (dt mu_j)^-2
        for j in 2..time.layers() {
            let scale = (dt * f.weights()[j]).powi(-2);
            for (a, b) in twice.layer(j).iter().zip(g.layer(j)) {
                assert!((a - b * scale).abs() <= 1e-13 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn conditioning_guard_rejects_extreme_horizons() {
        let time = TimeGrid::new(10.0, 100).unwrap();
        let r = WeightedFunctional::new(0.1, wave_spec(), DissipationSpec::empty(), time);
        assert!(matches!(r, Err(WideError::ConditioningGuard { .. })));
    }

    #[test]
    fn el_residual_terms_scale_with_eps() {
        // insert the exact single-mode continuum solution and evaluate the
        // operator term by term: the eps^2 and eps parts scale quadratically
        // and linearly by direct computation.
        let grid = Arc::new(SpatialGrid::periodic(tau(), 32).unwrap());
        let time = TimeGrid::new(1.0, 50).unwrap();
        let mut w = SpaceTimeField::zeros(time.clone(), grid.clone());
        for j in 0..time.layers() {
            let t = time.time(j);
            let layer = SpatialField::from_fn(grid.clone(), |x| x.sin() * t.cos());
            w.set_layer(j, &layer);
        }
        let report = |eps: f64| {
            let f =
                WeightedFunctional::new(eps, wave_spec(), DissipationSpec::empty(), time.clone())
                    .unwrap();
            el_residual(&f, &w).unwrap()
        };
        let r1 = report(0.2);
        let r2 = report(0.1);
        let mid = r1.times.len() / 2;
        let ratio4 = r1.fourth_order[mid] / r2.fourth_order[mid];
        let ratio3 = r1.third_order[mid] / r2.third_order[mid];
        assert!((ratio4 - 4.0).abs() <= 1e-6, "eps^2 term ratio {ratio4}");
        assert!((ratio3 - 2.0).abs() <= 1e-6, "eps term ratio {ratio3}");
        // the wave part is eps-independent
        assert!((r1.wave_part[mid] - r2.wave_part[mid]).abs() <= 1e-12);
    }

    #[test]
    fn el_residual_of_minimizer_sits_at_the_discretization_floor() {
        // the floor is the residual of the limit operator w'' + grad G(w)
        // under the same stencils with the exact continuum solution
        // inserted; the minimizer's full fourth-order residual must stay
        // within a factor 10 of it
        use crate::optimize::{minimize, SolveOptions};
        let eps = 0.2;
        let grid = Arc::new(SpatialGrid::periodic(tau(), 64).unwrap());
        let time = TimeGrid::new(1.0, 100).unwrap(); // dt = eps/20
        let f = WeightedFunctional::new(eps, wave_spec(), DissipationSpec::empty(), time.clone())
            .unwrap();
        let data = mode_data(&grid);
        let (w, stats) = minimize(&f, &data, None, &SolveOptions::default()).unwrap();
        assert!(stats.converged);
        let report = el_residual(&f, &w).unwrap();
        let window = 0.75;
        let residual = report.max_in_window(window, 1.0).unwrap();

        let mut exact = SpaceTimeField::zeros(time.clone(), grid.clone());
        for j in 0..time.layers() {
            let t = time.time(j);
            exact.set_layer(
                j,
                &SpatialField::from_fn(grid.clone(), |x| x.sin() * t.cos()),
            );
        }
        let dt = time.dt();
        let n = grid.nodes();
        let mut floor = 0.0f64;
        for j in 1..time.steps() {
            if time.time(j) > window {
                break;
            }
            let ge = grad_energy(&wave_spec(), &exact.layer_field(j)).unwrap();
            let vals: Vec<f64> = (0..n)
                .map(|i| {
                    let second = (exact.layer(j + 1)[i] - 2.0 * exact.layer(j)[i]
                        + exact.layer(j - 1)[i])
                        / (dt * dt);
                    second + ge.values()[i]
                })
                .collect();
            let r = SpatialField::new(grid.clone(), vals).unwrap();
            floor = floor.max(crate::grid::l2_norm(&r));
        }
        assert!(
            residual <= 10.0 * floor,
            "residual {residual:.3e} vs 10 x floor {:.3e}",
            10.0 * floor
        );
    }

    #[test]
    fn el_residual_zero_field_is_zero() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 16).unwrap());
        let time = TimeGrid::new(1.0, 20).unwrap();
        let f = WeightedFunctional::new(0.2, wave_spec(), DissipationSpec::empty(), time.clone())
            .unwrap();
        let w = SpaceTimeField::zeros(time, grid);
        let r = el_residual(&f, &w).unwrap();
        assert!(r.full.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn el_residual_window_beyond_horizon_rejected() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 16).unwrap());
        let time = TimeGrid::new(1.0, 20).unwrap();
        let f = WeightedFunctional::new(0.2, wave_spec(), DissipationSpec::empty(), time.clone())
            .unwrap();
        let w = SpaceTimeField::zeros(time, grid);
        let r = el_residual(&f, &w).unwrap();
        assert!(r.max_in_window(2.0, 1.0).is_err());
    }

    #[test]
    fn constraints_apply_idempotently() {
        let grid = Arc::new(SpatialGrid::periodic(tau(), 16).unwrap());
        let time = TimeGrid::new(1.0, 10).unwrap();
        let w0 = SpatialField::from_fn(grid.clone(), |x| x.cos());
        let w1 = SpatialField::from_fn(grid.clone(), |x| 0.5 * x.sin());
        let data = ConstraintSet::new(w0, w1).unwrap();
        let mut w = SpaceTimeField::zeros(time, grid);
        data.apply(&mut w).unwrap();
        let snapshot = w.clone();
        data.apply(&mut w).unwrap();
        assert_eq!(w, snapshot);
        assert!(data.is_satisfied(&w));
    }

    #[test]
    fn scaling_identity_with_rescaled_functional() {
        // F_eps(w) = eps * J_eps(u) for u on the rescaled grid ds = dt/eps,
        // with J evaluated by an independent implementation of the rescaled
        // quadrature.
        let grid = Arc::new(SpatialGrid::periodic(tau(), 16).unwrap());
        let time = TimeGrid::new(1.0, 25).unwrap();
        let eps = 0.2;
        let p = preset("telegraph-on-top-of(nlw(4))").unwrap();
        let f = WeightedFunctional::new(eps, p.energy.clone(), p.dissipation.clone(), time.clone())
            .unwrap();
        let mut rng = SplitMix64::new(15);
        let w = random_spacetime(&time, &grid, &mut rng);
        let value = f.eval(&w).unwrap();

        // independent rescaled evaluation: u_j = w_j on s_j = t_j / eps
        let ds = time.dt() / eps;
        let j_max = time.steps();
        let mut j_val = ds * eval_energy(&p.energy, &w.layer_field(0)).unwrap();
        for j in 1..j_max {
            let s = j as f64 * ds;
            let weight = (-s).exp();
            let n = grid.nodes();
            let mut d2 = vec![0.0; n];
            let mut d1 = vec![0.0; n];
            for i in 0..n {
                d2[i] = (w.layer(j + 1)[i] - 2.0 * w.layer(j)[i] + w.layer(j - 1)[i]) / (ds * ds);
                d1[i] = (w.layer(j + 1)[i] - w.layer(j - 1)[i]) / (2.0 * ds);
            }
            let d2 = SpatialField::new(grid.clone(), d2).unwrap();
            let d1 = SpatialField::new(grid.clone(), d1).unwrap();
            let mut layer = l2_inner(&d2, &d2).unwrap() / (2.0 * eps * eps)
                + eval_energy(&p.energy, &w.layer_field(j)).unwrap();
            layer += eval_dissipation(&p.dissipation, &d1).unwrap() / eps;
            j_val += ds * weight * layer;
        }
        let rel = (value - eps * j_val).abs() / value.abs().max(1.0);
        assert!(rel <= 1e-12, "scaling identity defect {rel:.3e}");
    }
}
