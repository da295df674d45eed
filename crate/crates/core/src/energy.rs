//! Catalog of energy functionals `G` and quadratic dissipation functionals
//! `D`, with values and gradients, composed additively from a small set of
//! term types.
//!
//! Gradients follow the `L^2` convention: `grad` is the nodal partial
//! derivative of the discrete value divided by the mesh spacing, so that
//! `dG(v)[eta] = l2_inner(grad, eta)` holds exactly for the discrete sums.
//! This makes every gradient finite-difference consistent by construction.

use crate::error::{Result, WideError};
use crate::grid::{
    diff, diff_transpose, l2_inner, sobolev_seminorm_sq, SpatialField, SpatialGrid, SpectralField,
};

/// Default regularization for the degenerate p-Laplacian modulus; see
/// [`EnergySpec::with_p_regularization`].
pub const DEFAULT_P_REGULARIZATION: f64 = 1e-8;

/// One additive term of an energy functional.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum EnergyTerm {
    /// `(coeff/p) * integral |d^k v|^p`, `p > 1`, `0 <= k <= 4`.
    DerivPower {
        order: usize,
        exponent: f64,
        coeff: f64,
    },
    /// `(coeff/2) * homogeneous Sobolev seminorm squared of order m`.
    SobolevQuadratic { order: f64, coeff: f64 },
    /// `coeff * integral (1 - cos v)`.
    CosinePotential { coeff: f64 },
    /// `(coeff/4) * (integral |d v|^2)^2`, the nonlocal stiffness term whose
    /// gradient is `coeff * (integral |dv|^2) * (-Laplacian v)`.
    KirchhoffQuartic { coeff: f64 },
}

impl EnergyTerm {
    fn validate(&self) -> Result<()> {
        match self {
            EnergyTerm::DerivPower {
                order,
                exponent,
                coeff,
            } => {
                if *order > 4 {
                    return Err(WideError::InvalidParameter(format!(
                        "derivative order {order} not supported (max 4)"
                    )));
                }
                if !(*exponent > 1.0) {
                    return Err(WideError::InvalidParameter(format!(
                        "power exponent must exceed 1, got {exponent}"
                    )));
                }
                if !(*coeff >= 0.0) {
                    return Err(WideError::InvalidParameter(
                        "energy coefficients must be nonnegative".into(),
                    ));
                }
            }
            EnergyTerm::SobolevQuadratic { order, coeff } => {
                if !(*order > 0.0) {
                    return Err(WideError::InvalidParameter(format!(
                        "Sobolev order must be positive, got {order}"
                    )));
                }
                if !(*coeff >= 0.0) {
                    return Err(WideError::InvalidParameter(
                        "energy coefficients must be nonnegative".into(),
                    ));
                }
            }
            EnergyTerm::CosinePotential { coeff } | EnergyTerm::KirchhoffQuartic { coeff } => {
                if !(*coeff >= 0.0) {
                    return Err(WideError::InvalidParameter(
                        "energy coefficients must be nonnegative".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Quadratic terms admit a closed-form Hessian; everything else takes
    /// the quasi-Newton solver path.
    pub fn is_quadratic(&self) -> bool {
        match self {
            EnergyTerm::DerivPower { exponent, .. } => (*exponent - 2.0).abs() < 1e-14,
            EnergyTerm::SobolevQuadratic { .. } => true,
            EnergyTerm::CosinePotential { .. } | EnergyTerm::KirchhoffQuartic { .. } => false,
        }
    }

    fn check_grid(&self, grid: &SpatialGrid) -> Result<()> {
        if let EnergyTerm::SobolevQuadratic { order, .. } = self {
            let integer = (order - order.round()).abs() <= 1e-12;
            if !integer && !grid.is_periodic() {
                return Err(WideError::Unsupported(format!(
                    "Sobolev term of non-integer order {order} requires a periodic grid"
                )));
            }
        }
        Ok(())
    }
}

/// Energy functional `G` as a sum of [`EnergyTerm`]s.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergySpec {
    terms: Vec<EnergyTerm>,
    /// Regularization delta for the p-Laplacian gradient modulus
    /// `(|g|^2 + delta^2)^{(p-2)/2} g`. The value is left unregularized.
    p_regularization: f64,
}

impl EnergySpec {
    pub fn new(terms: Vec<EnergyTerm>) -> Result<Self> {
        for t in &terms {
            t.validate()?;
        }
        Ok(Self {
            terms,
            p_regularization: DEFAULT_P_REGULARIZATION,
        })
    }

    pub fn with_p_regularization(mut self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(WideError::InvalidParameter(
                "regularization delta must be nonnegative".into(),
            ));
        }
        self.p_regularization = delta;
        Ok(self)
    }

    pub fn terms(&self) -> &[EnergyTerm] {
        &self.terms
    }

    pub fn p_regularization(&self) -> f64 {
        self.p_regularization
    }

    pub fn is_quadratic(&self) -> bool {
        self.terms.iter().all(EnergyTerm::is_quadratic)
    }

    /// Concatenate two specs; values and gradients add exactly.
    pub fn concat(&self, other: &EnergySpec) -> EnergySpec {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        EnergySpec {
            terms,
            p_regularization: self.p_regularization,
        }
    }

    pub fn check_grid(&self, grid: &SpatialGrid) -> Result<()> {
        for t in &self.terms {
            t.check_grid(grid)?;
        }
        Ok(())
    }
}

/// Quadratic dissipation functional `D(v) = sum_j (coeff_j/2) integral |d^j v|^2`.
#[derive(Clone, Debug, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct DissipationSpec {
    terms: Vec<(usize, f64)>,
}

impl DissipationSpec {
    pub fn new(terms: Vec<(usize, f64)>) -> Result<Self> {
        for (order, coeff) in &terms {
            if *order > 4 {
                return Err(WideError::InvalidParameter(format!(
                    "dissipation derivative order {order} not supported (max 4)"
                )));
            }
            if !(*coeff >= 0.0) {
                return Err(WideError::InvalidParameter(
                    "dissipation coefficients must be nonnegative".into(),
                ));
            }
        }
        Ok(Self { terms })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Value of the energy functional, always nonnegative and finite on finite
/// fields.
pub fn eval_energy(spec: &EnergySpec, v: &SpatialField) -> Result<f64> {
    spec.check_grid(v.grid())?;
    let h = v.grid().spacing();
    let mut total = 0.0;
    for term in &spec.terms {
        total += match term {
            EnergyTerm::DerivPower {
                order,
                exponent,
                coeff,
            } => {
                let g = diff(v, *order)?;
                let sum: f64 = g.values().iter().map(|x| x.abs().powf(*exponent)).sum();
                coeff / exponent * h * sum
            }
            EnergyTerm::SobolevQuadratic { order, coeff } => {
                coeff / 2.0 * sobolev_seminorm_sq(v, *order)?
            }
            EnergyTerm::CosinePotential { coeff } => {
                let sum: f64 = v.values().iter().map(|x| 1.0 - x.cos()).sum();
                coeff * h * sum
            }
            EnergyTerm::KirchhoffQuartic { coeff } => {
                let g = diff(v, 1)?;
                let q = l2_inner(&g, &g)?;
                coeff / 4.0 * q * q
            }
        };
    }
    Ok(total)
}

/// Gradient of [`eval_energy`] in the `L^2` convention.
pub fn grad_energy(spec: &EnergySpec, v: &SpatialField) -> Result<SpatialField> {
    spec.check_grid(v.grid())?;
    let delta = spec.p_regularization;
    let mut out = SpatialField::zeros(v.grid().clone());
    for term in &spec.terms {
        let contrib = match term {
            EnergyTerm::DerivPower {
                order,
                exponent,
                coeff,
            } => {
                let g = diff(v, *order)?;
                let p = *exponent;
                let mut psi = g.clone();
                for x in psi.values_mut() {
                    // regularized modulus keeps p < 2 finite at g = 0
                    *x = (*x * *x + delta * delta).powf((p - 2.0) / 2.0) * *x;
                }
                diff_transpose(&psi, *order)?.scaled(*coeff)
            }
            EnergyTerm::SobolevQuadratic { order, coeff } => {
                let m = *order;
                if v.grid().is_periodic() {
                    let spec_f = SpectralField::forward(v)?;
                    let grid = v.grid().clone();
                    spec_f
                        .apply_multiplier(|k| grid.wavenumber(k).abs().powf(2.0 * m))
                        .scaled(*coeff)
                } else {
                    let k = m.round() as usize;
                    let d = diff(v, k)?;
                    diff_transpose(&d, k)?.scaled(*coeff)
                }
            }
            EnergyTerm::CosinePotential { coeff } => {
                let mut s = v.clone();
                for x in s.values_mut() {
                    *x = x.sin();
                }
                s.scaled(*coeff)
            }
            EnergyTerm::KirchhoffQuartic { coeff } => {
                let g = diff(v, 1)?;
                let q = l2_inner(&g, &g)?;
                diff_transpose(&g, 1)?.scaled(coeff * q)
            }
        };
        out = out.axpy(1.0, &contrib)?;
    }
    Ok(out)
}

/// Value of the dissipation functional.
pub fn eval_dissipation(spec: &DissipationSpec, v: &SpatialField) -> Result<f64> {
    let h = v.grid().spacing();
    let mut total = 0.0;
    for (order, coeff) in &spec.terms {
        let g = diff(v, *order)?;
        let sum: f64 = g.values().iter().map(|x| x * x).sum();
        total += coeff / 2.0 * h * sum;
    }
    Ok(total)
}

/// Gradient of [`eval_dissipation`]; since `D` is quadratic this is the
/// associated symmetric linear operator applied to `v`.
pub fn grad_dissipation(spec: &DissipationSpec, v: &SpatialField) -> Result<SpatialField> {
    let mut out = SpatialField::zeros(v.grid().clone());
    for (order, coeff) in &spec.terms {
        let g = diff(v, *order)?;
        out = out.axpy(*coeff, &diff_transpose(&g, *order)?)?;
    }
    Ok(out)
}

/// Directional derivative of the energy by central finite differences,
/// the reference against which gradients are checked.
pub fn energy_directional_fd(
    spec: &EnergySpec,
    v: &SpatialField,
    eta: &SpatialField,
    step: f64,
) -> Result<f64> {
    let plus = eval_energy(spec, &v.axpy(step, eta)?)?;
    let minus = eval_energy(spec, &v.axpy(-step, eta)?)?;
    Ok((plus - minus) / (2.0 * step))
}

/// Same check for the dissipation functional.
pub fn dissipation_directional_fd(
    spec: &DissipationSpec,
    v: &SpatialField,
    eta: &SpatialField,
    step: f64,
) -> Result<f64> {
    let plus = eval_dissipation(spec, &v.axpy(step, eta)?)?;
    let minus = eval_dissipation(spec, &v.axpy(-step, eta)?)?;
    Ok((plus - minus) / (2.0 * step))
}

/// Convenience: `grad` paired against the directional finite difference,
/// returned as a relative error.
pub fn energy_grad_fd_error(
    spec: &EnergySpec,
    v: &SpatialField,
    eta: &SpatialField,
    step: f64,
) -> Result<f64> {
    let g = grad_energy(spec, v)?;
    let ip = l2_inner(&g, eta)?;
    let fd = energy_directional_fd(spec, v, eta, step)?;
    Ok(relative_gap(ip, fd))
}

pub fn dissipation_grad_fd_error(
    spec: &DissipationSpec,
    v: &SpatialField,
    eta: &SpatialField,
    step: f64,
) -> Result<f64> {
    let g = grad_dissipation(spec, v)?;
    let ip = l2_inner(&g, eta)?;
    let fd = dissipation_directional_fd(spec, v, eta, step)?;
    Ok(relative_gap(ip, fd))
}

pub(crate) fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1e-10);
    (a - b).abs() / scale
}
