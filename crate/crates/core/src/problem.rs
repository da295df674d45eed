//! Problem description: equation, domain, discretization, initial data,
//! eps schedule and solver options in one place.

use std::sync::Arc;

use crate::energy::{DissipationSpec, EnergySpec};
use crate::error::{Result, WideError};
use crate::grid::{SpatialField, SpatialGrid};
use crate::optimize::SolveOptions;
use crate::presets::preset;
use crate::wide::{ConstraintSet, TimeGrid, WeightedFunctional};

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: String,
    pub energy: EnergySpec,
    pub dissipation: DissipationSpec,
    pub kappa: bool,
    pub grid: Arc<SpatialGrid>,
    pub time: TimeGrid,
    pub w0: SpatialField,
    pub w1: SpatialField,
    pub epsilons: Vec<f64>,
    pub options: SolveOptions,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: String,
        energy: EnergySpec,
        dissipation: DissipationSpec,
        grid: Arc<SpatialGrid>,
        time: TimeGrid,
        w0: SpatialField,
        w1: SpatialField,
        epsilons: Vec<f64>,
        options: SolveOptions,
    ) -> Result<Self> {
        if w0.grid().as_ref() != grid.as_ref() || w1.grid().as_ref() != grid.as_ref() {
            return Err(WideError::GridMismatch(
                "initial data does not live on the problem grid".into(),
            ));
        }
        energy.check_grid(&grid)?;
        if epsilons.is_empty() {
            return Err(WideError::InvalidParameter(
                "eps schedule must be nonempty".into(),
            ));
        }
        options.validate()?;
        let kappa = !dissipation.is_empty();
        Ok(Self {
            name,
            energy,
            dissipation,
            kappa,
            grid,
            time,
            w0,
            w1,
            epsilons,
            options,
        })
    }

    /// Build from a registry preset name.
    #[allow(clippy::too_many_arguments)]
    pub fn from_preset(
        preset_name: &str,
        grid: Arc<SpatialGrid>,
        time: TimeGrid,
        w0: SpatialField,
        w1: SpatialField,
        epsilons: Vec<f64>,
        options: SolveOptions,
    ) -> Result<Self> {
        let p = preset(preset_name)?;
        Self::new(
            p.name,
            p.energy,
            p.dissipation,
            grid,
            time,
            w0,
            w1,
            epsilons,
            options,
        )
    }

    pub fn constraints(&self) -> Result<ConstraintSet> {
        ConstraintSet::new(self.w0.clone(), self.w1.clone())
    }

    pub fn functional(&self, eps: f64) -> Result<WeightedFunctional> {
        WeightedFunctional::new(
            eps,
            self.energy.clone(),
            self.dissipation.clone(),
            self.time.clone(),
        )
    }

    /// Drop the dissipation terms (damping switch forced off).
    pub fn without_damping(mut self) -> Self {
        self.dissipation = DissipationSpec::empty();
        self.kappa = false;
        self
    }
}
