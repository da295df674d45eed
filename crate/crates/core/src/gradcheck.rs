//! Finite-difference consistency suite over the whole preset registry,
//! exposed both to the test suite and to the `gradcheck` subcommand.
//!
//! Every gradient in the library is the exact derivative of its discrete
//! value, so central differences must agree to well below 1e-6 on seeded
//! random fields.

use std::sync::Arc;

use crate::energy::{dissipation_grad_fd_error, energy_grad_fd_error};
use crate::error::Result;
use crate::grid::{SpatialField, SpatialGrid};
use crate::presets::{preset, GRADCHECK_PRESETS};
use crate::testsupport::SplitMix64;
use crate::wide::{SpaceTimeField, TimeGrid, WeightedFunctional};

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-6;

/// Worst relative errors for one preset.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GradcheckRow {
    pub preset: String,
    pub energy_error: f64,
    pub dissipation_error: f64,
    pub functional_error: f64,
}

impl GradcheckRow {
    pub fn pass(&self) -> bool {
        self.energy_error <= FD_TOLERANCE
            && self.dissipation_error <= FD_TOLERANCE
            && self.functional_error <= FD_TOLERANCE
    }
}

/// Run the suite: `fields` seeded random fields per preset, one random
/// direction each, covering the energy, dissipation and space-time
/// functional gradients.
pub fn run(seed: u64, fields: usize) -> Result<Vec<GradcheckRow>> {
    let grid = Arc::new(SpatialGrid::periodic(2.0 * std::f64::consts::PI, 32)?);
    let time = TimeGrid::new(1.0, 12)?;
    let eps = 0.3;
    let n = grid.nodes();
    let mut rows = Vec::with_capacity(GRADCHECK_PRESETS.len());
    for name in GRADCHECK_PRESETS {
        let p = preset(name)?;
        let mut rng = SplitMix64::new(seed ^ hash_name(name));
        let mut worst_energy = 0.0f64;
        let mut worst_dissipation = 0.0f64;
        let mut worst_functional = 0.0f64;
        let functional =
            WeightedFunctional::new(eps, p.energy.clone(), p.dissipation.clone(), time.clone())?;
        for _ in 0..fields {
            let v = SpatialField::new(grid.clone(), rng.uniform_vec(n, -1.0, 1.0))?;
            let eta = SpatialField::new(grid.clone(), rng.uniform_vec(n, -1.0, 1.0))?;
            worst_energy = worst_energy.max(energy_grad_fd_error(&p.energy, &v, &eta, FD_STEP)?);
            if !p.dissipation.is_empty() {
                worst_dissipation = worst_dissipation.max(dissipation_grad_fd_error(
                    &p.dissipation,
                    &v,
                    &eta,
                    FD_STEP,
                )?);
            }
            let mut w = SpaceTimeField::zeros(time.clone(), grid.clone());
            for val in w.values_mut() {
                *val = rng.uniform(-1.0, 1.0);
            }
            let mut dir = SpaceTimeField::zeros(time.clone(), grid.clone());
            for val in dir.values_mut() {
                *val = rng.uniform(-1.0, 1.0);
            }
            dir.layer_mut(0).fill(0.0);
            dir.layer_mut(1).fill(0.0);
            worst_functional = worst_functional.max(functional.grad_fd_error(&w, &dir, FD_STEP)?);
        }
        rows.push(GradcheckRow {
            preset: name.to_string(),
            energy_error: worst_energy,
            dissipation_error: worst_dissipation,
            functional_error: worst_functional,
        });
    }
    Ok(rows)
}

fn hash_name(name: &str) -> u64 {
    // FNV-1a, stable across platforms
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_registry_passes_at_default_seed() {
        let rows = run(7, 5).unwrap();
        assert_eq!(rows.len(), GRADCHECK_PRESETS.len());
        for row in &rows {
            assert!(
                row.pass(),
                "{}: energy {:.3e}, dissipation {:.3e}, functional {:.3e}",
                row.preset,
                row.energy_error,
                row.dissipation_error,
                row.functional_error
            );
        }
    }
}
