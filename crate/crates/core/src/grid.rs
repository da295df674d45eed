//! 1D spatial grids, discrete derivative and spectral operators, and the
//! discrete norms used by every other module.
//!
//! Two boundary conditions are supported. Periodic grids store the nodes
//! `x_i = i*h`, `i = 0..N-1` with `h = L/N` (node `N` aliases node 0 and is
//! not stored). Dirichlet grids store only the interior nodes
//! `x_i = (i+1)*h`, `i = 0..N-1` with `h = L/(N+1)`; the boundary values are
//! identically zero, which makes "dirichlet-zero" an invariant of the data
//! rather than a boundary loop.
//!
//! Integer-order derivatives use second-order central stencils. Fractional
//! operators and homogeneous Sobolev norms go through the discrete Fourier
//! transform and therefore require a periodic grid (except integer-order
//! seminorms, which fall back to the stencil operators).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, WideError};

/// Boundary condition of a [`SpatialGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    Periodic,
    DirichletZero,
}

/// Uniform 1D grid on `[0, L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialGrid {
    length: f64,
    nodes: usize,
    bc: BoundaryCondition,
}

impl SpatialGrid {
    pub fn new(length: f64, nodes: usize, bc: BoundaryCondition) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(WideError::InvalidParameter(format!(
                "domain length must be positive and finite, got {length}"
            )));
        }
        if nodes < 4 {
            return Err(WideError::InvalidParameter(format!(
                "node count must be at least 4, got {nodes}"
            )));
        }
        Ok(Self { length, nodes, bc })
    }

    pub fn periodic(length: f64, nodes: usize) -> Result<Self> {
        Self::new(length, nodes, BoundaryCondition::Periodic)
    }

    pub fn dirichlet(length: f64, nodes: usize) -> Result<Self> {
        Self::new(length, nodes, BoundaryCondition::DirichletZero)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of stored nodes (interior nodes for Dirichlet grids).
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn is_periodic(&self) -> bool {
        self.bc == BoundaryCondition::Periodic
    }

    /// Mesh spacing: `L/N` periodic, `L/(N+1)` Dirichlet.
    pub fn spacing(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Periodic => self.length / self.nodes as f64,
            BoundaryCondition::DirichletZero => self.length / (self.nodes as f64 + 1.0),
        }
    }

    /// Coordinate of stored node `i`.
    pub fn coord(&self, i: usize) -> f64 {
        match self.bc {
            BoundaryCondition::Periodic => i as f64 * self.spacing(),
            BoundaryCondition::DirichletZero => (i as f64 + 1.0) * self.spacing(),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.coord(i)).collect()
    }

    /// Physical wavenumber `2*pi*k/L` of integer mode `k`.
    pub fn wavenumber(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.length
    }

    /// Signed integer mode for DFT bin `j` (standard layout, `|k| <= N/2`).
    pub fn mode_of_bin(&self, j: usize) -> i64 {
        let n = self.nodes as i64;
        let j = j as i64;
        if 2 * j <= n {
            j
        } else {
            j - n
        }
    }
}

/// Nodal values of a scalar field over a [`SpatialGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialField {
    grid: Arc<SpatialGrid>,
    values: Vec<f64>,
}

impl SpatialField {
    pub fn new(grid: Arc<SpatialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(WideError::GridMismatch(format!(
                "field has {} values but grid stores {} nodes",
                values.len(),
                grid.nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(WideError::InvalidParameter(
                "field values must be finite".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<SpatialGrid>) -> Self {
        let n = grid.nodes();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn constant(grid: Arc<SpatialGrid>, c: f64) -> Self {
        let n = grid.nodes();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    /// Sample `f(x)` at the stored nodes.
    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.nodes()).map(|i| f(grid.coord(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `self + alpha * other`, same grid.
    pub fn axpy(&self, alpha: f64, other: &SpatialField) -> Result<SpatialField> {
        check_same_grid(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(SpatialField {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn scaled(&self, alpha: f64) -> SpatialField {
        SpatialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }
}

fn check_same_grid(u: &SpatialField, v: &SpatialField) -> Result<()> {
    if u.grid.as_ref() != v.grid.as_ref() {
        return Err(WideError::GridMismatch(
            "fields live on different grids".into(),
        ));
    }
    Ok(())
}

/// Discrete `L^2` inner product `h * sum_i u_i v_i`.
pub fn l2_inner(u: &SpatialField, v: &SpatialField) -> Result<f64> {
    check_same_grid(u, v)?;
    let h = u.grid.spacing();
    let mut acc = 0.0;
    for (a, b) in u.values.iter().zip(&v.values) {
        acc += a * b;
    }
    Ok(h * acc)
}

pub fn l2_norm(u: &SpatialField) -> f64 {
    let h = u.grid.spacing();
    let s: f64 = u.values.iter().map(|v| v * v).sum();
    (h * s).sqrt()
}

/// Value of node `idx` with periodic wraparound or Dirichlet zero padding.
#[inline]
fn fetch(values: &[f64], idx: isize, bc: BoundaryCondition) -> f64 {
    let n = values.len() as isize;
    match bc {
        BoundaryCondition::Periodic => values[idx.rem_euclid(n) as usize],
        BoundaryCondition::DirichletZero => {
            if idx < 0 || idx >= n {
                0.0
            } else {
                values[idx as usize]
            }
        }
    }
}

/// `k`-th discrete derivative by the order-2 central stencil, `1 <= k <= 4`.
/// `k = 0` returns a copy.
///
/// The stencils are evaluated as nested differences so that constant fields
/// are annihilated exactly (no `1/h^k` amplification of rounding noise).
pub fn diff(u: &SpatialField, k: usize) -> Result<SpatialField> {
    if k == 0 {
        return Ok(u.clone());
    }
    if k > 4 {
        return Err(WideError::Unsupported(format!(
            "derivative order {k} not supported (max 4)"
        )));
    }
    let h = u.grid.spacing();
    let scale = h.powi(k as i32).recip();
    let bc = u.grid.bc();
    let n = u.values.len();
    let v = &u.values;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let i = i as isize;
        let at = |offset: isize| fetch(v, i + offset, bc);
        let second = |center: isize| (at(center + 1) - at(center)) + (at(center - 1) - at(center));
        let acc = match k {
            1 => 0.5 * (at(1) - at(-1)),
            2 => second(0),
            3 => 0.5 * ((at(2) - at(-2)) - 2.0 * (at(1) - at(-1))),
            4 => {
                let (a, b, c) = (second(1), second(0), second(-1));
                (a - b) + (c - b)
            }
            _ => unreachable!(),
        };
        out[i as usize] = acc * scale;
    }
    Ok(SpatialField {
        grid: u.grid.clone(),
        values: out,
    })
}

/// Transpose of [`diff`] with respect to the unweighted nodal pairing.
/// Central stencils flip sign for odd orders and are symmetric for even
/// orders, under both wraparound and zero padding.
pub fn diff_transpose(u: &SpatialField, k: usize) -> Result<SpatialField> {
    let d = diff(u, k)?;
    if k % 2 == 1 {
        Ok(d.scaled(-1.0))
    } else {
        Ok(d)
    }
}

/// Fourier coefficients of a real periodic field.
///
/// Coefficients use the amplitude normalization `u_hat_k = c_k / N` where
/// `c` is the unnormalized DFT, so Parseval reads
/// `l2_inner(u, u) = L * sum_k |u_hat_k|^2`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<SpatialGrid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn forward(u: &SpatialField) -> Result<Self> {
        if !u.grid.is_periodic() {
            return Err(WideError::Unsupported(
                "spectral transform requires a periodic grid".into(),
            ));
        }
        let n = u.values.len();
        let mut buf: Vec<Complex64> = u.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        Ok(Self {
            grid: u.grid.clone(),
            coeffs: buf,
        })
    }

    pub fn inverse(&self) -> SpatialField {
        let n = self.coeffs.len();
        let mut buf = self.coeffs.clone();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        SpatialField {
            grid: self.grid.clone(),
            values: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Signed integer mode of bin `j`.
    pub fn mode_of_bin(&self, j: usize) -> i64 {
        self.grid.mode_of_bin(j)
    }

    /// Largest conjugate-symmetry violation, zero for real fields up to
    /// roundoff.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.coeffs.len();
        let mut worst = 0.0f64;
        for j in 1..n {
            let d = (self.coeffs[j] - self.coeffs[n - j].conj()).norm();
            worst = worst.max(d);
        }
        worst = worst.max(self.coeffs[0].im.abs());
        worst
    }

    /// Apply a real multiplier `m(k)` per signed mode and transform back.
    pub fn apply_multiplier(&self, m: impl Fn(i64) -> f64) -> SpatialField {
        let mut filtered = self.clone();
        for j in 0..filtered.coeffs.len() {
            let k = filtered.mode_of_bin(j);
            filtered.coeffs[j] *= m(k);
        }
        filtered.inverse()
    }
}

/// Spectral fractional Laplacian `(-Delta)^s`, multiplier `|2*pi*k/L|^{2s}`.
/// Periodic grids only; `s` in `(0, 1]`.
pub fn fractional_laplacian(u: &SpatialField, s: f64) -> Result<SpatialField> {
    if !u.grid.is_periodic() {
        return Err(WideError::Unsupported(
            "fractional Laplacian requires a periodic grid".into(),
        ));
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(WideError::InvalidParameter(format!(
            "fractional order must lie in (0, 1], got {s}"
        )));
    }
    let spec = SpectralField::forward(u)?;
    let grid = u.grid.clone();
    Ok(spec.apply_multiplier(|k| grid.wavenumber(k).abs().powf(2.0 * s)))
}

/// Squared homogeneous Sobolev seminorm `sum_k |2*pi*k/L|^{2m} |u_hat_k|^2 * L`.
///
/// Periodic grids evaluate the spectral formula for any `m >= 0`. Dirichlet
/// grids fall back to the stencil surrogate `l2_inner(diff(u,m), diff(u,m))`
/// for integer `m` and reject fractional orders.
pub fn sobolev_seminorm_sq(u: &SpatialField, m: f64) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(WideError::InvalidParameter(format!(
            "Sobolev order must be nonnegative, got {m}"
        )));
    }
    if u.grid.is_periodic() {
        let spec = SpectralField::forward(u)?;
        let l = u.grid.length();
        let mut acc = 0.0;
        for (j, c) in spec.coeffs.iter().enumerate() {
            let k = spec.mode_of_bin(j);
            let xi = u.grid.wavenumber(k).abs();
            let weight = if m == 0.0 { 1.0 } else { xi.powf(2.0 * m) };
            acc += weight * c.norm_sqr();
        }
        Ok(l * acc)
    } else {
        let rounded = m.round();
        if (m - rounded).abs() > 1e-12 || rounded > 4.0 {
            return Err(WideError::Unsupported(format!(
                "non-integer Sobolev order {m} requires a periodic grid"
            )));
        }
        let d = diff(u, rounded as usize)?;
        l2_inner(&d, &d)
    }
}

/// Negative Sobolev norm surrogate
/// `sqrt( sum_k |f_hat_k|^2 * L / (1 + |2*pi*k/L|^{2m}) )`. Periodic only.
pub fn neg_sobolev_norm(f: &SpatialField, m: f64) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(WideError::InvalidParameter(format!(
            "Sobolev order must be nonnegative, got {m}"
        )));
    }
    if !f.grid.is_periodic() {
        return Err(WideError::Unsupported(
            "negative Sobolev norm requires a periodic grid".into(),
        ));
    }
    let spec = SpectralField::forward(f)?;
    let l = f.grid.length();
    let mut acc = 0.0;
    for (j, c) in spec.coeffs.iter().enumerate() {
        let k = spec.mode_of_bin(j);
        let xi = f.grid.wavenumber(k).abs();
        acc += c.norm_sqr() * l / (1.0 + xi.powf(2.0 * m));
    }
    Ok(acc.sqrt())
}
