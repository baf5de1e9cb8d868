//! Density, current, momentum-stress and the effective inhomogeneity that
//! drives the inversion.

use crate::error::{Error, Result};
use crate::grid::{Grid1D, SpaceTimeField, WaveTrajectory};
use crate::propagator::InitialState;
use crate::sturm::apply_flux_form;

/// Per-step normalization tolerance for densities.
pub const NORM_TOLERANCE: f64 = 1e-10;
const NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// A nonnegative, unit-mass density over the space-time mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTrajectory(SpaceTimeField);

impl DensityTrajectory {
    pub fn new(field: SpaceTimeField) -> Result<Self> {
        Self::with_norm_tolerance(field, NORM_TOLERANCE)
    }

    pub fn with_norm_tolerance(field: SpaceTimeField, tol: f64) -> Result<Self> {
        let grid = *field.grid();
        for (k, row) in field.rows().enumerate() {
            if let Some(j) = row.iter().position(|&v| !(v >= -NEGATIVITY_TOLERANCE)) {
                return Err(Error::ContractViolation(format!(
                    "density is negative ({:e}) at step {k}, index {j}",
                    row[j]
                )));
            }
            let mass = grid.quadrature(row)?;
            if (mass - 1.0).abs() > tol {
                return Err(Error::ContractViolation(format!(
                    "density has mass {mass} at step {k}"
                )));
            }
        }
        Ok(Self(field))
    }

    /// Rescales every step to unit mass. Useful for densities restricted
    /// from a finer mesh.
    pub fn normalized(mut field: SpaceTimeField) -> Result<Self> {
        let grid = *field.grid();
        for k in 0..field.n_times() {
            let mass = grid.quadrature(field.slice(k))?;
            if !(mass > 0.0) {
                return Err(Error::ContractViolation(format!(
                    "density has no mass at step {k}"
                )));
            }
            field.slice_mut(k).iter_mut().for_each(|v| *v /= mass);
        }
        Self::new(field)
    }

    pub fn field(&self) -> &SpaceTimeField {
        &self.0
    }

    pub fn into_field(self) -> SpaceTimeField {
        self.0
    }

    pub fn grid(&self) -> &Grid1D {
        self.0.grid()
    }

    pub fn min(&self) -> f64 {
        self.0.values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn require_positive(&self) -> Result<()> {
        let n = self.grid().n_points();
        match self.0.values().iter().position(|&v| !(v > 0.0)) {
            Some(i) => Err(Error::NonPositiveDensity {
                index: i % n,
                value: self.0.values()[i],
            }),
            None => Ok(()),
        }
    }

    pub fn subsample_times(&self, stride: usize) -> Result<Self> {
        Ok(Self(self.0.subsample_times(stride)?))
    }
}

pub fn density(psi: &WaveTrajectory) -> Result<DensityTrajectory> {
    DensityTrajectory::new(psi.map(|z| z.norm_sqr()))
}

/// `j = Im(conj(psi) d_x psi)`.
pub fn current(psi: &WaveTrajectory) -> Result<SpaceTimeField> {
    let grid = *psi.grid();
    let mut values = Vec::with_capacity(psi.values().len());
    for row in psi.rows() {
        let d = grid.spatial_derivative(row)?;
        values.extend(row.iter().zip(&d).map(|(z, dz)| (z.conj() * dz).im));
    }
    SpaceTimeField::from_values(grid, *psi.times(), values)
}

/// Largest `|d_t n + d_x j|` over interior time steps, central stencils.
pub fn continuity_residual(n: &DensityTrajectory, j: &SpaceTimeField) -> Result<f64> {
    let n = n.field();
    n.check_same_mesh(j, "density and current")?;
    let grid = *n.grid();
    let inv_2dt = 0.5 / n.times().dt();
    let mut worst = 0.0f64;
    for k in 1..n.times().n_steps() {
        let dj = grid.spatial_derivative(j.slice(k))?;
        let (lo, hi) = (n.slice(k - 1), n.slice(k + 1));
        for x in 0..grid.n_points() {
            worst = worst.max(((hi[x] - lo[x]) * inv_2dt + dj[x]).abs());
        }
    }
    Ok(worst)
}

fn subtract_mean(grid: &Grid1D, f: &mut [f64]) -> Result<()> {
    let mean = grid.quadrature(f)? / grid.period();
    f.iter_mut().for_each(|v| *v -= mean);
    Ok(())
}

/// `d_t^2 (n_current - n_target)` with the stencils of
/// [`SpaceTimeField::second_time_derivative`], mean-free at every step.
pub fn acceleration_difference(
    n_target: &DensityTrajectory,
    n_current: &DensityTrajectory,
) -> Result<SpaceTimeField> {
    let diff = n_current.field().sub(n_target.field())?;
    let mut acc = diff.second_time_derivative()?;
    let grid = *acc.grid();
    for k in 0..acc.n_times() {
        subtract_mean(&grid, acc.slice_mut(k))?;
    }
    Ok(acc)
}

/// Effective inhomogeneity
/// `zeta = -d_x(n_current d_x v_current) + d_t^2 (n_current - n_target)`,
/// with the divergence in the same flux form as the Sturm-Liouville operator
/// and the mean removed at every step.
pub fn zeta(
    n_target: &DensityTrajectory,
    n_current: &DensityTrajectory,
    v_current: &SpaceTimeField,
) -> Result<SpaceTimeField> {
    n_target.require_positive()?;
    n_target.field().check_same_mesh(v_current, "target density and potential")?;
    let mut out = acceleration_difference(n_target, n_current)?;
    let grid = *out.grid();
    for k in 0..out.n_times() {
        let div = apply_flux_form(&grid, n_current.field().slice(k), v_current.slice(k))?;
        let row = out.slice_mut(k);
        row.iter_mut().zip(&div).for_each(|(r, d)| *r += d);
        subtract_mean(&grid, row)?;
    }
    Ok(out)
}

/// Momentum-stress `T_xx = |d_x psi|^2 - 1/4 d_x^2 |psi|^2`.
pub fn momentum_stress(psi: &WaveTrajectory) -> Result<SpaceTimeField> {
    let grid = *psi.grid();
    let mut values = Vec::with_capacity(psi.values().len());
    for row in psi.rows() {
        let d = grid.spatial_derivative(row)?;
        let n: Vec<f64> = row.iter().map(|z| z.norm_sqr()).collect();
        let d2n = grid.second_derivative(&n)?;
        values.extend(d.iter().zip(&d2n).map(|(dz, d2)| dz.norm_sqr() - 0.25 * d2));
    }
    SpaceTimeField::from_values(grid, *psi.times(), values)
}

/// `q = d_x^2 T_xx` for a non-interacting particle. Diagnostic only; the
/// inversion never needs it.
pub fn momentum_stress_q(psi: &WaveTrajectory) -> Result<SpaceTimeField> {
    let t = momentum_stress(psi)?;
    let grid = *t.grid();
    let mut values = Vec::with_capacity(t.values().len());
    for row in t.rows() {
        values.extend(grid.second_derivative(row)?);
    }
    SpaceTimeField::from_values(grid, *t.times(), values)
}

/// Largest `|-d_x(n d_x v) - q + d_t^2 n|` over the mesh, i.e. how well the
/// propagated state satisfies the local force balance.
pub fn force_balance_residual(psi: &WaveTrajectory, v: &SpaceTimeField) -> Result<f64> {
    psi.check_same_mesh(v, "wavefunction and potential")?;
    let n = psi.map(|z| z.norm_sqr());
    let q = momentum_stress_q(psi)?;
    let acc = n.second_time_derivative()?;
    let grid = *psi.grid();
    let mut worst = 0.0f64;
    for k in 0..n.n_times() {
        let div = apply_flux_form(&grid, n.slice(k), v.slice(k))?;
        for x in 0..grid.n_points() {
            worst = worst.max((div[x] - q.get(k, x) + acc.get(k, x)).abs());
        }
    }
    Ok(worst)
}

/// How far a target density is from satisfying the initial conditions
/// imposed by `psi0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditionMismatch {
    /// `max |n(x, t0) - |psi0|^2|`
    pub density: f64,
    /// `max |d_t n(x, t0) + d_x j(x, t0)|`, with a second-order one-sided
    /// time stencil.
    pub rate: f64,
    /// `max |D2 - D3|` between the second- and third-order one-sided rate
    /// stencils; an estimate of the truncation error in `rate`.
    pub stencil_error: f64,
}

pub fn initial_condition_mismatch(
    n: &DensityTrajectory,
    psi0: &InitialState,
) -> Result<InitialConditionMismatch> {
    let field = n.field();
    let grid = *field.grid();
    if psi0.grid() != &grid {
        return Err(Error::MeshMismatch("target density and initial state".into()));
    }
    let n0 = psi0.density();
    let density = field
        .slice(0)
        .iter()
        .zip(&n0)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let d = grid.spatial_derivative(psi0.psi())?;
    let j0: Vec<f64> = psi0.psi().iter().zip(&d).map(|(z, dz)| (z.conj() * dz).im).collect();
    let dj0 = grid.spatial_derivative(&j0)?;
    let dt = field.times().dt();
    if field.times().n_steps() < 3 {
        return Err(Error::InvalidGrid("initial rate needs at least 3 time steps".into()));
    }
    let (f0, f1, f2, f3) = (field.slice(0), field.slice(1), field.slice(2), field.slice(3));
    let mut rate = 0.0f64;
    let mut stencil_error = 0.0f64;
    for x in 0..grid.n_points() {
        let d2 = (-3.0 * f0[x] + 4.0 * f1[x] - f2[x]) / (2.0 * dt);
        let d3 = (-11.0 * f0[x] + 18.0 * f1[x] - 9.0 * f2[x] + 2.0 * f3[x]) / (6.0 * dt);
        rate = rate.max((d2 + dj0[x]).abs());
        stencil_error = stencil_error.max((d2 - d3).abs());
    }
    Ok(InitialConditionMismatch {
        density,
        rate,
        stencil_error,
    })
}
