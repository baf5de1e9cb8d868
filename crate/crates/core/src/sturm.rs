//! The periodic Sturm-Liouville operator `S_t = -d_x [n(x, t) d_x]`, its
//! spectrum over time, and two independent ways of solving `S v = zeta`.
//!
//! The operator is discretized as `S = D^T diag(n_half) D / ...` with `D` the
//! forward difference and `n_half[j] = (n[j] + n[j+1]) / 2`:
//!
//! ```text
//! (S f)_j = (n_half[j-1] (f_j - f_{j-1}) - n_half[j] (f_{j+1} - f_j)) / dx^2
//! ```
//!
//! This form is symmetric, positive semidefinite, and annihilates constants
//! exactly. The direct inversion below integrates the same flux form, so both
//! routes invert the same matrix.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::observables::DensityTrajectory;

/// Default relative cutoff below which eigenvalues count as the zero mode.
pub const DEFAULT_GAP_FLOOR: f64 = 1e-8;
/// Relative gap `(lambda2 - lambda1) / lambda1` treated as a degeneracy.
pub const DEGENERACY_THRESHOLD: f64 = 1e-3;

const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// `(S f)_j` in flux form for any (not necessarily positive) coefficient.
pub fn apply_flux_form(grid: &Grid1D, n: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let n_half = grid.midpoints(n)?;
    let df = grid.forward_difference(f)?;
    let inv_dx = 1.0 / grid.dx();
    let flux: Vec<f64> = n_half.iter().zip(&df).map(|(a, b)| a * b).collect();
    Ok((0..grid.n_points())
        .map(|j| (flux[grid.prev(j)] - flux[j]) * inv_dx)
        .collect())
}

fn require_positive(n: &[f64]) -> Result<()> {
    match n.iter().position(|&v| !(v > 0.0)) {
        Some(index) => Err(Error::NonPositiveDensity {
            index,
            value: n[index],
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SturmOperator {
    grid: Grid1D,
    density: Vec<f64>,
    n_half: Vec<f64>,
}

impl SturmOperator {
    pub fn assemble(n_slice: &[f64], grid: &Grid1D) -> Result<Self> {
        if n_slice.len() != grid.n_points() {
            return Err(Error::Dimension(format!(
                "density slice has {} samples, grid has {}",
                n_slice.len(),
                grid.n_points()
            )));
        }
        require_positive(n_slice)?;
        Ok(Self {
            grid: *grid,
            density: n_slice.to_vec(),
            n_half: grid.midpoints(n_slice)?,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        apply_flux_form(&self.grid, &self.density, f)
    }

    /// Dense symmetric matrix of the operator.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.grid.n_points();
        let inv_dx2 = 1.0 / (self.grid.dx() * self.grid.dx());
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let (p, q) = (self.grid.prev(j), self.grid.next(j));
            let left = self.n_half[p] * inv_dx2;
            let right = self.n_half[j] * inv_dx2;
            m[(j, j)] += left + right;
            m[(j, p)] -= left;
            m[(j, q)] -= right;
        }
        m
    }

    /// Full eigendecomposition with eigenvectors normalized so that
    /// `dx * sum(phi_i * phi_k) = delta_ik`.
    pub fn eigenbasis(&self) -> Result<Eigenbasis> {
        let n = self.grid.n_points();
        let eig = self
            .matrix()
            .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITERATIONS)
            .ok_or(Error::Convergence {
                iterations: EIGEN_MAX_ITERATIONS,
            })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let scale = self.grid.dx().sqrt().recip();
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = order
            .iter()
            .map(|&i| {
                let col = eig.eigenvectors.column(i);
                let sign = if col.sum() < 0.0 { -1.0 } else { 1.0 };
                col.iter().map(|v| v * sign * scale).collect()
            })
            .collect();
        Ok(Eigenbasis {
            grid: self.grid,
            values,
            vectors,
        })
    }

    /// Lowest `n_eigs` eigenpairs.
    pub fn diagonalize(&self, n_eigs: usize, t: f64) -> Result<SpectralSnapshot> {
        if n_eigs == 0 || n_eigs > self.grid.n_points() {
            return Err(Error::InvalidArgument(format!(
                "n_eigs must be in 1..={}, got {n_eigs}",
                self.grid.n_points()
            )));
        }
        let mut basis = self.eigenbasis()?;
        let lambda_max = *basis.values.last().unwrap_or(&0.0);
        basis.values.truncate(n_eigs);
        basis.vectors.truncate(n_eigs);
        Ok(SpectralSnapshot {
            t,
            eigenvalues: basis.values,
            eigenvectors: basis.vectors,
            lambda_max,
        })
    }

    /// Solve `S v = zeta` by expansion in eigenvectors, skipping every mode
    /// with `lambda <= gap_floor * lambda_max`. The result is orthogonal to
    /// constants.
    pub fn invert_eigenbasis(&self, zeta: &[f64], gap_floor: f64) -> Result<Vec<f64>> {
        check_mean_free(&self.grid, zeta)?;
        self.eigenbasis()?.invert(zeta, gap_floor)
    }
}

fn check_mean_free(grid: &Grid1D, zeta: &[f64]) -> Result<()> {
    let total = grid.quadrature(zeta)?;
    let scale = 1.0f64.max(grid.dx() * zeta.iter().map(|z| z.abs()).sum::<f64>());
    if total.abs() > 1e-10 * scale {
        return Err(Error::ContractViolation(format!(
            "inhomogeneity is not orthogonal to constants (integral {total:e})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Eigenbasis {
    grid: Grid1D,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl Eigenbasis {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn invert(&self, zeta: &[f64], gap_floor: f64) -> Result<Vec<f64>> {
        if zeta.len() != self.grid.n_points() {
            return Err(Error::Dimension("inhomogeneity length".into()));
        }
        let lambda_max = self.values.last().copied().unwrap_or(0.0);
        let cutoff = gap_floor * lambda_max;
        let dx = self.grid.dx();
        let mut v = vec![0.0; zeta.len()];
        for (lambda, phi) in self.values.iter().zip(&self.vectors) {
            if *lambda <= cutoff {
                continue;
            }
            let coeff = dx * phi.iter().zip(zeta).map(|(a, b)| a * b).sum::<f64>() / lambda;
            v.iter_mut().zip(phi).for_each(|(vi, p)| *vi += coeff * p);
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSnapshot {
    pub t: f64,
    /// Ascending; `eigenvalues[0]` is the zero mode.
    pub eigenvalues: Vec<f64>,
    /// Quadrature-orthonormal, sign fixed so each vector has nonnegative sum.
    pub eigenvectors: Vec<Vec<f64>>,
    pub lambda_max: f64,
}

impl SpectralSnapshot {
    pub fn lambda1(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }
}

/// Time of a (near-)degeneracy between the two lowest nonzero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    /// Smallest gap `lambda2 - lambda1` seen (or extrapolated) near `t`.
    pub gap: f64,
    pub lambda1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTrack {
    pub snapshots: Vec<SpectralSnapshot>,
    /// `max_t 1 / |lambda1(t)|`
    pub d_constant: f64,
    /// Time at which `lambda1` is smallest.
    pub argmin_time: f64,
    pub crossings: Vec<Crossing>,
}

/// Diagonalize every `stride`-th density slice.
pub fn track_spectrum(n: &DensityTrajectory, n_eigs: usize, stride: usize) -> Result<SpectralTrack> {
    if n_eigs < 3 {
        return Err(Error::InvalidArgument(
            "tracking needs at least the zero mode and two more eigenvalues".into(),
        ));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    n.require_positive()?;
    let field = n.field();
    let grid = *field.grid();
    let steps: Vec<usize> = (0..field.n_times()).step_by(stride).collect();
    let snapshots = steps
        .par_iter()
        .map(|&k| {
            SturmOperator::assemble(field.slice(k), &grid)?.diagonalize(n_eigs, field.times().time(k))
        })
        .collect::<Result<Vec<_>>>()?;

    let (argmin_time, lambda1_min) = snapshots
        .iter()
        .map(|s| (s.t, s.eigenvalues[1]))
        .fold((f64::NAN, f64::INFINITY), |acc, (t, l)| if l < acc.1 { (t, l) } else { acc });
    let crossings = find_crossings(&snapshots);
    Ok(SpectralTrack {
        snapshots,
        d_constant: 1.0 / lambda1_min.abs(),
        argmin_time,
        crossings,
    })
}

/// Sampled gaps below the threshold, plus V-shaped minima whose two flanks
/// extrapolate to a gap below the threshold between samples.
fn find_crossings(snapshots: &[SpectralSnapshot]) -> Vec<Crossing> {
    let gap = |s: &SpectralSnapshot| s.eigenvalues[2] - s.eigenvalues[1];
    let gaps: Vec<f64> = snapshots.iter().map(gap).collect();
    let mut out: Vec<Crossing> = Vec::new();
    for k in 0..gaps.len() {
        let lambda1 = snapshots[k].eigenvalues[1];
        let local_min = (k == 0 || gaps[k] <= gaps[k - 1]) && (k + 1 == gaps.len() || gaps[k] <= gaps[k + 1]);
        if !local_min {
            continue;
        }
        let threshold = DEGENERACY_THRESHOLD * lambda1;
        if gaps[k] < threshold {
            out.push(Crossing {
                t: snapshots[k].t,
                gap: gaps[k],
                lambda1,
            });
            continue;
        }
        if k < 1 || k + 1 >= gaps.len() {
            continue;
        }
        // flanks: the two segments on either side of the sampled minimum,
        // using the steeper side's outer sample when available
        let (t, g) = (|i: usize| snapshots[i].t, |i: usize| gaps[i]);
        let left = if k >= 2 { (k - 2, k - 1) } else { (k - 1, k) };
        let right = if k + 2 < gaps.len() { (k + 1, k + 2) } else { (k, k + 1) };
        let sl = (g(left.1) - g(left.0)) / (t(left.1) - t(left.0));
        let sr = (g(right.1) - g(right.0)) / (t(right.1) - t(right.0));
        if !(sl < 0.0 && sr > 0.0) {
            continue;
        }
        // intersection of the two flank lines
        let tc = (g(right.0) - sr * t(right.0) - g(left.1) + sl * t(left.1)) / (sl - sr);
        let gc = g(left.1) + sl * (tc - t(left.1));
        if gc < threshold && tc >= t(k - 1) && tc <= t(k + 1) {
            out.push(Crossing {
                t: tc,
                gap: gc.max(0.0),
                lambda1,
            });
        }
    }
    out
}

/// Solve `S[n] v = zeta` by integrating the flux form twice, with the gauge
/// `v[0] = 0`. Returns `n_points + 1` values; the last is the wrap value,
/// which closes to zero up to rounding.
pub fn solve_direct(grid: &Grid1D, n: &[f64], zeta: &[f64]) -> Result<Vec<f64>> {
    require_positive(n)?;
    check_mean_free(grid, zeta)?;
    // flux F_{j+1/2} = -xi_j + c, xi_j = dx * sum_{i<=j} zeta_i
    let dx = grid.dx();
    let mut xi = 0.0;
    let flux: Vec<f64> = zeta
        .iter()
        .map(|z| {
            xi += dx * z;
            -xi
        })
        .collect();
    integrate_flux(grid, n, &flux)
}

/// Direct inversion in the density-only form: given the target density, the
/// density and potential of the current iterate, and the mean-free
/// `d_t^2 (n_current - n_target)` at one time step, return the next potential
/// with `v[0] = 0`.
///
/// The flux of the new potential is `n_current d_x v_current - inner`, where
/// `inner` is the running integral of the acceleration difference; a constant
/// is then removed so the potential closes periodically.
pub fn invert_direct(
    grid: &Grid1D,
    n_target: &[f64],
    n_current: &[f64],
    v_current: &[f64],
    accel_diff: &[f64],
) -> Result<Vec<f64>> {
    require_positive(n_target)?;
    check_mean_free(grid, accel_diff)?;
    let dx = grid.dx();
    let n_cur_half = grid.midpoints(n_current)?;
    let dv = grid.forward_difference(v_current)?;
    let mut inner = 0.0;
    let flux: Vec<f64> = (0..grid.n_points())
        .map(|j| {
            inner += dx * accel_diff[j];
            n_cur_half[j] * dv[j] - inner
        })
        .collect();
    integrate_flux(grid, n_target, &flux)
}

/// `v[j+1] = v[j] + dx (flux[j] - c) / n_half[j]` with `c` chosen so that
/// `v` returns to `v[0] = 0` after one full turn.
fn integrate_flux(grid: &Grid1D, n: &[f64], flux: &[f64]) -> Result<Vec<f64>> {
    let n_half = grid.midpoints(n)?;
    let weight_total: f64 = n_half.iter().map(|h| 1.0 / h).sum();
    let flux_total: f64 = flux.iter().zip(&n_half).map(|(f, h)| f / h).sum();
    let c = flux_total / weight_total;
    let dx = grid.dx();
    let mut v = Vec::with_capacity(grid.n_points() + 1);
    let mut acc = 0.0;
    v.push(acc);
    for (f, h) in flux.iter().zip(&n_half) {
        acc += dx * (f - c) / h;
        v.push(acc);
    }
    Ok(v)
}
