//! Crank-Nicolson propagation of a single particle on the ring.
//!
//! The Hamiltonian is `H = -1/2 Δ + v(x, t)` with the three-point periodic
//! Laplacian. Each step uses the potential averaged over the two endpoints of
//! the step, which keeps the scheme second order for time-dependent `v`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Closure, Grid1D, SpaceTimeField, TimeGrid, WaveTrajectory};
use crate::tridiag::CyclicTridiagonal;

/// A normalized initial wavefunction on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    grid: Grid1D,
    psi0: Vec<Complex64>,
}

impl InitialState {
    /// Normalizes `psi0` so that `dx * sum |psi|^2 = 1`.
    pub fn new(grid: Grid1D, psi0: Vec<Complex64>) -> Result<Self> {
        if psi0.len() != grid.n_points() {
            return Err(Error::Dimension(format!(
                "initial state has {} samples, grid has {}",
                psi0.len(),
                grid.n_points()
            )));
        }
        if let Some(index) = psi0.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { step: 0, index });
        }
        let norm2 = grid.dx() * psi0.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if norm2 == 0.0 {
            return Err(Error::InvalidArgument("initial state is identically zero".into()));
        }
        let scale = norm2.sqrt().recip();
        Ok(Self {
            grid,
            psi0: psi0.into_iter().map(|z| z * scale).collect(),
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi0
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi0.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// True when the ring covers [-1, 1], either with `b = 1` identified with
/// `a = -1` or with both endpoints stored.
fn is_unit_ring(grid: &Grid1D) -> bool {
    let tol = 1e-12;
    (grid.a() + 1.0).abs() < tol && (grid.b() - 1.0).abs() < tol
}

fn require_unit_ring(grid: &Grid1D) -> Result<()> {
    if is_unit_ring(grid) {
        Ok(())
    } else {
        Err(Error::WrongInterval {
            a: grid.a(),
            b: grid.b(),
        })
    }
}

/// `exp(-1/(1-x^2)) + 1`, with the bump term taken as zero for `|x| >= 1`.
pub fn bump_profile(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        1.0
    } else {
        (-1.0 / s).exp() + 1.0
    }
}

/// The smooth-bump initial state on the ring [-1, 1].
pub fn make_initial_bump(grid: &Grid1D) -> Result<InitialState> {
    require_unit_ring(grid)?;
    let psi = grid
        .points()
        .into_iter()
        .map(|x| Complex64::new(bump_profile(x), 0.0))
        .collect();
    InitialState::new(*grid, psi)
}

/// `exp(i k x)`, normalized.
pub fn make_plane_wave(grid: &Grid1D, k: f64) -> Result<InitialState> {
    let psi = grid
        .points()
        .into_iter()
        .map(|x| Complex64::from_polar(1.0, k * x))
        .collect();
    InitialState::new(*grid, psi)
}

/// `sin^2(pi x) sin(10 t)`.
pub fn driving_potential(x: f64, t: f64) -> f64 {
    (PI * x).sin().powi(2) * (10.0 * t).sin()
}

pub fn make_driving_potential(grid: &Grid1D, times: &TimeGrid) -> Result<SpaceTimeField> {
    require_unit_ring(grid)?;
    let mut v = SpaceTimeField::from_fn(*grid, *times, |t, x| driving_potential(x, t));
    // sin^2(pi x) is not exactly zero at x = ±1 in floating point
    for k in 0..v.n_times() {
        let row = v.slice_mut(k);
        row[0] = 0.0;
        if grid.closure() == Closure::EndpointInclusive {
            let last = row.len() - 1;
            row[last] = 0.0;
        }
    }
    Ok(v)
}

/// Crank-Nicolson stepper for a fixed grid.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    grid: Grid1D,
}

impl CrankNicolson {
    pub fn new(grid: Grid1D) -> Self {
        Self { grid }
    }

    /// One step `psi <- e^{-i c dt} (1 + i dt/2 H)^-1 (1 - i dt/2 H) psi` with
    /// `H = -1/2 Δ + diag(v_mid - c)` and `c` the spatial mean of `v_mid`.
    /// Taking the mean out as an exact phase keeps densities independent of
    /// spatially constant shifts. A negative `dt` runs the step backwards.
    pub fn step(&self, psi: &[Complex64], v_mid: &[f64], dt: f64) -> Result<Vec<Complex64>> {
        let n = self.grid.n_points();
        if psi.len() != n || v_mid.len() != n {
            return Err(Error::Dimension("step inputs must match the grid".into()));
        }
        let c = v_mid.iter().sum::<f64>() / n as f64;
        let inv_dx2 = 1.0 / (self.grid.dx() * self.grid.dx());
        let half = 0.5 * dt;
        // H[j][j] = 1/dx^2 + v_j, H[j][j±1] = -1/(2 dx^2)
        let h_off = -0.5 * inv_dx2;
        let i = Complex64::i();

        let rhs: Vec<Complex64> = (0..n)
            .map(|j| {
                let l = psi[self.grid.prev(j)];
                let r = psi[self.grid.next(j)];
                let h_psi = (inv_dx2 + v_mid[j] - c) * psi[j] + h_off * (l + r);
                psi[j] - i * half * h_psi
            })
            .collect();
        let diag = v_mid
            .iter()
            .map(|&v| Complex64::new(1.0, half * (inv_dx2 + v - c)))
            .collect();
        let mut out = CyclicTridiagonal::new(diag, Complex64::new(0.0, half * h_off))?.solve(&rhs)?;
        if c != 0.0 {
            let phase = Complex64::from_polar(1.0, -c * dt);
            out.iter_mut().for_each(|z| *z *= phase);
        }
        Ok(out)
    }
}

/// Propagate `psi0` through `v`, keeping every `keep_every`-th step.
///
/// The returned trajectory lives on the subsampled time grid.
pub fn propagate(
    psi0: &InitialState,
    v: &SpaceTimeField,
    times: &TimeGrid,
    keep_every: usize,
) -> Result<WaveTrajectory> {
    if v.grid() != psi0.grid() || v.times() != times {
        return Err(Error::MeshMismatch(
            "potential must share the initial state's grid and the time grid".into(),
        ));
    }
    v.check_finite()?;
    let kept = times.subsample(keep_every)?;
    let grid = *psi0.grid();
    let n = grid.n_points();
    let stepper = CrankNicolson::new(grid);

    let mut values = Vec::with_capacity(n * kept.n_times());
    let mut psi = psi0.psi().to_vec();
    values.extend_from_slice(&psi);
    let mut v_mid = vec![0.0; n];
    for k in 0..times.n_steps() {
        let (lo, hi) = (v.slice(k), v.slice(k + 1));
        for j in 0..n {
            v_mid[j] = 0.5 * (lo[j] + hi[j]);
        }
        psi = stepper.step(&psi, &v_mid, times.dt())?;
        if (k + 1) % keep_every == 0 {
            values.extend_from_slice(&psi);
        }
    }
    WaveTrajectory::from_values(grid, kept, values)
}
