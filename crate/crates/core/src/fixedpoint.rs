//! The potential-to-potential map `F = V ∘ P` and its fixed-point iteration.
//!
//! `P` propagates the fixed initial state under a trial potential; `V` solves
//! the Sturm-Liouville problem for the next potential from the target density
//! and the density/potential of the trial. A potential that generates the
//! target density is a fixed point of `F`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{Closure, Grid1D, SpaceTimeField, TimeGrid};
use crate::norms::{alpha_norm, NormConfig, Order};
use crate::observables::{acceleration_difference, density, initial_condition_mismatch, DensityTrajectory};
use crate::propagator::{propagate, InitialState};
use crate::sturm::invert_direct;

/// Abort when the step norm exceeds this multiple of the first step norm.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

pub const DEFAULT_ALPHA: f64 = 10.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
/// Allowed `|n(x, t0) - |psi0|^2|` for a target density.
pub const INITIAL_DENSITY_TOLERANCE: f64 = 1e-8;
/// Absolute slack on `|d_t n(x, t0) + d_x j(x, t0)|` on top of the stencil
/// error estimate.
pub const DEFAULT_RATE_TOLERANCE: f64 = 1e-3;
/// Multiple of the stencil error estimate allowed in the rate check.
pub const RATE_STENCIL_FACTOR: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct InversionProblem {
    n_target: DensityTrajectory,
    psi0: InitialState,
    v_initial_guess: SpaceTimeField,
    norm: NormConfig,
    max_iterations: usize,
    tolerance: f64,
    reference: Option<SpaceTimeField>,
    mode_cutoff: Option<usize>,
}

impl InversionProblem {
    pub fn new(n_target: DensityTrajectory, psi0: InitialState) -> Result<Self> {
        Self::with_rate_tolerance(n_target, psi0, DEFAULT_RATE_TOLERANCE)
    }

    /// Validates the target against the initial state: the target must be
    /// strictly positive, start at `|psi0|^2`, and start with the rate of
    /// change the initial current implies.
    pub fn with_rate_tolerance(
        n_target: DensityTrajectory,
        psi0: InitialState,
        rate_tolerance: f64,
    ) -> Result<Self> {
        n_target.require_positive()?;
        let mismatch = initial_condition_mismatch(&n_target, &psi0)?;
        if mismatch.density > INITIAL_DENSITY_TOLERANCE {
            return Err(Error::ContractViolation(format!(
                "target density differs from |psi0|^2 by {:e} at t0",
                mismatch.density
            )));
        }
        if mismatch.rate > rate_tolerance + RATE_STENCIL_FACTOR * mismatch.stencil_error {
            return Err(Error::ContractViolation(format!(
                "target density rate differs from -d_x j[psi0] by {:e} at t0",
                mismatch.rate
            )));
        }
        let field = n_target.field();
        let v0 = SpaceTimeField::zeros(*field.grid(), *field.times());
        Ok(Self {
            n_target,
            psi0,
            v_initial_guess: v0,
            norm: NormConfig {
                p: Order::One,
                alpha: DEFAULT_ALPHA,
            },
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: DEFAULT_TOLERANCE,
            reference: None,
            mode_cutoff: None,
        })
    }

    pub fn with_initial_guess(mut self, v0: SpaceTimeField) -> Result<Self> {
        self.n_target.field().check_same_mesh(&v0, "initial guess")?;
        v0.check_finite()?;
        self.v_initial_guess = v0;
        Ok(self)
    }

    pub fn with_norm(mut self, norm: NormConfig) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    /// A known generating potential to report errors against. It is moved to
    /// the gauge `v(a, t) = 0` used by the iterates.
    pub fn with_reference(mut self, v_true: SpaceTimeField) -> Result<Self> {
        self.n_target.field().check_same_mesh(&v_true, "reference potential")?;
        self.reference = Some(gauge_fix(&v_true));
        Ok(self)
    }

    /// Restrict every V-step output to ring Fourier modes `|m| <= cutoff`,
    /// `m` counting periods per ring length. Off by default.
    pub fn with_mode_cutoff(mut self, cutoff: Option<usize>) -> Self {
        self.mode_cutoff = cutoff;
        self
    }

    pub fn mode_cutoff(&self) -> Option<usize> {
        self.mode_cutoff
    }

    pub fn grid(&self) -> &Grid1D {
        self.n_target.grid()
    }

    pub fn times(&self) -> &TimeGrid {
        self.n_target.field().times()
    }

    pub fn n_target(&self) -> &DensityTrajectory {
        &self.n_target
    }

    pub fn psi0(&self) -> &InitialState {
        &self.psi0
    }

    pub fn norm(&self) -> &NormConfig {
        &self.norm
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn initial_guess(&self) -> &SpaceTimeField {
        &self.v_initial_guess
    }

    pub fn reference(&self) -> Option<&SpaceTimeField> {
        self.reference.as_ref()
    }
}

/// Shift every time slice so that `v(a, t) = 0`.
pub fn gauge_fix(v: &SpaceTimeField) -> SpaceTimeField {
    let mut out = v.clone();
    for k in 0..out.n_times() {
        let row = out.slice_mut(k);
        let c = row[0];
        row.iter_mut().for_each(|x| *x -= c);
    }
    out
}

/// Drop every ring Fourier mode above `cutoff` from each time slice.
pub fn band_limit(v: &SpaceTimeField, cutoff: usize) -> SpaceTimeField {
    let n = v.grid().n_points();
    if 2 * cutoff >= n {
        return v.clone();
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut out = v.clone();
    let scale = 1.0 / n as f64;
    let rows: Vec<Vec<f64>> = (0..v.n_times())
        .into_par_iter()
        .map(|k| {
            let mut buf: Vec<Complex64> = v.slice(k).iter().map(|&x| Complex64::new(x, 0.0)).collect();
            forward.process(&mut buf);
            buf[cutoff + 1..n - cutoff].iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            inverse.process(&mut buf);
            buf.iter().map(|z| z.re * scale).collect()
        })
        .collect();
    for (k, row) in rows.into_iter().enumerate() {
        out.slice_mut(k).copy_from_slice(&row);
    }
    out
}

/// Density generated by `v_in`, followed by the inversion step.
pub fn apply_f_with_density(
    problem: &InversionProblem,
    v_in: &SpaceTimeField,
) -> Result<(SpaceTimeField, DensityTrajectory)> {
    problem.n_target.field().check_same_mesh(v_in, "trial potential")?;
    v_in.check_finite()?;
    let times = *problem.times();
    let grid = *problem.grid();
    let psi = propagate(&problem.psi0, v_in, &times, 1)?;
    let n_current = density(&psi)?;
    let accel = acceleration_difference(&problem.n_target, &n_current)?;

    let n = grid.n_points();
    let target = problem.n_target.field();
    let rows = (0..times.n_times())
        .into_par_iter()
        .map(|k| {
            let mut v = invert_direct(
                &grid,
                target.slice(k),
                n_current.field().slice(k),
                v_in.slice(k),
                accel.slice(k),
            )?;
            v.truncate(n);
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SpaceTimeField::from_rows(grid, times, rows)?;
    if let Some(cutoff) = problem.mode_cutoff {
        out = gauge_fix(&band_limit(&out, cutoff));
    }
    Ok((out, n_current))
}

/// `F[v_in]`, in the gauge `v(a, t) = 0`.
pub fn apply_f(problem: &InversionProblem, v_in: &SpaceTimeField) -> Result<SpaceTimeField> {
    Ok(apply_f_with_density(problem, v_in)?.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Index of the new iterate; the step is `v_k - v_{k-1}`.
    pub k: usize,
    pub alpha_step: f64,
    pub sup_step: f64,
    /// Sup error against the reference on the first half of the interval.
    pub err_ref_first_half: Option<f64>,
    pub err_ref_full: Option<f64>,
    /// `alpha_step_k / alpha_step_{k-1}`, from the second step on.
    pub contraction_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationReport {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations_run: usize,
}

impl IterationReport {
    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn record(&self, k: usize) -> Option<&IterationRecord> {
        self.records.get(k.checked_sub(1)?)
    }
}

/// Sup-norm error split into the first half of the time interval and the
/// whole interval.
pub fn reference_errors(v: &SpaceTimeField, reference: &SpaceTimeField) -> Result<(f64, f64)> {
    let diff = v.sub(reference)?;
    let half = diff.times().n_steps() / 2;
    let first = (0..=half)
        .flat_map(|k| diff.slice(k).iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((first, diff.max_abs()))
}

/// Iterate `v_{k+1} = F[v_k]` until the alpha-norm step drops to the
/// tolerance or the iteration budget runs out.
pub fn iterate(problem: &InversionProblem) -> Result<(SpaceTimeField, IterationReport)> {
    iterate_with(problem, |_, _| {})
}

/// Like [`iterate`], calling `observe(k, v_k)` after every new iterate.
pub fn iterate_with(
    problem: &InversionProblem,
    mut observe: impl FnMut(usize, &SpaceTimeField),
) -> Result<(SpaceTimeField, IterationReport)> {
    let mut report = IterationReport::default();
    let mut v = problem.v_initial_guess.clone();
    let mut first_step: Option<f64> = None;
    let mut prev_step: Option<f64> = None;

    for k in 1..=problem.max_iterations {
        let next = apply_f(problem, &v)?;
        let step = next.sub(&v)?;
        let alpha_step = alpha_norm(&step, &problem.norm)?;
        let (err_ref_first_half, err_ref_full) = match &problem.reference {
            Some(r) => {
                let (a, b) = reference_errors(&next, r)?;
                (Some(a), Some(b))
            }
            None => (None, None),
        };
        report.records.push(IterationRecord {
            k,
            alpha_step,
            sup_step: step.max_abs(),
            err_ref_first_half,
            err_ref_full,
            contraction_ratio: prev_step.map(|p| alpha_step / p),
        });
        report.iterations_run = k;
        v = next;
        observe(k, &v);

        if alpha_step <= problem.tolerance {
            report.converged = true;
            break;
        }
        let first = *first_step.get_or_insert(alpha_step);
        if !alpha_step.is_finite() || alpha_step > DIVERGENCE_FACTOR * first {
            return Err(Error::Divergence {
                report: Box::new(report),
            });
        }
        prev_step = Some(alpha_step);
    }
    Ok((v, report))
}

/// `||F[v_a] - F[v_b]||_alpha / ||v_a - v_b||_alpha`.
pub fn estimate_contraction(
    problem: &InversionProblem,
    v_a: &SpaceTimeField,
    v_b: &SpaceTimeField,
) -> Result<f64> {
    let denom = alpha_norm(&v_a.sub(v_b)?, &problem.norm)?;
    if denom == 0.0 {
        return Err(Error::InvalidArgument("potentials coincide; contraction undefined".into()));
    }
    let fa = apply_f(problem, v_a)?;
    let fb = apply_f(problem, v_b)?;
    Ok(alpha_norm(&fa.sub(&fb)?, &problem.norm)? / denom)
}

/// Target density produced by a known potential, together with that
/// potential and the initial state on the working mesh.
#[derive(Debug, Clone)]
pub struct SelfGeneratedTarget {
    pub n_target: DensityTrajectory,
    pub v_true: SpaceTimeField,
    pub psi0: InitialState,
}

/// Propagate `make_psi0` under `potential(x, t)` on a mesh refined by
/// `refine` in both space and time, then restrict to `grid` x `times`.
/// `refine = 1` gives the same-mesh target.
pub fn self_generated_target(
    grid: &Grid1D,
    times: &TimeGrid,
    refine: usize,
    make_psi0: impl Fn(&Grid1D) -> Result<InitialState>,
    potential: impl Fn(f64, f64) -> f64,
) -> Result<SelfGeneratedTarget> {
    if refine == 0 {
        return Err(Error::InvalidArgument("refinement factor must be positive".into()));
    }
    if refine > 1 && grid.closure() != Closure::Open {
        return Err(Error::InvalidArgument(
            "mesh refinement needs an open grid; endpoint-inclusive rings change length".into(),
        ));
    }
    let fine_grid = if refine == 1 {
        *grid
    } else {
        Grid1D::new(grid.a(), grid.b(), grid.n_points() * refine)?
    };
    let fine_times = TimeGrid::new(times.t0(), times.t_final(), times.n_steps() * refine)?;
    let fine_v = SpaceTimeField::from_fn(fine_grid, fine_times, |t, x| potential(x, t));
    let fine_psi0 = make_psi0(&fine_grid)?;
    let psi = propagate(&fine_psi0, &fine_v, &fine_times, refine)?;

    let n = grid.n_points();
    let mut values = Vec::with_capacity(n * times.n_times());
    for row in psi.rows() {
        values.extend((0..n).map(|j| row[j * refine].norm_sqr()));
    }
    let restricted = SpaceTimeField::from_values(*grid, *times, values)?;
    let n_target = if refine == 1 {
        DensityTrajectory::new(restricted)?
    } else {
        DensityTrajectory::normalized(restricted)?
    };
    Ok(SelfGeneratedTarget {
        n_target,
        v_true: SpaceTimeField::from_fn(*grid, *times, |t, x| potential(x, t)),
        psi0: make_psi0(grid)?,
    })
}
