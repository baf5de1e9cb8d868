//! Periodic spatial grid, time grid, sampled fields, and the quadrature and
//! finite-difference primitives everything else is built on.
//!
//! Fields are stored time-major: `values[k * n_points + j]` is the sample at
//! time step `k` and grid point `j`.

use std::ops::{Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// How the stored samples close up into a ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    /// Samples at `a + j dx`, `j < n_points`, with `dx = (b - a) / n_points`.
    /// The point `b` is identified with `a` and never stored.
    Open,
    /// Samples at `a + j dx` with `dx = (b - a) / (n_points - 1)`, so both
    /// `a` and `b` are stored and the ring closes with one extra cell from
    /// `b` back to `a` (ring length `b - a + dx`).
    EndpointInclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n_points: usize,
    dx: f64,
    closure: Closure,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 8;

    pub fn new(a: f64, b: f64, n_points: usize) -> Result<Self> {
        Self::validate(a, b, n_points)?;
        Ok(Self {
            a,
            b,
            n_points,
            dx: (b - a) / n_points as f64,
            closure: Closure::Open,
        })
    }

    /// Ring whose stored samples include both `a` and `b`.
    pub fn endpoint_inclusive(a: f64, b: f64, n_points: usize) -> Result<Self> {
        Self::validate(a, b, n_points)?;
        Ok(Self {
            a,
            b,
            n_points,
            dx: (b - a) / (n_points - 1) as f64,
            closure: Closure::EndpointInclusive,
        })
    }

    fn validate(a: f64, b: f64, n_points: usize) -> Result<()> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidGrid(format!("need finite b > a, got [{a}, {b}]")));
        }
        if n_points < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} points, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        Ok(())
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    /// Circumference of the ring.
    pub fn period(&self) -> f64 {
        self.dx * self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.a + j as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    pub fn next(&self, j: usize) -> usize {
        if j + 1 == self.n_points {
            0
        } else {
            j + 1
        }
    }

    pub fn prev(&self, j: usize) -> usize {
        if j == 0 {
            self.n_points - 1
        } else {
            j - 1
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_points {
            return Err(Error::Dimension(format!(
                "expected {} samples, got {len}",
                self.n_points
            )));
        }
        Ok(())
    }

    /// `dx * sum(f)`: the periodic rectangle rule, which coincides with the
    /// trapezoid rule on a ring.
    pub fn quadrature(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f.len())?;
        Ok(self.dx * f.iter().sum::<f64>())
    }

    /// Running trapezoid integral from `a`.
    ///
    /// Returns `n_points + 1` values: `g[0] = 0`, `g[j]` approximates the
    /// integral up to `x_j`, and `g[n_points]` is the full-wrap value, which
    /// equals [`Grid1D::quadrature`].
    pub fn cumulative_integral(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        let n = self.n_points;
        let mut g = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        g.push(acc);
        for j in 0..n {
            acc += 0.5 * self.dx * (f[j] + f[self.next(j)]);
            g.push(acc);
        }
        Ok(g)
    }

    /// Central difference `(f[j+1] - f[j-1]) / (2 dx)` with wraparound.
    pub fn spatial_derivative<T>(&self, f: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
    {
        self.check_len(f.len())?;
        let scale = 0.5 / self.dx;
        Ok((0..self.n_points)
            .map(|j| (f[self.next(j)] - f[self.prev(j)]) * scale)
            .collect())
    }

    /// Forward difference `(f[j+1] - f[j]) / dx`, which lives at `x_j + dx/2`.
    pub fn forward_difference(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        Ok((0..self.n_points)
            .map(|j| (f[self.next(j)] - f[j]) / self.dx)
            .collect())
    }

    /// Midpoint averages `(f[j] + f[j+1]) / 2`.
    pub fn midpoints(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        Ok((0..self.n_points)
            .map(|j| 0.5 * (f[j] + f[self.next(j)]))
            .collect())
    }

    /// Three-point periodic second derivative.
    pub fn second_derivative<T>(&self, f: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Sub<Output = T> + Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        self.check_len(f.len())?;
        let scale = 1.0 / (self.dx * self.dx);
        Ok((0..self.n_points)
            .map(|j| (f[self.next(j)] - f[j] - (f[j] - f[self.prev(j)])) * scale)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t_final: f64,
    n_steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, t_final: f64, n_steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t_final.is_finite()) || t_final <= t0 {
            return Err(Error::InvalidGrid(format!(
                "need finite t_final > t0, got [{t0}, {t_final}]"
            )));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 time steps, got {n_steps}"
            )));
        }
        Ok(Self {
            t0,
            t_final,
            n_steps,
            dt: (t_final - t0) / n_steps as f64,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_times(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_final
        } else {
            self.t0 + k as f64 * self.dt
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_times()).map(|k| self.time(k)).collect()
    }

    /// Coarser grid that keeps every `stride`-th step.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || self.n_steps % stride != 0 {
            return Err(Error::Dimension(format!(
                "stride {stride} does not divide {} steps",
                self.n_steps
            )));
        }
        Self::new(self.t0, self.t_final, self.n_steps / stride)
    }
}

/// Samples of a quantity over the full space-time mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid1D,
    times: TimeGrid,
    values: Vec<T>,
}

pub type SpaceTimeField = Field<f64>;
pub type WaveTrajectory = Field<Complex64>;

impl<T: Copy> Field<T> {
    pub fn from_values(grid: Grid1D, times: TimeGrid, values: Vec<T>) -> Result<Self> {
        let expected = grid.n_points() * times.n_times();
        if values.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {} x {} = {expected} values, got {}",
                times.n_times(),
                grid.n_points(),
                values.len()
            )));
        }
        Ok(Self { grid, times, values })
    }

    pub fn from_rows(grid: Grid1D, times: TimeGrid, rows: Vec<Vec<T>>) -> Result<Self> {
        if rows.len() != times.n_times() || rows.iter().any(|r| r.len() != grid.n_points()) {
            return Err(Error::Dimension(format!(
                "expected {} rows of {} samples",
                times.n_times(),
                grid.n_points()
            )));
        }
        Self::from_values(grid, times, rows.into_iter().flatten().collect())
    }

    pub fn filled(grid: Grid1D, times: TimeGrid, value: T) -> Self {
        Self {
            grid,
            times,
            values: vec![value; grid.n_points() * times.n_times()],
        }
    }

    /// Evaluate `f(t, x)` on every mesh node.
    pub fn from_fn(grid: Grid1D, times: TimeGrid, f: impl Fn(f64, f64) -> T) -> Self {
        let mut values = Vec::with_capacity(grid.n_points() * times.n_times());
        for k in 0..times.n_times() {
            let t = times.time(k);
            values.extend((0..grid.n_points()).map(|j| f(t, grid.x(j))));
        }
        Self { grid, times, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn n_times(&self) -> usize {
        self.times.n_times()
    }

    pub fn slice(&self, k: usize) -> &[T] {
        let n = self.grid.n_points();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [T] {
        let n = self.grid.n_points();
        &mut self.values[k * n..(k + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks(self.grid.n_points())
    }

    pub fn get(&self, k: usize, j: usize) -> T {
        self.values[k * self.grid.n_points() + j]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field {
            grid: self.grid,
            times: self.times,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Every `stride`-th time step.
    pub fn subsample_times(&self, stride: usize) -> Result<Self> {
        let times = self.times.subsample(stride)?;
        let values = (0..times.n_times())
            .flat_map(|k| self.slice(k * stride).iter().copied())
            .collect();
        Ok(Self {
            grid: self.grid,
            times,
            values,
        })
    }

    pub fn same_mesh<U>(&self, other: &Field<U>) -> bool {
        self.grid == other.grid && self.times == other.times
    }

    pub fn check_same_mesh<U>(&self, other: &Field<U>, what: &str) -> Result<()> {
        if self.same_mesh(other) {
            Ok(())
        } else {
            Err(Error::MeshMismatch(what.to_string()))
        }
    }
}

impl SpaceTimeField {
    pub fn zeros(grid: Grid1D, times: TimeGrid) -> Self {
        Self::filled(grid, times, 0.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_mesh(other, "field difference")?;
        Ok(Self {
            grid: self.grid,
            times: self.times,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn check_finite(&self) -> Result<()> {
        let n = self.grid.n_points();
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite {
                step: i / n,
                index: i % n,
            }),
            None => Ok(()),
        }
    }

    /// Second time derivative with a central three-point stencil inside and
    /// second-order one-sided four-point stencils at both ends.
    pub fn second_time_derivative(&self) -> Result<Self> {
        let steps = self.times.n_steps();
        if steps < 4 {
            return Err(Error::Dimension(format!(
                "second time derivative needs at least 4 steps, got {steps}"
            )));
        }
        let n = self.grid.n_points();
        let inv_dt2 = 1.0 / (self.times.dt() * self.times.dt());
        let mut out = vec![0.0; self.values.len()];
        let row = |k: usize| &self.values[k * n..(k + 1) * n];
        for k in 0..=steps {
            let dst = &mut out[k * n..(k + 1) * n];
            if k == 0 || k == steps {
                let (f0, f1, f2, f3) = if k == 0 {
                    (row(0), row(1), row(2), row(3))
                } else {
                    (row(k), row(k - 1), row(k - 2), row(k - 3))
                };
                for j in 0..n {
                    dst[j] = (2.0 * f0[j] - 5.0 * f1[j] + 4.0 * f2[j] - f3[j]) * inv_dt2;
                }
            } else {
                let (fm, f, fp) = (row(k - 1), row(k), row(k + 1));
                for j in 0..n {
                    dst[j] = (fp[j] - 2.0 * f[j] + fm[j]) * inv_dt2;
                }
            }
        }
        Ok(Self {
            grid: self.grid,
            times: self.times,
            values: out,
        })
    }
}
