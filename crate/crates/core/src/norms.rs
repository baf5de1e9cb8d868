//! Spatial p-norms and the exponentially weighted supremum over time.
//!
//! `||f||_alpha^p = max_k exp(-alpha (t_k - t0)) ||f(t_k)||^p`. Large `alpha`
//! discounts late-time differences; `alpha = 0` gives the plain sup-in-time
//! norm `||f||_0`.

use crate::error::{Error, Result};
use crate::grid::{Grid1D, SpaceTimeField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    One,
    Two,
}

impl Order {
    pub fn from_int(p: u32) -> Result<Self> {
        match p {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            _ => Err(Error::InvalidArgument(format!("unsupported norm order p={p}"))),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Two => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormConfig {
    pub p: Order,
    pub alpha: f64,
}

impl NormConfig {
    pub fn new(p: Order, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(Self { p, alpha })
    }
}

pub fn space_norm(grid: &Grid1D, f: &[f64], p: Order) -> Result<f64> {
    match p {
        Order::One => grid.quadrature(&f.iter().map(|v| v.abs()).collect::<Vec<_>>()),
        Order::Two => Ok(grid.quadrature(&f.iter().map(|v| v * v).collect::<Vec<_>>())?.sqrt()),
    }
}

/// `||f(t_k)||^p` for every retained time.
fn powered_slices(f: &SpaceTimeField, p: Order) -> Result<Vec<f64>> {
    f.rows()
        .map(|row| Ok(space_norm(f.grid(), row, p)?.powf(p.as_f64())))
        .collect()
}

pub fn alpha_norm(f: &SpaceTimeField, cfg: &NormConfig) -> Result<f64> {
    Ok(alpha_norm_powered(f, cfg)?.powf(1.0 / cfg.p.as_f64()))
}

/// `||f||_alpha^p`, restricted to the time steps `range`.
pub fn alpha_norm_window(
    f: &SpaceTimeField,
    cfg: &NormConfig,
    range: std::ops::Range<usize>,
) -> Result<f64> {
    if range.is_empty() || range.end > f.n_times() {
        return Err(Error::Dimension(format!("bad time window {range:?}")));
    }
    let t0 = f.times().t0();
    let mut best = 0.0f64;
    for k in range {
        let slice = space_norm(f.grid(), f.slice(k), cfg.p)?.powf(cfg.p.as_f64());
        best = best.max((-cfg.alpha * (f.times().time(k) - t0)).exp() * slice);
    }
    Ok(best.powf(1.0 / cfg.p.as_f64()))
}

fn alpha_norm_powered(f: &SpaceTimeField, cfg: &NormConfig) -> Result<f64> {
    if f.n_times() == 0 {
        return Err(Error::Dimension("empty time grid".into()));
    }
    let t0 = f.times().t0();
    Ok(powered_slices(f, cfg.p)?
        .into_iter()
        .enumerate()
        .map(|(k, s)| (-cfg.alpha * (f.times().time(k) - t0)).exp() * s)
        .fold(0.0, f64::max))
}

/// The three sides of `e^{-alpha (T - t0)} ||f||_0^p <= ||f||_alpha^p <= ||f||_0^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceBounds {
    pub lower: f64,
    pub alpha_value: f64,
    pub upper: f64,
}

pub fn check_equivalence(f: &SpaceTimeField, cfg: &NormConfig) -> Result<EquivalenceBounds> {
    let sup0 = alpha_norm_powered(f, &NormConfig { alpha: 0.0, ..*cfg })?;
    let span = f.times().t_final() - f.times().t0();
    let bounds = EquivalenceBounds {
        lower: (-cfg.alpha * span).exp() * sup0,
        alpha_value: alpha_norm_powered(f, cfg)?,
        upper: sup0,
    };
    if bounds.lower <= bounds.alpha_value && bounds.alpha_value <= bounds.upper {
        Ok(bounds)
    } else {
        Err(Error::InvariantViolation {
            lower: bounds.lower,
            alpha_value: bounds.alpha_value,
            upper: bounds.upper,
        })
    }
}
