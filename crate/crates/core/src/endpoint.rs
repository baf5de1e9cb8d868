//! Endpoint classification for densities that vanish like `a_p d^p` at a
//! boundary, `d` being the distance to the boundary.
//!
//! | p            | endpoint              | oscillation point |
//! |--------------|-----------------------|-------------------|
//! | p < 1        | regular               | inf (p < 2)       |
//! | 1 <= p < 3/2 | singular limit-circle | inf               |
//! | 3/2 <= p < 2 | singular limit-point  | inf               |
//! | p = 2        | singular limit-point  | a_p / 4           |
//! | p > 2        | singular limit-point  | 0                 |

use std::fmt;

use crate::error::{Error, Result};

/// Table breakpoints in `p`.
pub const BREAKPOINTS: [f64; 3] = [1.0, 1.5, 2.0];
/// Fitted exponents this close to a breakpoint are classified as the breakpoint.
pub const BREAKPOINT_SNAP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    Regular,
    LimitCircle,
    LimitPoint,
}

impl EndpointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Regular => "regular",
            Self::LimitCircle => "limit_circle",
            Self::LimitPoint => "limit_point",
        }
    }
}

impl fmt::Display for EndpointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointClass {
    pub kind: EndpointKind,
    /// Onset of the continuous spectrum; `f64::INFINITY` when there is none.
    pub sigma0: f64,
    pub p: f64,
    pub a_p: f64,
}

impl fmt::Display for EndpointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kind={} p={} a_p={} sigma0=", self.kind, self.p, self.a_p)?;
        if self.sigma0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.sigma0)
        }
    }
}

pub fn classify(p: f64, a_p: f64) -> Result<EndpointClass> {
    if !(a_p > 0.0) || !a_p.is_finite() {
        return Err(Error::InvalidArgument(format!("a_p must be positive, got {a_p}")));
    }
    if !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p must be finite, got {p}")));
    }
    let kind = if p < 1.0 {
        EndpointKind::Regular
    } else if p < 1.5 {
        EndpointKind::LimitCircle
    } else {
        EndpointKind::LimitPoint
    };
    let sigma0 = if p < 2.0 {
        f64::INFINITY
    } else if p == 2.0 {
        a_p / 4.0
    } else {
        0.0
    };
    Ok(EndpointClass { kind, sigma0, p, a_p })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub p: f64,
    pub a_p: f64,
    /// Per-sample residuals of `log n - (log a_p + p log d)`.
    pub residuals: Vec<f64>,
    pub rms_residual: f64,
}

impl DecayFit {
    /// Classify with `p` snapped to a breakpoint within [`BREAKPOINT_SNAP`];
    /// a fitted slope never lands exactly on one.
    pub fn classify(&self) -> Result<EndpointClass> {
        classify(snap_exponent(self.p, BREAKPOINT_SNAP), self.a_p)
    }
}

pub fn snap_exponent(p: f64, tol: f64) -> f64 {
    BREAKPOINTS
        .iter()
        .copied()
        .find(|b| (p - b).abs() <= tol)
        .unwrap_or(p)
}

/// Least-squares fit of `log n = log a_p + p log d` over a window of samples
/// at distances `d` from the boundary.
pub fn fit_decay(distances: &[f64], n: &[f64]) -> Result<DecayFit> {
    if distances.len() != n.len() {
        return Err(Error::Dimension("distances and densities differ in length".into()));
    }
    if n.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "decay fit needs at least 4 samples, got {}",
            n.len()
        )));
    }
    if let Some(index) = n.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveDensity { index, value: n[index] });
    }
    if distances.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidArgument("distances must be positive".into()));
    }
    let xs: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-14 * m {
        return Err(Error::InvalidArgument("degenerate window: distances coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    let log_a = my - p * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (log_a + p * x)).collect();
    let rms_residual = (residuals.iter().map(|r| r * r).sum::<f64>() / m).sqrt();
    Ok(DecayFit {
        p,
        a_p: log_a.exp(),
        residuals,
        rms_residual,
    })
}

/// Which end of a sampled profile to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Lower,
    Upper,
}

/// Fit the `window` samples nearest to `boundary`. Samples sitting exactly on
/// the boundary (distance zero) are skipped.
pub fn fit_profile(
    xs: &[f64],
    n: &[f64],
    boundary_x: f64,
    side: Boundary,
    window: usize,
) -> Result<DecayFit> {
    if xs.len() != n.len() {
        return Err(Error::Dimension("positions and densities differ in length".into()));
    }
    let mut pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(n)
        .map(|(&x, &v)| {
            let d = match side {
                Boundary::Lower => x - boundary_x,
                Boundary::Upper => boundary_x - x,
            };
            (d, v)
        })
        .filter(|(d, _)| *d > 0.0)
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.truncate(window);
    let (d, v): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    fit_decay(&d, &v)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use proptest::prelude::*;

    use super::*;

    #[test]
    fn table_rows() {
        let c = classify(0.5, 1.0).unwrap();
        assert_eq!((c.kind, c.sigma0), (EndpointKind::Regular, f64::INFINITY));
        let c = classify(2.0, 1.0).unwrap();
        assert_eq!((c.kind, c.sigma0), (EndpointKind::LimitPoint, 0.25));
        let c = classify(3.0, 5.0).unwrap();
        assert_eq!((c.kind, c.sigma0), (EndpointKind::LimitPoint, 0.0));
        assert_eq!(classify(1.0, 1.0).unwrap().kind, EndpointKind::LimitCircle);
        assert_eq!(classify(1.5, 1.0).unwrap().kind, EndpointKind::LimitPoint);
        assert_eq!(classify(1.25, 2.0).unwrap().sigma0, f64::INFINITY);
        assert_eq!(classify(1.75, 2.0).unwrap().sigma0, f64::INFINITY);
        assert!(classify(2.0, 0.0).is_err());
        assert!(classify(2.0, -1.0).is_err());
    }

    #[test]
    fn display_line() {
        assert_eq!(classify(2.0, 1.0).unwrap().to_string(), "kind=limit_point p=2 a_p=1 sigma0=0.25");
        assert_eq!(classify(0.5, 1.0).unwrap().to_string(), "kind=regular p=0.5 a_p=1 sigma0=inf");
    }

    #[test]
    fn exact_power_laws() {
        let d: Vec<f64> = (1..=6).map(|i| 0.01 * i as f64).collect();
        let n: Vec<f64> = d.iter().map(|x| 3.0 * x).collect();
        let fit = fit_decay(&d, &n).unwrap();
        assert!((fit.p - 1.0).abs() < 1e-10 && (fit.a_p - 3.0).abs() < 1e-10);
        assert_eq!(fit.classify().unwrap().kind, EndpointKind::LimitCircle);

        let flat = fit_decay(&d, &[0.5; 6]).unwrap();
        assert!(flat.p.abs() < 1e-12);
        assert_eq!(flat.classify().unwrap().kind, EndpointKind::Regular);
    }

    #[test]
    fn cos_squared_near_half_pi() {
        // cos^2(x) = d^2 - d^4/3 + ... with d = pi/2 - x
        let mut last = f64::INFINITY;
        for h in [1e-2, 5e-3, 2.5e-3] {
            let xs: Vec<f64> = (1..=6).map(|i| FRAC_PI_2 - h * i as f64).collect();
            let n: Vec<f64> = xs.iter().map(|x| x.cos().powi(2)).collect();
            let fit = fit_profile(&xs, &n, FRAC_PI_2, Boundary::Upper, 6).unwrap();
            let err = (fit.p - 2.0).abs() + (fit.a_p - 1.0).abs();
            assert!(err < last);
            last = err;
            let c = fit.classify().unwrap();
            assert_eq!(c.kind, EndpointKind::LimitPoint);
            assert_eq!(c.p, 2.0);
            assert!((c.sigma0 - 0.25).abs() < 1e-3);
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn snapping() {
        assert_eq!(snap_exponent(1.996, BREAKPOINT_SNAP), 2.0);
        assert_eq!(snap_exponent(1.505, BREAKPOINT_SNAP), 1.5);
        assert_eq!(snap_exponent(1.2, BREAKPOINT_SNAP), 1.2);
        assert_eq!(snap_exponent(2.5, BREAKPOINT_SNAP), 2.5);
    }

    #[test]
    fn fit_errors() {
        let d = [0.1, 0.2, 0.3, 0.4];
        assert!(matches!(
            fit_decay(&d, &[1.0, 0.0, 1.0, 1.0]),
            Err(Error::NonPositiveDensity { index: 1, .. })
        ));
        assert!(fit_decay(&d[..3], &[1.0; 3]).is_err());
        assert!(fit_decay(&[0.1; 4], &[1.0; 4]).is_err());
    }

    proptest! {
        #[test]
        fn piecewise_constant_kind(p in -5.0f64..10.0, a in 0.01f64..100.0) {
            let c = classify(p, a).unwrap();
            let expected = if p < 1.0 { EndpointKind::Regular } else if p < 1.5 { EndpointKind::LimitCircle } else { EndpointKind::LimitPoint };
            prop_assert_eq!(c.kind, expected);
            if p < 2.0 { prop_assert!(c.sigma0.is_infinite()); } else if p > 2.0 { prop_assert_eq!(c.sigma0, 0.0); }
        }

        #[test]
        fn sigma0_linear_on_quadratic_slice(a in 0.01f64..100.0, s in 0.01f64..100.0) {
            let base = classify(2.0, a).unwrap().sigma0;
            let scaled = classify(2.0, s * a).unwrap().sigma0;
            prop_assert!((scaled - s * base).abs() <= 1e-12 * scaled);
        }

        #[test]
        fn recovers_power_law(p in 0.2f64..4.0, a in 0.1f64..10.0, d0 in 1e-4f64..1e-1) {
            let d: Vec<f64> = (1..=8).map(|i| d0 * i as f64).collect();
            let n: Vec<f64> = d.iter().map(|x| a * x.powf(p)).collect();
            let fit = fit_decay(&d, &n).unwrap();
            prop_assert!((fit.p - p).abs() <= 1e-6 * p);
            prop_assert!((fit.a_p - a).abs() <= 1e-6 * a);
        }
    }
}
