//! Cyclic tridiagonal solves by Sherman-Morrison corner removal.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Periodic tridiagonal matrix with constant off-diagonals:
/// `A[j][j] = diag[j]`, `A[j][j±1 mod n] = off`.
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    diag: Vec<Complex64>,
    off: Complex64,
}

impl CyclicTridiagonal {
    pub fn new(diag: Vec<Complex64>, off: Complex64) -> Result<Self> {
        if diag.len() < 3 {
            return Err(Error::Dimension(format!(
                "cyclic system needs at least 3 rows, got {}",
                diag.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let l = x[(j + n - 1) % n];
                let r = x[(j + 1) % n];
                self.diag[j] * x[j] + self.off * (l + r)
            })
            .collect()
    }

    /// Solve `A x = rhs`.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::Dimension(format!(
                "rhs has {} entries, matrix has {n} rows",
                rhs.len()
            )));
        }
        // corners: A[0][n-1] = beta, A[n-1][0] = alpha
        let alpha = self.off;
        let beta = self.off;
        let gamma = -self.diag[0];

        let mut main = self.diag.clone();
        main[0] -= gamma;
        main[n - 1] -= alpha * beta / gamma;

        let factored = Thomas::factor(&main, self.off)?;
        let x = factored.solve(rhs);

        let mut u = vec![Complex64::new(0.0, 0.0); n];
        u[0] = gamma;
        u[n - 1] = alpha;
        let z = factored.solve(&u);

        let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
        Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
    }
}

/// LU factors of a plain tridiagonal matrix with constant off-diagonals.
struct Thomas {
    off: Complex64,
    // pivots of the forward sweep
    beta: Vec<Complex64>,
}

impl Thomas {
    fn factor(main: &[Complex64], off: Complex64) -> Result<Self> {
        let mut beta = Vec::with_capacity(main.len());
        let mut prev = main[0];
        beta.push(prev);
        for (j, &m) in main.iter().enumerate().skip(1) {
            if prev.norm() == 0.0 {
                return Err(Error::ContractViolation(format!(
                    "zero pivot at row {}",
                    j - 1
                )));
            }
            prev = m - off * off / prev;
            beta.push(prev);
        }
        if prev.norm() == 0.0 {
            return Err(Error::ContractViolation("zero final pivot".into()));
        }
        Ok(Self { off, beta })
    }

    fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.beta.len();
        let mut y = Vec::with_capacity(n);
        y.push(rhs[0] / self.beta[0]);
        for j in 1..n {
            let v = (rhs[j] - self.off * y[j - 1]) / self.beta[j];
            y.push(v);
        }
        for j in (0..n - 1).rev() {
            let v = y[j] - self.off / self.beta[j] * y[j + 1];
            y[j] = v;
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_against_dense_apply() {
        let n = 17;
        let diag: Vec<Complex64> = (0..n).map(|j| c(3.0 + 0.1 * j as f64, 0.4 - 0.03 * j as f64)).collect();
        let a = CyclicTridiagonal::new(diag, c(-0.7, 0.25)).unwrap();
        let x_true: Vec<Complex64> = (0..n).map(|j| c((j as f64).sin(), (j as f64 * 0.3).cos())).collect();
        let rhs = a.apply(&x_true);
        let x = a.solve(&rhs).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).norm() < 1e-12);
        }
    }

    #[test]
    fn crank_nicolson_like_system() {
        // 1 + i a H with the periodic Laplacian, as used by the propagator
        let n = 64;
        let dx = 2.0 / n as f64;
        let a = 0.5 * 1e-3;
        let diag: Vec<Complex64> = (0..n).map(|_| c(1.0, a / (dx * dx))).collect();
        let m = CyclicTridiagonal::new(diag, c(0.0, -0.5 * a / (dx * dx))).unwrap();
        let x_true: Vec<Complex64> = (0..n).map(|j| c(1.0 + (j as f64).cos(), 0.2)).collect();
        let x = m.solve(&m.apply(&x_true)).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).norm() < 1e-11);
        }
    }

    #[test]
    fn rejects_wrong_rhs_length() {
        let a = CyclicTridiagonal::new(vec![c(2.0, 0.0); 5], c(-1.0, 0.0)).unwrap();
        assert!(a.solve(&[c(1.0, 0.0); 4]).is_err());
        assert!(CyclicTridiagonal::new(vec![c(2.0, 0.0); 2], c(-1.0, 0.0)).is_err());
    }
}
