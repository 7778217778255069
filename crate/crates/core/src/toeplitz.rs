//! Symmetric positive-definite Toeplitz systems.
//!
//! A matrix is described by its first column `r` (`r[k]` is the covariance
//! at lag `k`). Everything here is `O(n²)`; the dense Cholesky helpers exist
//! as a fallback and as an independent cross-check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Prediction-error variance (relative to `r[0]`) below which a system is
/// declared near-singular.
pub const SINGULARITY_FLOOR: f64 = 1e-14;

/// Solve `Γ x = b` by the Levinson recursion.
pub fn levinson_solve(r: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = r.len();
    if b.len() != n {
        return Err(Error::InvalidParameter(format!(
            "right-hand side has length {}, matrix has order {n}",
            b.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let r0 = r[0];
    if !(r0 > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let rho: Vec<f64> = r.iter().map(|v| v / r0).collect();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    x[0] = b[0] / r0;
    if n == 1 {
        return Ok(x);
    }
    y[0] = -rho[1];
    let mut alpha = -rho[1];
    let mut beta = 1.0;
    let mut scratch = vec![0.0; n];
    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        if beta < SINGULARITY_FLOOR {
            return Err(Error::NearSingular {
                order: k,
                variance: beta,
            });
        }
        let mut dot = 0.0;
        for i in 0..k {
            dot += rho[i + 1] * x[k - 1 - i];
        }
        let mu = (b[k] / r0 - dot) / beta;
        for i in 0..k {
            x[i] += mu * y[k - 1 - i];
        }
        x[k] = mu;
        if k < n - 1 {
            let mut dot = 0.0;
            for i in 0..k {
                dot += rho[i + 1] * y[k - 1 - i];
            }
            alpha = (-rho[k + 1] - dot) / beta;
            for i in 0..k {
                scratch[i] = y[i] + alpha * y[k - 1 - i];
            }
            y[..k].copy_from_slice(&scratch[..k]);
            y[k] = alpha;
        }
    }
    Ok(x)
}

/// Durbin–Levinson factorisation of a symmetric Toeplitz matrix.
///
/// Stores the order `n-1` forward prediction-error filter
/// `a = (1, a_1, …, a_{n-1})` and the innovation variances `v_0..v_{n-1}`.
/// Together they give the log-determinant and, through the
/// Gohberg–Semencul formula, products with the inverse.
#[derive(Debug, Clone)]
pub struct DurbinLevinson {
    filter: Vec<f64>,
    variances: Vec<f64>,
}

impl DurbinLevinson {
    pub fn new(r: &[f64]) -> Result<Self> {
        let n = r.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty Toeplitz matrix".into()));
        }
        if !(r[0] > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        // phi[j] holds the order-k predictor coefficient for lag j+1.
        let mut phi = vec![0.0; n];
        let mut prev = vec![0.0; n];
        let mut variances = Vec::with_capacity(n);
        let mut v = r[0];
        variances.push(v);
        for k in 1..n {
            let mut acc = r[k];
            for j in 0..k - 1 {
                acc -= phi[j] * r[k - 1 - j];
            }
            let kappa = acc / v;
            prev[..k - 1].copy_from_slice(&phi[..k - 1]);
            for j in 0..k - 1 {
                phi[j] = prev[j] - kappa * prev[k - 2 - j];
            }
            phi[k - 1] = kappa;
            v *= 1.0 - kappa * kappa;
            if v < SINGULARITY_FLOOR * r[0] {
                return Err(Error::NearSingular {
                    order: k,
                    variance: v / r[0],
                });
            }
            variances.push(v);
        }
        let mut filter = Vec::with_capacity(n);
        filter.push(1.0);
        filter.extend(phi[..n - 1].iter().map(|c| -c));
        Ok(DurbinLevinson { filter, variances })
    }

    pub fn order(&self) -> usize {
        self.filter.len()
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn log_det(&self) -> f64 {
        self.variances.iter().map(|v| v.ln()).sum()
    }

    fn backward(&self) -> Vec<f64> {
        let n = self.order();
        let mut b = vec![0.0; n];
        for i in 1..n {
            b[i] = self.filter[n - i];
        }
        b
    }

    /// `Γ⁻¹ x` via `Γ⁻¹ = (L(a)L(a)ᵀ − L(b)L(b)ᵀ) / v_{n-1}`.
    pub fn solve(&self, x: &[f64]) -> Vec<f64> {
        let n = self.order();
        assert_eq!(x.len(), n, "dimension mismatch");
        let a = &self.filter;
        let b = self.backward();
        let v = self.variances[n - 1];
        // Lᵀ x: (Lᵀx)_i = Σ_{j≥i} c_{j-i} x_j
        let upper = |c: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| (i..n).map(|j| c[j - i] * x[j]).sum())
                .collect()
        };
        let lower = |c: &[f64], y: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| (0..=i).map(|j| c[i - j] * y[j]).sum())
                .collect()
        };
        let ua = upper(a);
        let ub = upper(&b);
        let la = lower(a, &ua);
        let lb = lower(&b, &ub);
        la.iter().zip(&lb).map(|(p, q)| (p - q) / v).collect()
    }

    /// Sums of the diagonals of `Γ⁻¹`: `s[m] = Σ_i (Γ⁻¹)_{i,i+m}`.
    pub fn inverse_diagonal_sums(&self) -> Vec<f64> {
        let n = self.order();
        let a = &self.filter;
        let b = self.backward();
        let v = self.variances[n - 1];
        (0..n)
            .map(|m| {
                let mut s = 0.0;
                for k in 0..n - m {
                    s += (n - m - k) as f64 * (a[k] * a[k + m] - b[k] * b[k + m]);
                }
                s / v
            })
            .collect()
    }

    /// `Tr(Γ⁻¹ D)` for a symmetric Toeplitz `D` with first column `d`.
    pub fn trace_product(diag_sums: &[f64], d: &[f64]) -> f64 {
        let mut t = d[0] * diag_sums[0];
        for m in 1..d.len() {
            t += 2.0 * d[m] * diag_sums[m];
        }
        t
    }
}

/// `zᵀ D z` for a symmetric Toeplitz `D` with first column `d`.
pub fn toeplitz_quadratic(d: &[f64], z: &[f64]) -> f64 {
    let n = z.len();
    let mut q = 0.0;
    for m in 0..n {
        let c: f64 = (0..n - m).map(|i| z[i] * z[i + m]).sum();
        q += if m == 0 { d[0] * c } else { 2.0 * d[m] * c };
    }
    q
}

pub fn dense(r: &[f64]) -> DMatrix<f64> {
    let n = r.len();
    DMatrix::from_fn(n, n, |i, j| r[i.abs_diff(j)])
}

/// Dense Cholesky solve; the fallback when the recursion breaks down.
pub fn cholesky_solve(r: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let chol = dense(r).cholesky().ok_or(Error::NotPositiveDefinite)?;
    let x = chol.solve(&DVector::from_column_slice(b));
    Ok(x.iter().copied().collect())
}
