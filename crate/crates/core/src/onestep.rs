//! Gaussian likelihood of the additive series and the one-step
//! Fisher-scoring correction of an initial estimate.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::model::{AdditiveSeries, SpectralModel, Theta};
use crate::quad::{GradedMesh, LEVELS, MAX_PHASE};
use crate::toeplitz::DurbinLevinson;

/// Largest FIM condition number accepted for inversion.
pub const MAX_CONDITION: f64 = 1e12;
/// Margin used when projecting the updated estimate back into the parameter set.
pub const PROJECTION_MARGIN: f64 = 1e-3;
const COV_TOLERANCE: f64 = 1e-8;

/// Accumulate `∫_{-π}^{π} cos(kTλ)·(g, ∂g/∂θ)(λ) dλ` for `k = 0..n` on one
/// mesh. Row-major: entry `k*(d+1) + i` with `i = 0` the covariance.
fn covariance_table(model: &SpectralModel, n: usize, mesh: &GradedMesh, with_grad: bool) -> Vec<f64> {
    let t = model.theta().period() as f64;
    let d = if with_grad { model.dim() } else { 0 };
    let stride = d + 1;
    let mut acc = vec![0.0; n * stride];
    let mut grad = vec![0.0; model.dim()];
    let mut vals = vec![0.0; stride];
    for (&lambda, &w) in mesh.nodes.iter().zip(&mesh.weights) {
        let g = model.eval_into(lambda, &mut grad);
        vals[0] = 2.0 * w * g;
        for i in 0..d {
            vals[i + 1] = 2.0 * w * grad[i];
        }
        let c1 = (t * lambda).cos();
        let two_c1 = 2.0 * c1;
        let (mut prev, mut cur) = (c1, 1.0);
        for k in 0..n {
            let row = &mut acc[k * stride..(k + 1) * stride];
            for (a, v) in row.iter_mut().zip(&vals) {
                *a += v * cur;
            }
            let next = two_c1 * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    // On (0, inner) every cosine is 1 to double precision.
    let (head, head_grad) = model.origin().head_integrals(mesh.inner);
    for k in 0..n {
        acc[k * stride] += 2.0 * head;
        for i in 0..d {
            acc[k * stride + i + 1] += 2.0 * head_grad[i];
        }
    }
    acc
}

fn single_lag(model: &SpectralModel, k: usize, max_phase: f64) -> f64 {
    let t = model.theta().period();
    let mesh = GradedMesh::with_max_width((k * t) as f64, LEVELS, max_phase, pole_width(model.theta()));
    let t = t as f64;
    let mut grad = vec![0.0; model.dim()];
    let body: f64 = mesh
        .nodes
        .iter()
        .zip(&mesh.weights)
        .map(|(&l, &w)| 2.0 * w * model.eval_into(l, &mut grad) * (k as f64 * t * l).cos())
        .sum();
    body + 2.0 * model.origin().head_integrals(mesh.inner).0
}

/// `Cov(Y_0, Y_k) = ∫_{-π}^{π} e^{ikTλ} g(λ) dλ`, checked against a
/// mesh of twice the resolution.
pub fn y_autocovariance(k: i64, theta: &Theta) -> Result<f64> {
    let k = k.unsigned_abs() as usize;
    let model = SpectralModel::new(theta.clone());
    let coarse = single_lag(&model, k, MAX_PHASE);
    let fine = single_lag(&model, k, MAX_PHASE / 2.0);
    let scale = if k == 0 { fine.abs() } else { single_lag(&model, 0, MAX_PHASE) };
    if (coarse - fine).abs() > COV_TOLERANCE * fine.abs() + 1e-13 * scale || !fine.is_finite() {
        return Err(Error::Quadrature(format!(
            "lag {k} covariance did not converge: {coarse} vs {fine}"
        )));
    }
    Ok(fine)
}

/// First rows of `Γ^Y_n(θ)` and of each `∂Γ^Y_n/∂θ_i`.
#[derive(Debug, Clone)]
pub struct YCovarianceBundle {
    theta: Theta,
    gamma: Vec<f64>,
    derivatives: Vec<Vec<f64>>,
}

impl YCovarianceBundle {
    pub fn order(&self) -> usize {
        self.gamma.len()
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    /// `Cov(Y_0, Y_k)` for `k = 0..n`.
    pub fn covariances(&self) -> &[f64] {
        &self.gamma
    }

    /// First row of `∂Γ^Y/∂θ_i`, ordering `(φ(1), …, φ(T), H)`.
    pub fn derivative(&self, i: usize) -> &[f64] {
        &self.derivatives[i]
    }

    pub fn gamma_dense(&self) -> DMatrix<f64> {
        crate::toeplitz::dense(&self.gamma)
    }

    pub fn derivative_dense(&self, i: usize) -> DMatrix<f64> {
        crate::toeplitz::dense(&self.derivatives[i])
    }
}

/// Panel width resolving the seasonal peaks of `g` at `λ = 2πj/T`, whose
/// poles sit `ln(1/|φ|)/T` off the real axis.
fn pole_width(theta: &Theta) -> f64 {
    let phi = theta.phis().iter().fold(0.0f64, |m, p| m.max(p.abs()));
    2.0 * (1.0 / phi).ln() / theta.period() as f64
}

fn mesh_for(n: usize, theta: &Theta) -> GradedMesh {
    GradedMesh::with_max_width(
        (n.saturating_sub(1) * theta.period()) as f64,
        LEVELS,
        MAX_PHASE,
        pole_width(theta),
    )
}

pub fn build_bundle(n: usize, theta: &Theta) -> Result<YCovarianceBundle> {
    if n < 2 {
        return Err(invalid(format!("bundle order must be at least 2, got {n}")));
    }
    let model = SpectralModel::new(theta.clone());
    let d = model.dim();
    let table = covariance_table(&model, n, &mesh_for(n, theta), true);
    let gamma = table.iter().step_by(d + 1).copied().collect();
    let derivatives = (0..d)
        .map(|i| table.iter().skip(i + 1).step_by(d + 1).copied().collect())
        .collect();
    Ok(YCovarianceBundle {
        theta: theta.clone(),
        gamma,
        derivatives,
    })
}

fn covariances(n: usize, theta: &Theta) -> Vec<f64> {
    let model = SpectralModel::new(theta.clone());
    covariance_table(&model, n, &mesh_for(n, theta), false)
}

fn factor(gamma: &[f64]) -> Result<DurbinLevinson> {
    DurbinLevinson::new(gamma).map_err(|e| match e {
        Error::NearSingular { .. } => Error::NotPositiveDefinite,
        other => other,
    })
}

fn check_series(y: &AdditiveSeries, theta: &Theta) -> Result<()> {
    if y.is_empty() {
        return Err(invalid("empty additive series"));
    }
    if y.period() != theta.period() {
        return Err(invalid(format!(
            "series period {} does not match theta period {}",
            y.period(),
            theta.period()
        )));
    }
    Ok(())
}

/// `−½ log det Γ − ½ Yᵀ Γ⁻¹ Y` from a covariance row.
pub fn log_likelihood_with(gamma: &[f64], y: &[f64]) -> Result<f64> {
    let dl = factor(gamma)?;
    let z = dl.solve(y);
    let q: f64 = y.iter().zip(&z).map(|(a, b)| a * b).sum();
    Ok(-0.5 * dl.log_det() - 0.5 * q)
}

/// `l_n(θ)` without the `−(n/2) log 2π` constant.
pub fn log_likelihood(y: &AdditiveSeries, theta: &Theta) -> Result<f64> {
    check_series(y, theta)?;
    let n = y.len();
    let gamma = if n == 1 {
        vec![y_autocovariance(0, theta)?]
    } else {
        covariances(n, theta)
    };
    log_likelihood_with(&gamma, y.values())
}

fn autocorrelation(z: &[f64]) -> Vec<f64> {
    let n = z.len();
    (0..n).map(|m| (0..n - m).map(|i| z[i] * z[i + m]).sum()).collect()
}

fn toeplitz_pairing(d: &[f64], c: &[f64]) -> f64 {
    d[0] * c[0] + 2.0 * d[1..].iter().zip(&c[1..]).map(|(a, b)| a * b).sum::<f64>()
}

/// Log-likelihood and score from a bundle.
pub fn likelihood_and_score(y: &[f64], bundle: &YCovarianceBundle) -> Result<(f64, Vec<f64>)> {
    if y.len() != bundle.order() {
        return Err(invalid(format!(
            "series length {} does not match bundle order {}",
            y.len(),
            bundle.order()
        )));
    }
    let dl = factor(&bundle.gamma)?;
    let z = dl.solve(y);
    let q: f64 = y.iter().zip(&z).map(|(a, b)| a * b).sum();
    let sums = dl.inverse_diagonal_sums();
    let zz = autocorrelation(&z);
    let score = bundle
        .derivatives
        .iter()
        .map(|d| -0.5 * DurbinLevinson::trace_product(&sums, d) + 0.5 * toeplitz_pairing(d, &zz))
        .collect();
    Ok((-0.5 * dl.log_det() - 0.5 * q, score))
}

/// `∂l_n/∂θ_i = −½ Tr(Γ⁻¹ ∂_iΓ) + ½ Yᵀ Γ⁻¹ ∂_iΓ Γ⁻¹ Y`.
pub fn score(y: &AdditiveSeries, theta: &Theta) -> Result<Vec<f64>> {
    check_series(y, theta)?;
    let bundle = build_bundle(y.len(), theta)?;
    Ok(likelihood_and_score(y.values(), &bundle)?.1)
}

/// Per-observation Whittle information of `Y`, ordering `(φ(1..T), H)`.
#[derive(Debug, Clone)]
pub struct FisherMatrix {
    matrix: DMatrix<f64>,
    condition: f64,
}

impl FisherMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `I⁻¹ v`, refused when the condition number exceeds [`MAX_CONDITION`].
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        if !(self.condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned(self.condition));
        }
        let chol = self
            .matrix
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?;
        Ok(chol.solve(&DVector::from_column_slice(v)).as_slice().to_vec())
    }
}

/// `(1/4π) ∫_{-π}^{π} ∂_k log g_Y ∂_j log g_Y dμ` with `g_Y` the
/// cycle-rate density of `Y`.
pub fn fisher_information(theta: &Theta) -> Result<FisherMatrix> {
    let model = SpectralModel::new(theta.clone());
    let d = model.dim();
    let mesh = GradedMesh::new(0.0, LEVELS, MAX_PHASE);
    let mut m = DMatrix::<f64>::zeros(d, d);
    let mut grad = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    for (&mu, &w) in mesh.nodes.iter().zip(&mesh.weights) {
        let gy = model.cycle_eval_into(mu, &mut grad, &mut scratch);
        for i in 0..d {
            let a = grad[i] / gy;
            for j in 0..=i {
                m[(i, j)] += w * a * grad[j] / gy;
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = m[(i, j)] / (2.0 * PI);
            if !v.is_finite() {
                return Err(Error::Quadrature(format!("non-finite information entry ({i}, {j})")));
            }
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let lo = eig.min();
    let hi = eig.max();
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(FisherMatrix {
        matrix: m,
        condition: hi / lo,
    })
}

#[derive(Debug, Clone)]
pub struct OneStep {
    pub theta: Theta,
    /// `I(θ̂)⁻¹ (1/n) ∇l_n(θ̂)` before projection.
    pub step: Vec<f64>,
    pub score: Vec<f64>,
    pub log_likelihood: f64,
    pub fisher_condition: f64,
    pub projected: bool,
}

/// `θ̃ = θ̂ + I(θ̂)⁻¹ (1/n) ∇l_n(θ̂)`, projected back into the parameter set.
pub fn one_step(theta_hat: &Theta, y: &AdditiveSeries) -> Result<OneStep> {
    check_series(y, theta_hat)?;
    let n = y.len();
    let bundle = build_bundle(n, theta_hat)?;
    let (ll, grad) = likelihood_and_score(y.values(), &bundle)?;
    let fim = fisher_information(theta_hat)?;
    let scaled: Vec<f64> = grad.iter().map(|g| g / n as f64).collect();
    let step = fim.solve(&scaled)?;
    let raw: Vec<f64> = theta_hat.to_vec().iter().zip(&step).map(|(a, b)| a + b).collect();
    let (theta, projected) = Theta::project(&raw, PROJECTION_MARGIN)?;
    Ok(OneStep {
        theta,
        step,
        score: grad,
        log_likelihood: ll,
        fisher_condition: fim.condition_number(),
        projected,
    })
}
