//! The SFAR(1) process `X_{nT+u} = φ(u) X_{(n-1)T+u} + ε^H_{nT+u}`.
//!
//! Indexing: a [`SeasonalSeries`] stores `X_{nT+u}` at `values[n*T + u - 1]`
//! for seasons `u = 1..=T` and cycles `n = 0..N`. The additive series is
//! `Y_n = Σ_u X_{nT+u}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::fgn::{self, Hurst};
use crate::quad::{power_head, power_log_head};
use crate::rng::stream_rng;

/// Parameter vector `(φ(1), …, φ(T), H)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta {
    phis: Vec<f64>,
    hurst: Hurst,
}

impl Theta {
    pub fn new(phis: Vec<f64>, hurst: f64) -> Result<Self> {
        if phis.is_empty() {
            return Err(invalid("at least one seasonal coefficient is required"));
        }
        for (i, p) in phis.iter().enumerate() {
            if !(p.abs() < 1.0) {
                return Err(invalid(format!(
                    "phi({}) = {p} is outside (-1, 1)",
                    i + 1
                )));
            }
        }
        Ok(Theta {
            phis,
            hurst: Hurst::new(hurst)?,
        })
    }

    /// From the flat layout `(φ(1), …, φ(T), H)`.
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        match values.split_last() {
            Some((h, phis)) if !phis.is_empty() => Theta::new(phis.to_vec(), *h),
            _ => Err(invalid("theta needs at least one phi and a Hurst index")),
        }
    }

    pub fn period(&self) -> usize {
        self.phis.len()
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    /// `φ(u)` for season `u = 1..=T`.
    pub fn phi(&self, u: usize) -> f64 {
        self.phis[u - 1]
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    /// Number of free parameters, `T + 1`.
    pub fn dim(&self) -> usize {
        self.phis.len() + 1
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.phis.clone();
        v.push(self.hurst.value());
        v
    }

    /// Clamp a flat vector into the compact set with the given margin:
    /// `|φ(u)| ≤ 1 − margin`, `H ∈ [margin, 1 − margin]`. Returns whether
    /// any component moved.
    pub fn project(values: &[f64], margin: f64) -> Result<(Theta, bool)> {
        let mut moved = false;
        let mut v = values.to_vec();
        let last = v.len().saturating_sub(1);
        for (i, x) in v.iter_mut().enumerate() {
            let (lo, hi) = if i == last {
                (margin, 1.0 - margin)
            } else {
                (-1.0 + margin, 1.0 - margin)
            };
            if !x.is_finite() {
                return Err(invalid(format!("non-finite parameter at position {i}")));
            }
            let c = x.clamp(lo, hi);
            if c != *x {
                moved = true;
                *x = c;
            }
        }
        Ok((Theta::from_slice(&v)?, moved))
    }
}

/// A path `X_1 … X_{NT}` with period `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalSeries {
    values: Vec<f64>,
    period: usize,
}

impl SeasonalSeries {
    pub fn new(values: Vec<f64>, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(invalid("period must be at least 1"));
        }
        if values.len() % period != 0 {
            return Err(invalid(format!(
                "series length {} is not a multiple of the period {period}",
                values.len()
            )));
        }
        Ok(SeasonalSeries { values, period })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn cycles(&self) -> usize {
        self.values.len() / self.period
    }

    /// `X_{nT+u}`, `u = 1..=T`.
    pub fn at(&self, n: usize, u: usize) -> f64 {
        self.values[n * self.period + u - 1]
    }

    /// `(X_u, X_{T+u}, …)`.
    pub fn season(&self, u: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(u - 1)
            .step_by(self.period)
            .copied()
            .collect()
    }

    pub fn scaled(&self, c: f64) -> SeasonalSeries {
        SeasonalSeries {
            values: self.values.iter().map(|v| v * c).collect(),
            period: self.period,
        }
    }
}

/// `Y_n = Σ_{u=1}^T X_{nT+u}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveSeries {
    values: Vec<f64>,
    period: usize,
}

impl AdditiveSeries {
    pub fn from_values(values: Vec<f64>, period: usize) -> Self {
        AdditiveSeries { values, period }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Default number of discarded cycles before the retained path.
pub const DEFAULT_BURNIN: usize = 1000;

pub fn simulate_sfar(theta: &Theta, cycles: usize, seed: u64, burnin: usize) -> Result<SeasonalSeries> {
    simulate_sfar_with(theta, cycles, burnin, &mut stream_rng(seed, 0))
}

/// Run the recursion from zero initial values over one fGn path of
/// `(cycles + burnin)·T` points and keep the last `cycles` cycles.
pub fn simulate_sfar_with<R: Rng + ?Sized>(
    theta: &Theta,
    cycles: usize,
    burnin: usize,
    rng: &mut R,
) -> Result<SeasonalSeries> {
    if cycles < 2 {
        return Err(invalid(format!("need at least 2 cycles, got {cycles}")));
    }
    let t = theta.period();
    let total = (cycles + burnin) * t;
    let noise = fgn::simulate_fgn_with(total, theta.hurst(), rng)?;
    let mut x = vec![0.0; total];
    for i in 0..total {
        let prev = if i >= t { x[i - t] } else { 0.0 };
        x[i] = theta.phis[i % t] * prev + noise[i];
    }
    SeasonalSeries::new(x.split_off(burnin * t), t)
}

/// The `T` seasonal subsequences.
pub fn split_seasons(series: &SeasonalSeries) -> Vec<Vec<f64>> {
    (1..=series.period).map(|u| series.season(u)).collect()
}

/// Inverse of [`split_seasons`].
pub fn interleave(seasons: &[Vec<f64>]) -> Result<SeasonalSeries> {
    let t = seasons.len();
    let n = seasons.first().map_or(0, Vec::len);
    if t == 0 || seasons.iter().any(|s| s.len() != n) {
        return Err(invalid("seasonal subsequences must be non-empty and of equal length"));
    }
    let values = (0..n * t).map(|i| seasons[i % t][i / t]).collect();
    SeasonalSeries::new(values, t)
}

pub fn additive_series(series: &SeasonalSeries) -> AdditiveSeries {
    AdditiveSeries {
        values: series
            .values
            .chunks_exact(series.period)
            .map(|c| c.iter().sum())
            .collect(),
        period: series.period,
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda == 0.0 || !lambda.is_finite() {
        Err(invalid(format!("spectral density is undefined at λ = {lambda}")))
    } else {
        Ok(())
    }
}

/// Spectral density of the season-`u` subsequence as a function of the
/// base-rate frequency: `f_ε(λ) / (1 − 2φ cos(λT) + φ²)`.
pub fn spectral_density_subseq(lambda: f64, h: Hurst, phi_u: f64, period: usize) -> Result<f64> {
    check_lambda(lambda)?;
    if !(phi_u.abs() < 1.0) {
        return Err(invalid(format!("phi = {phi_u} is outside (-1, 1)")));
    }
    let f = fgn::spectral_density(lambda, h)?;
    Ok(f / (1.0 - 2.0 * phi_u * (lambda * period as f64).cos() + phi_u * phi_u))
}

/// `g(λ) = |Σ_{p=0}^{T-1} e^{-ipλ} / (1 − φ(T−p) e^{-iλT})|² f_ε(λ)`.
pub fn spectral_density_y(lambda: f64, theta: &Theta) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(SpectralModel::new(theta.clone()).density(lambda))
}

/// Closed form of `g` for `T = 2`.
pub fn spectral_density_y_t2(lambda: f64, h: Hurst, phi1: f64, phi2: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(phi1.abs() < 1.0 && phi2.abs() < 1.0) {
        return Err(invalid(format!("phi = ({phi1}, {phi2}) is outside (-1, 1)²")));
    }
    let a = 2.0 + 2.0 * phi1 * phi2 - 2.0 * phi1;
    let b = 2.0 * (phi1 + phi2);
    let c = 2.0 * phi2;
    let num = 2.0 + phi1 * phi1 + phi2 * phi2 + a * lambda.cos() - b * (2.0 * lambda).cos()
        - c * (3.0 * lambda).cos();
    let c2 = (2.0 * lambda).cos();
    let den = (1.0 - 2.0 * phi2 * c2 + phi2 * phi2) * (1.0 - 2.0 * phi1 * c2 + phi1 * phi1);
    Ok(num / den * fgn::spectral_density(lambda, h)?)
}

/// Leading behaviour `g(λ) ≈ c·λ^{1-2H}` near the origin, with the
/// corresponding coefficients for each partial derivative. The H-partial
/// carries an extra `log λ` term: `∂g/∂H ≈ (c_H + c_log·log λ)·λ^{1-2H}`.
#[derive(Debug, Clone)]
pub struct OriginBehaviour {
    pub exponent: f64,
    pub value: f64,
    pub phi: Vec<f64>,
    pub hurst: f64,
    pub hurst_log: f64,
}

impl OriginBehaviour {
    /// `∫_0^ε` of the value and of each partial (φ(1..T), H).
    pub fn head_integrals(&self, eps: f64) -> (f64, Vec<f64>) {
        let p = power_head(eps, self.exponent);
        let pl = power_log_head(eps, self.exponent);
        let mut grad: Vec<f64> = self.phi.iter().map(|c| c * p).collect();
        grad.push(self.hurst * p + self.hurst_log * pl);
        (self.value * p, grad)
    }
}

/// Evaluator for `g` and its partial derivatives in `θ = (φ(1..T), H)`.
///
/// Besides `g` itself (a density in the base-rate frequency λ), the model
/// exposes the cycle-rate density of `Y`,
/// `g_Y(μ) = (1/T) Σ_{r=0}^{T-1} g((μ + 2πr)/T)`, which is the spectral
/// density of `Y_n` sampled once per cycle:
/// `Cov(Y_0, Y_k) = ∫ e^{ikTλ} g(λ) dλ = ∫ e^{ikμ} g_Y(μ) dμ`.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    theta: Theta,
    c_h: f64,
}

impl SpectralModel {
    pub fn new(theta: Theta) -> Self {
        let c_h = fgn::spectral_constant(theta.hurst());
        SpectralModel { theta, c_h }
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    /// `A(λ) = Σ_p e^{-ipλ} / (1 − φ(T−p) e^{-iλT})`.
    pub fn transfer(&self, lambda: f64) -> Complex64 {
        let t = self.theta.period();
        let z = Complex64::from_polar(1.0, -lambda * t as f64);
        (0..t)
            .map(|p| {
                let phi = self.theta.phis[t - p - 1];
                Complex64::from_polar(1.0, -(p as f64) * lambda) / (1.0 - phi * z)
            })
            .sum()
    }

    pub fn density(&self, lambda: f64) -> f64 {
        self.transfer(lambda).norm_sqr() * fgn::density_and_log_dh(lambda, self.theta.hurst()).0
    }

    /// `g(λ)`; writes `∂g/∂θ_i` into `grad` (length `T + 1`).
    pub fn eval_into(&self, lambda: f64, grad: &mut [f64]) -> f64 {
        let t = self.theta.period();
        debug_assert_eq!(grad.len(), t + 1);
        let z = Complex64::from_polar(1.0, -lambda * t as f64);
        let mut a = Complex64::new(0.0, 0.0);
        // Per-season ∂A/∂φ(u), stored at index u-1.
        let mut da = [Complex64::new(0.0, 0.0); 64];
        let mut da_vec;
        let da: &mut [Complex64] = if t <= 64 {
            &mut da[..t]
        } else {
            da_vec = vec![Complex64::new(0.0, 0.0); t];
            &mut da_vec
        };
        for p in 0..t {
            let u = t - p;
            let phi = self.theta.phis[u - 1];
            let shift = Complex64::from_polar(1.0, -(p as f64) * lambda);
            let inv = 1.0 / (1.0 - phi * z);
            a += shift * inv;
            da[u - 1] = shift * z * inv * inv;
        }
        let (f, dlog_h) = fgn::density_and_log_dh(lambda, self.theta.hurst());
        let a2 = a.norm_sqr();
        for u in 0..t {
            grad[u] = 2.0 * (da[u] * a.conj()).re * f;
        }
        let g = a2 * f;
        grad[t] = g * dlog_h;
        g
    }

    /// `g(λ)` and its gradient.
    pub fn eval(&self, lambda: f64) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.dim()];
        let g = self.eval_into(lambda, &mut grad);
        (g, grad)
    }

    /// `∂ log g / ∂θ_i`.
    pub fn log_gradient(&self, lambda: f64) -> Vec<f64> {
        let (g, grad) = self.eval(lambda);
        grad.into_iter().map(|d| d / g).collect()
    }

    /// Cycle-rate density `g_Y(μ)`; writes its gradient into `grad`.
    pub fn cycle_eval_into(&self, mu: f64, grad: &mut [f64], scratch: &mut [f64]) -> f64 {
        let t = self.theta.period();
        let tf = t as f64;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for r in 0..t {
            let nu = fgn::wrap((mu + 2.0 * PI * r as f64) / tf);
            total += self.eval_into(nu, scratch);
            for (g, s) in grad.iter_mut().zip(scratch.iter()) {
                *g += s;
            }
        }
        grad.iter_mut().for_each(|g| *g /= tf);
        total / tf
    }

    pub fn cycle_density(&self, mu: f64) -> f64 {
        let t = self.theta.period();
        (0..t)
            .map(|r| self.density(fgn::wrap((mu + 2.0 * PI * r as f64) / t as f64)))
            .sum::<f64>()
            / t as f64
    }

    /// Coefficients of the `λ^{1-2H}` behaviour of `g` and its partials at 0.
    pub fn origin(&self) -> OriginBehaviour {
        let h = self.theta.hurst();
        let s0: f64 = self.theta.phis.iter().map(|p| 1.0 / (1.0 - p)).sum();
        let a2 = s0 * s0;
        let dlog_c = fgn::spectral_constant_log_derivative(h);
        OriginBehaviour {
            exponent: 1.0 - 2.0 * h.value(),
            value: self.c_h * a2,
            phi: self
                .theta
                .phis
                .iter()
                .map(|p| self.c_h * 2.0 * s0 / ((1.0 - p) * (1.0 - p)))
                .collect(),
            hurst: a2 * self.c_h * dlog_c,
            hurst_log: -2.0 * a2 * self.c_h,
        }
    }
}
