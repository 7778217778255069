//! Fractional Gaussian noise: autocovariance, spectral density, exact
//! simulation and the lag-T covariance matrices used by the GLS step.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use statrs::function::gamma::{digamma, gamma};

use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;
use crate::toeplitz;

/// Hurst index, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Hurst(value))
        } else {
            Err(invalid(format!("Hurst index {value} is outside (0, 1)")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Clamp into `[lo, hi] ⊂ (0, 1)`.
    pub fn clamped(value: f64, lo: f64, hi: f64) -> Self {
        debug_assert!(lo > 0.0 && hi < 1.0 && lo <= hi);
        Hurst(if value.is_nan() { lo } else { value.clamp(lo, hi) })
    }
}

/// `ρ(k) = ½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
pub fn autocovariance(k: i64, h: Hurst) -> f64 {
    let k = k.unsigned_abs();
    let two_h = 2.0 * h.0;
    match k {
        0 => 1.0,
        1..=64 => {
            let kf = k as f64;
            0.5 * ((kf + 1.0).powf(two_h) - 2.0 * kf.powf(two_h) + (kf - 1.0).powf(two_h))
        }
        _ => {
            // Second difference written with expm1/ln_1p so large lags do not cancel.
            let kf = k as f64;
            let x = 1.0 / kf;
            let up = (two_h * x.ln_1p()).exp_m1();
            let down = (two_h * (-x).ln_1p()).exp_m1();
            0.5 * kf.powf(two_h) * (up + down)
        }
    }
}

/// Number of aliases summed explicitly on each side in the spectral density.
const ALIAS_TERMS: i32 = 24;

/// Aliasing sum `Σ_j |x + 2πj|^{-a}` and its derivative in `a`, with an
/// Euler–Maclaurin tail beyond `|j| = ALIAS_TERMS`.
fn alias_sum(x: f64, a: f64) -> (f64, f64) {
    let mut s = 0.0;
    let mut ds = 0.0;
    let mut add = |y: f64| {
        let l = y.ln();
        let t = (-a * l).exp();
        s += t;
        ds -= l * t;
    };
    add(x);
    for j in 1..=ALIAS_TERMS {
        let base = 2.0 * PI * j as f64;
        add(base + x);
        add(base - x);
    }
    let tpi = 2.0 * PI;
    for c in [x, -x] {
        let b = tpi * ALIAS_TERMS as f64 + c;
        let l = b.ln();
        let bma = (-a * l).exp();
        let integral = b * bma / (tpi * (a - 1.0));
        let half = -0.5 * bma;
        let first = tpi * a * bma / b / 12.0;
        let third = -tpi.powi(3) * a * (a + 1.0) * (a + 2.0) * bma / b.powi(3) / 720.0;
        let fifth = tpi.powi(5) * a * (a + 1.0) * (a + 2.0) * (a + 3.0) * (a + 4.0) * bma
            / b.powi(5)
            / 30240.0;
        s += integral + half + first + third + fifth;
        ds += -l * integral - integral / (a - 1.0) - l * half
            + first * (1.0 / a - l)
            + third * (1.0 / a + 1.0 / (a + 1.0) + 1.0 / (a + 2.0) - l)
            + fifth
                * (1.0 / a + 1.0 / (a + 1.0) + 1.0 / (a + 2.0) + 1.0 / (a + 3.0) + 1.0 / (a + 4.0)
                    - l);
    }
    (s, ds)
}

/// `C_H = Γ(2H+1) sin(πH) / (2π)`.
pub fn spectral_constant(h: Hurst) -> f64 {
    gamma(2.0 * h.0 + 1.0) * (PI * h.0).sin() / (2.0 * PI)
}

/// `∂ log C_H / ∂H = 2ψ(2H+1) + π cot(πH)`.
pub fn spectral_constant_log_derivative(h: Hurst) -> f64 {
    2.0 * digamma(2.0 * h.0 + 1.0) + PI / (PI * h.0).tan()
}

/// Spectral density and its H-log-derivative at `λ ≠ 0`, `λ` taken mod 2π.
pub(crate) fn density_and_log_dh(lambda: f64, h: Hurst) -> (f64, f64) {
    let x = wrap(lambda).abs();
    let a = 2.0 * h.0 + 1.0;
    let (s, ds_da) = alias_sum(x, a);
    let half = (0.5 * x).sin();
    // 1 - cos λ = 2 sin²(λ/2)
    let f = 2.0 * spectral_constant(h) * 2.0 * half * half * s;
    let dlog = spectral_constant_log_derivative(h) + 2.0 * ds_da / s;
    (f, dlog)
}

/// Reduce to `(-π, π]`.
pub(crate) fn wrap(lambda: f64) -> f64 {
    if (-PI..=PI).contains(&lambda) {
        return lambda;
    }
    let r = lambda.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Spectral density of unit-variance fGn, normalised so that
/// `∫_{-π}^{π} e^{ikλ} f(λ) dλ = ρ(k)`.
pub fn spectral_density(lambda: f64, h: Hurst) -> Result<f64> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(invalid(format!(
            "spectral density is undefined at λ = {lambda}"
        )));
    }
    Ok(density_and_log_dh(lambda, h).0)
}

/// Exact fGn sample of `length` points from stream 0 of `seed`.
pub fn simulate_fgn(length: usize, h: Hurst, seed: u64) -> Result<Vec<f64>> {
    simulate_fgn_with(length, h, &mut stream_rng(seed, 0))
}

/// Circulant-embedding (Davies–Harte) sampler; dense Cholesky if the
/// embedding is not nonnegative definite.
pub fn simulate_fgn_with<R: Rng + ?Sized>(length: usize, h: Hurst, rng: &mut R) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(invalid("fGn length must be at least 1"));
    }
    let n = length;
    let m = 2 * n;
    let mut row: Vec<Complex64> = Vec::with_capacity(m);
    for k in 0..=n {
        row.push(Complex64::new(autocovariance(k as i64, h), 0.0));
    }
    for k in (1..n).rev() {
        row.push(Complex64::new(autocovariance(k as i64, h), 0.0));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
    if min < -1e-8 {
        return cholesky_sample(n, h, rng);
    }
    let mut w: Vec<Complex64> = row
        .iter()
        .map(|ev| {
            let scale = (ev.re.max(0.0) / m as f64).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(scale * re, scale * im)
        })
        .collect();
    fft.process(&mut w);
    Ok(w[..n].iter().map(|c| c.re).collect())
}

fn cholesky_sample<R: Rng + ?Sized>(n: usize, h: Hurst, rng: &mut R) -> Result<Vec<f64>> {
    let r: Vec<f64> = (0..n).map(|k| autocovariance(k as i64, h)).collect();
    let chol = toeplitz::dense(&r)
        .cholesky()
        .ok_or(Error::Embedding(f64::NAN))?;
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok((chol.l() * z).iter().copied().collect())
}

/// Covariance of `(ε_{u}, ε_{u+T}, …, ε_{u+(n-1)T})`: symmetric Toeplitz with
/// entries `ρ(|i−j|·T)`. Independent of the season `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagTCovariance {
    period: usize,
    hurst: Hurst,
    first_row: Vec<f64>,
}

impl LagTCovariance {
    pub fn order(&self) -> usize {
        self.first_row.len()
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.first_row[i.abs_diff(j)]
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        toeplitz::dense(&self.first_row)
    }
}

pub fn lag_t_covariance(n: usize, period: usize, h: Hurst) -> Result<LagTCovariance> {
    if n == 0 || period == 0 {
        return Err(invalid(format!(
            "lag-T covariance needs n ≥ 1 and T ≥ 1 (got n = {n}, T = {period})"
        )));
    }
    let first_row = (0..n)
        .map(|k| autocovariance((k * period) as i64, h))
        .collect();
    Ok(LagTCovariance {
        period,
        hurst: h,
        first_row,
    })
}

/// Solve `Γ x = rhs` by Levinson, falling back to dense Cholesky when the
/// recursion reports near-singularity.
pub fn toeplitz_solve(cov: &LagTCovariance, rhs: &[f64]) -> Result<Vec<f64>> {
    match toeplitz::levinson_solve(&cov.first_row, rhs) {
        Err(Error::NearSingular { order, variance }) => toeplitz::cholesky_solve(&cov.first_row, rhs)
            .map_err(|_| Error::NearSingular { order, variance }),
        other => other,
    }
}
