//! Initial estimators: GPH for the Hurst index on the additive series and
//! generalized least squares for each seasonal coefficient.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::fgn::{lag_t_covariance, toeplitz_solve, Hurst};
use crate::model::{additive_series, AdditiveSeries, SeasonalSeries, Theta};

pub const DEFAULT_DELTA: f64 = 0.6;
pub const HURST_FLOOR: f64 = 0.01;
pub const HURST_CEIL: f64 = 0.99;

/// Periodogram ordinates `I(λ_j) = (1/2πn)|Σ_t Y_t e^{itλ_j}|²` of the
/// mean-removed series, `λ_j = 2πj/n`.
#[derive(Debug, Clone)]
pub struct Periodogram {
    values: Vec<f64>,
}

impl Periodogram {
    pub fn new(y: &[f64]) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(invalid(format!("periodogram needs at least 2 points, got {n}")));
        }
        let mean = y.iter().sum::<f64>() / n as f64;
        let mut buf: Vec<Complex64> = y.iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / (2.0 * PI * n as f64);
        Ok(Periodogram {
            values: buf.iter().map(|c| c.norm_sqr() * scale).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frequency(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.values.len() as f64
    }

    /// `I(λ_j)` for `1 ≤ j ≤ ⌊n/2⌋`.
    pub fn at(&self, j: usize) -> Result<f64> {
        let half = self.values.len() / 2;
        if j == 0 || j > half {
            return Err(invalid(format!("frequency index {j} outside 1..={half}")));
        }
        Ok(self.values[j])
    }

    /// All `n` ordinates, index `j = 0..n`.
    pub fn ordinates(&self) -> &[f64] {
        &self.values
    }
}

pub fn periodogram(y: &AdditiveSeries, j: usize) -> Result<f64> {
    Periodogram::new(y.values())?.at(j)
}

#[derive(Debug, Clone)]
pub struct GphFit {
    pub m: usize,
    pub d_hat: f64,
    /// `d̂ + ½` before clamping.
    pub h_raw: f64,
    pub h_hat: Hurst,
    pub clamped: bool,
    pub s_m: f64,
    pub residuals: Vec<f64>,
}

/// Log-periodogram regression on `a_j = log(2 sin(λ_j/2))`, `j = 1..=m`.
pub fn gph_estimate(y: &AdditiveSeries, m: usize) -> Result<GphFit> {
    let n = y.len();
    if m < 2 || 2 * m >= n {
        return Err(invalid(format!("need 2 ≤ m < n/2, got m = {m}, n = {n}")));
    }
    let pg = Periodogram::new(y.values())?;
    let mut a = Vec::with_capacity(m);
    let mut log_i = Vec::with_capacity(m);
    for j in 1..=m {
        let i = pg.at(j)?;
        if !(i > 0.0) {
            return Err(Error::Degenerate(format!("periodogram vanishes at j = {j}")));
        }
        a.push((2.0 * (pg.frequency(j) / 2.0).sin()).ln());
        log_i.push(i.ln());
    }
    let mf = m as f64;
    let a_bar = a.iter().sum::<f64>() / mf;
    let l_bar = log_i.iter().sum::<f64>() / mf;
    let s_m: f64 = a.iter().map(|x| (x - a_bar).powi(2)).sum();
    let cross: f64 = a.iter().zip(&log_i).map(|(x, l)| (x - a_bar) * l).sum();
    let slope = cross / s_m;
    let d_hat = -slope / 2.0;
    let h_raw = d_hat + 0.5;
    let h_hat = Hurst::clamped(h_raw, HURST_FLOOR, HURST_CEIL);
    let residuals = a
        .iter()
        .zip(&log_i)
        .map(|(x, l)| l - l_bar - slope * (x - a_bar))
        .collect();
    Ok(GphFit {
        m,
        d_hat,
        h_raw,
        h_hat,
        clamped: h_hat.value() != h_raw,
        s_m,
        residuals,
    })
}

/// Quadratic forms behind one GLSE coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlseFit {
    pub phi: f64,
    pub numerator: f64,
    pub denominator: f64,
}

/// `φ̂(u) = (lead' Γ⁻¹ lag) / (lag' Γ⁻¹ lag)` for one seasonal subsequence.
pub fn glse_fit(sub: &[f64], h: Hurst, period: usize) -> Result<GlseFit> {
    if sub.len() < 3 {
        return Err(invalid(format!("subsequence needs at least 3 points, got {}", sub.len())));
    }
    let k = sub.len() - 1;
    let lagged = &sub[..k];
    let lead = &sub[1..];
    let cov = lag_t_covariance(k, period, h)?;
    let w = toeplitz_solve(&cov, lagged)?;
    let numerator: f64 = lead.iter().zip(&w).map(|(a, b)| a * b).sum();
    let denominator: f64 = lagged.iter().zip(&w).map(|(a, b)| a * b).sum();
    if !(denominator > 0.0) || !numerator.is_finite() {
        return Err(Error::Degenerate(format!(
            "GLSE denominator {denominator} is not positive"
        )));
    }
    Ok(GlseFit {
        phi: numerator / denominator,
        numerator,
        denominator,
    })
}

pub fn glse_estimate(sub: &[f64], h: Hurst, period: usize) -> Result<f64> {
    Ok(glse_fit(sub, h, period)?.phi)
}

#[derive(Debug, Clone)]
pub struct InitialEstimate {
    pub theta_hat: Theta,
    pub gph: GphFit,
    pub glse: Vec<GlseFit>,
}

/// `m = ⌊n^δ⌋`.
pub fn bandwidth(n: usize, delta: f64) -> usize {
    (n as f64).powf(delta).floor() as usize
}

pub fn initial_estimate(series: &SeasonalSeries, delta: f64) -> Result<InitialEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta = {delta} is outside (0, 1)")));
    }
    let y = additive_series(series);
    let gph = gph_estimate(&y, bandwidth(y.len(), delta))?;
    let t = series.period();
    let glse = (1..=t)
        .map(|u| glse_fit(&series.season(u), gph.h_hat, t))
        .collect::<Result<Vec<_>>>()?;
    let phis = glse.iter().map(|g| g.phi).collect::<Vec<_>>();
    if let Some(p) = phis.iter().find(|p| !p.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite GLSE coefficient {p}")));
    }
    // GLSE is unconstrained; the initial estimate may sit outside (-1, 1).
    let (theta_hat, _) = Theta::project(&[phis, vec![gph.h_hat.value()]].concat(), 1e-3)?;
    Ok(InitialEstimate {
        theta_hat,
        gph,
        glse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgn::simulate_fgn;
    use crate::model::simulate_sfar;
    use approx::assert_relative_eq;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn y(values: Vec<f64>) -> AdditiveSeries {
        AdditiveSeries::from_values(values, 1)
    }

    #[test]
    fn constant_series_has_empty_periodogram() {
        let pg = Periodogram::new(&[3.5; 40]).unwrap();
        for j in 1..=20 {
            assert!(pg.at(j).unwrap() < 1e-25);
        }
        assert!(pg.at(0).is_err());
        assert!(pg.at(21).is_err());
    }

    #[test]
    fn pure_tone_concentrates_at_its_frequency() {
        let n = 64;
        let tone: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / n as f64).cos()).collect();
        let pg = Periodogram::new(&tone).unwrap();
        assert_relative_eq!(pg.at(1).unwrap(), n as f64 / (8.0 * PI), max_relative = 1e-12);
        for j in 2..=32 {
            assert!(pg.at(j).unwrap() < 1e-20);
        }
    }

    #[test]
    fn white_noise_periodogram_is_flat() {
        let h = Hurst::new(0.5).unwrap();
        let x = simulate_fgn(4096, h, 5).unwrap();
        let pg = Periodogram::new(&x).unwrap();
        let mean = (1..=2048).map(|j| pg.at(j).unwrap()).sum::<f64>() / 2048.0;
        assert!((mean * 2.0 * PI - 1.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn parseval_holds() {
        let h = Hurst::new(0.8).unwrap();
        for n in [17usize, 256, 1000] {
            let x: Vec<f64> = simulate_fgn(n, h, n as u64).unwrap().iter().map(|v| v + 4.0).collect();
            let pg = Periodogram::new(&x).unwrap();
            let total: f64 = pg.ordinates()[1..].iter().sum::<f64>() * 2.0 * PI / n as f64;
            let mean = x.iter().sum::<f64>() / n as f64;
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            assert!((total - var).abs() < 1e-10 * var.max(1.0), "n={n}: {total} vs {var}");
        }
    }

    #[test]
    fn gph_rejects_bad_bandwidth_and_degenerate_input() {
        let series = y((0..100).map(|t| (t as f64 * 0.37).sin()).collect());
        assert!(gph_estimate(&series, 1).is_err());
        assert!(gph_estimate(&series, 50).is_err());
        assert!(gph_estimate(&y(vec![1.0; 100]), 10).is_err());
    }

    #[test]
    fn gph_recovers_hurst_on_average() {
        for (hv, seed0) in [(0.7, 0u64), (0.5, 1000)] {
            let h = Hurst::new(hv).unwrap();
            let m = bandwidth(4096, DEFAULT_DELTA);
            let mean = (0..100)
                .map(|r| gph_estimate(&y(simulate_fgn(4096, h, seed0 + r).unwrap()), m).unwrap().h_hat.value())
                .sum::<f64>()
                / 100.0;
            assert!((mean - hv).abs() < 0.05, "H={hv}: mean {mean}");
        }
    }

    #[test]
    fn gph_records_clamping() {
        // A strongly trending series drives the slope far beyond the range.
        let series = y((0..512).map(|t| (t as f64).powi(3)).collect());
        let fit = gph_estimate(&series, 10).unwrap();
        assert!(fit.h_raw > HURST_CEIL && fit.clamped);
        assert_eq!(fit.h_hat.value(), HURST_CEIL);
        assert_eq!(fit.residuals.len(), 10);
    }

    fn ols(sub: &[f64]) -> f64 {
        let num: f64 = sub.windows(2).map(|w| w[0] * w[1]).sum();
        let den: f64 = sub[..sub.len() - 1].iter().map(|v| v * v).sum();
        num / den
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn glse_collapses_to_ols_for_white_noise(values in proptest::collection::vec(-10.0f64..10.0, 3..80), t in 1usize..5) {
            prop_assume_nonzero(&values);
            let h = Hurst::new(0.5).unwrap();
            let g = glse_estimate(&values, h, t).unwrap();
            let o = ols(&values);
            prop_assert!((g - o).abs() <= 1e-12 * o.abs().max(1.0), "{g} vs {o}");
        }

        #[test]
        fn glse_and_gph_are_scale_equivariant(seed in 0u64..1000, c in 0.01f64..100.0) {
            let th = Theta::new(vec![0.6, 0.2], 0.8).unwrap();
            let s = simulate_sfar(&th, 60, seed, 20).unwrap();
            let z = s.scaled(c);
            let m = bandwidth(60, DEFAULT_DELTA);
            let ha = gph_estimate(&additive_series(&s), m).unwrap().h_raw;
            let hb = gph_estimate(&additive_series(&z), m).unwrap().h_raw;
            prop_assert!((ha - hb).abs() < 1e-12);
            let h = Hurst::clamped(ha, HURST_FLOOR, HURST_CEIL);
            for u in 1..=2 {
                let a = glse_estimate(&s.season(u), h, 2).unwrap();
                let b = glse_estimate(&z.season(u), h, 2).unwrap();
                prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    fn prop_assume_nonzero(values: &[f64]) {
        // Zero lagged energy is a degenerate input, covered separately.
        if values[..values.len() - 1].iter().all(|v| *v == 0.0) {
            panic!("generator produced an all-zero lagged vector");
        }
    }

    #[test]
    fn glse_is_exact_on_geometric_paths() {
        let h = Hurst::new(0.5).unwrap();
        let path: Vec<f64> = (0..30).map(|n| 0.8f64.powi(n)).collect();
        assert_relative_eq!(glse_estimate(&path, h, 3).unwrap(), 0.8, max_relative = 1e-14);
        let h7 = Hurst::new(0.7).unwrap();
        assert_relative_eq!(glse_estimate(&path, h7, 1).unwrap(), 0.8, max_relative = 1e-12);
    }

    #[test]
    fn glse_rejects_short_or_degenerate_input() {
        let h = Hurst::new(0.5).unwrap();
        assert!(glse_estimate(&[1.0, 2.0], h, 2).is_err());
        assert!(matches!(glse_estimate(&[0.0, 0.0, 1.0], h, 2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn initial_estimate_on_white_noise() {
        let th = Theta::new(vec![0.0], 0.5).unwrap();
        let mut mean = [0.0; 2];
        for seed in 0..20 {
            let s = simulate_sfar(&th, 4096, seed, 0).unwrap();
            let v = initial_estimate(&s, DEFAULT_DELTA).unwrap().theta_hat.to_vec();
            mean[0] += v[0] / 20.0;
            mean[1] += v[1] / 20.0;
        }
        assert!(mean[0].abs() < 0.05 && (mean[1] - 0.5).abs() < 0.05, "{mean:?}");
    }

    #[test]
    fn initial_estimate_is_deterministic() {
        let th = Theta::new(vec![0.6, 0.2], 0.8).unwrap();
        let s = simulate_sfar(&th, 200, 4, 100).unwrap();
        let a = initial_estimate(&s, DEFAULT_DELTA).unwrap();
        assert_eq!(a.theta_hat, initial_estimate(&s, DEFAULT_DELTA).unwrap().theta_hat);
        assert_eq!(a.glse.len(), 2);
        assert!(a.glse.iter().all(|g| g.denominator > 0.0));
        assert!(initial_estimate(&s, 1.0).is_err());
    }
}
