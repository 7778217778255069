//! Real-data pipeline: monthly CSV ingest, seasonal aggregation, sample
//! ACF/PACF, SFAR and white-noise SAR fits, in-sample comparison.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{from_csv, invalid, Error, Result};
use crate::estimators::initial_estimate;
use crate::model::{additive_series, SeasonalSeries, Theta};
use crate::onestep::one_step;

/// Values indexed by `(year, sub-period)`, sub-periods `1..=periods_per_year`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedSeries {
    pub stamps: Vec<(i32, usize)>,
    pub values: Vec<f64>,
    pub periods_per_year: usize,
}

impl ObservedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check(&self) -> Result<()> {
        let p = self.periods_per_year;
        for (i, w) in self.stamps.windows(2).enumerate() {
            let (y, s) = w[0];
            let next = if s == p { (y + 1, 1) } else { (y, s + 1) };
            if w[1] <= w[0] {
                return Err(invalid(format!(
                    "timestamps not increasing at row {}: {:?} after {:?}",
                    i + 2,
                    w[1],
                    w[0]
                )));
            }
            if w[1] != next {
                let mut missing = Vec::new();
                let mut cur = next;
                while cur < w[1] && missing.len() < 12 {
                    missing.push(format!("{}-{:02}", cur.0, cur.1));
                    cur = if cur.1 == p { (cur.0 + 1, 1) } else { (cur.0, cur.1 + 1) };
                }
                return Err(Error::Gap(missing.join(", ")));
            }
        }
        Ok(())
    }

    /// Full years `from..=to`.
    pub fn window(&self, from: i32, to: i32) -> Result<ObservedSeries> {
        if from > to {
            return Err(invalid(format!("empty window {from}-{to}")));
        }
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| (from..=to).contains(&self.stamps[i].0))
            .collect();
        let expected = (to - from + 1) as usize * self.periods_per_year;
        if keep.len() != expected {
            return Err(invalid(format!(
                "window {from}-{to} is not covered by whole years of data ({} of {expected} periods present)",
                keep.len()
            )));
        }
        Ok(ObservedSeries {
            stamps: keep.iter().map(|&i| self.stamps[i]).collect(),
            values: keep.iter().map(|&i| self.values[i]).collect(),
            periods_per_year: self.periods_per_year,
        })
    }

    /// Full years only, first period of a year first.
    pub fn to_seasonal(&self) -> Result<SeasonalSeries> {
        if self.stamps.first().is_some_and(|s| s.1 != 1) {
            return Err(invalid("series must start at the first period of a year"));
        }
        SeasonalSeries::new(self.values.clone(), self.periods_per_year)
    }
}

fn parse_error(source_name: &str, line: u64, message: String) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    }
}

/// Read `year,period,value` rows with `period ∈ 1..=periods_per_year`.
pub fn read_observed<R: Read>(input: R, source_name: &str, periods_per_year: usize) -> Result<ObservedSeries> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| from_csv(source_name, e))?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != ["year", "period", "value"] {
        return Err(parse_error(source_name, 1, format!("expected header year,period,value, found {}", names.join(","))));
    }
    let mut stamps = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| from_csv(source_name, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).map(str::trim).unwrap_or("");
        let year: i32 = field(0)
            .parse()
            .map_err(|e| parse_error(source_name, line, format!("year `{}`: {e}", field(0))))?;
        let period: usize = field(1)
            .parse()
            .map_err(|e| parse_error(source_name, line, format!("period `{}`: {e}", field(1))))?;
        if !(1..=periods_per_year).contains(&period) {
            return Err(parse_error(source_name, line, format!("period {period} outside 1..={periods_per_year}")));
        }
        let value: f64 = field(2)
            .parse()
            .map_err(|e| parse_error(source_name, line, format!("value `{}`: {e}", field(2))))?;
        if !value.is_finite() {
            return Err(parse_error(source_name, line, format!("non-finite value {value}")));
        }
        stamps.push((year, period));
        values.push(value);
    }
    if values.is_empty() {
        return Err(parse_error(source_name, 1, "no data rows".into()));
    }
    let s = ObservedSeries {
        stamps,
        values,
        periods_per_year,
    };
    s.check()?;
    Ok(s)
}

/// Monthly `year,period,value` file.
pub fn load_csv(path: &Path) -> Result<ObservedSeries> {
    let file = std::fs::File::open(path)?;
    read_observed(file, &path.display().to_string(), 12)
}

/// Average consecutive blocks of `12/T` months into `T` periods per year.
pub fn aggregate(monthly: &ObservedSeries, period: usize) -> Result<ObservedSeries> {
    if monthly.periods_per_year != 12 || period == 0 || 12 % period != 0 {
        return Err(invalid(format!("cannot aggregate {} periods per year into {period}", monthly.periods_per_year)));
    }
    if monthly.len() % 12 != 0 || monthly.stamps.first().is_some_and(|s| s.1 != 1) {
        return Err(invalid("aggregation needs whole years starting in the first month"));
    }
    let width = 12 / period;
    Ok(ObservedSeries {
        stamps: monthly
            .stamps
            .chunks(width)
            .map(|c| (c[0].0, (c[0].1 - 1) / width + 1))
            .collect(),
        values: monthly
            .values
            .chunks(width)
            .map(|c| c.iter().sum::<f64>() / width as f64)
            .collect(),
        periods_per_year: period,
    })
}

pub fn aggregate_quarterly(monthly: &ObservedSeries) -> Result<ObservedSeries> {
    aggregate(monthly, 4)
}

/// Sample autocorrelations `r(0..=max_lag)` with the biased denominator.
pub fn sample_acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if 2 * max_lag >= n {
        return Err(invalid(format!("max lag {max_lag} must be below half the length {n}")));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let c = |k: usize| (0..n - k).map(|t| (x[t] - mean) * (x[t + k] - mean)).sum::<f64>() / n as f64;
    let c0 = c(0);
    if !(c0 > 0.0) {
        return Err(Error::Degenerate("constant series has no autocorrelation".into()));
    }
    Ok((0..=max_lag).map(|k| c(k) / c0).collect())
}

/// Partial autocorrelations at lags `1..=max_lag` by Durbin–Levinson.
pub fn sample_pacf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let r = sample_acf(x, max_lag)?;
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    let mut out = Vec::with_capacity(max_lag);
    let mut v = 1.0;
    for k in 1..=max_lag {
        let acc = r[k] - (0..k - 1).map(|j| phi[j] * r[k - 1 - j]).sum::<f64>();
        let kappa = acc / v;
        let prev = phi.clone();
        for j in 0..k - 1 {
            phi[j] = prev[j] - kappa * prev[k - 2 - j];
        }
        phi.push(kappa);
        v *= 1.0 - kappa * kappa;
        out.push(kappa);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SarFit {
    pub alpha: Vec<f64>,
    /// `X_{nT+u} − α(u) X_{(n−1)T+u}` for cycles `n ≥ 1`, in series order.
    pub residuals: Vec<f64>,
}

/// Per-season least squares for `X_{nT+u} = α(u) X_{(n−1)T+u} + e`.
pub fn fit_sar_baseline(series: &SeasonalSeries) -> Result<SarFit> {
    if series.cycles() < 3 {
        return Err(invalid(format!("need at least 3 cycles, got {}", series.cycles())));
    }
    let alpha = (1..=series.period())
        .map(|u| {
            let s = series.season(u);
            let num: f64 = s.windows(2).map(|w| w[0] * w[1]).sum();
            let den: f64 = s[..s.len() - 1].iter().map(|v| v * v).sum();
            if den > 0.0 {
                Ok(num / den)
            } else {
                Err(Error::Degenerate(format!("season {u} has no lagged energy")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SarFit {
        residuals: prediction_residuals(series, &alpha),
        alpha,
    })
}

fn prediction_residuals(series: &SeasonalSeries, coeff: &[f64]) -> Vec<f64> {
    let t = series.period();
    let v = series.values();
    (t..v.len()).map(|i| v[i] - coeff[i % t] * v[i - t]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub rmse: f64,
    pub mae: f64,
}

impl ResidualStats {
    pub fn of(residuals: &[f64]) -> ResidualStats {
        let n = residuals.len() as f64;
        ResidualStats {
            rmse: (residuals.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
            mae: residuals.iter().map(|e| e.abs()).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Zero-based position in the seasonal series.
    pub index: usize,
    pub season: usize,
    pub actual: f64,
    pub sfar: f64,
    pub sar: f64,
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub period: usize,
    pub season_means: Vec<f64>,
    pub sfar_initial: Theta,
    pub sfar: Theta,
    pub sar_alpha: Vec<f64>,
    pub sfar_stats: ResidualStats,
    pub sar_stats: ResidualStats,
    /// Per-season residual statistics, `(sfar, sar)`.
    pub season_stats: Vec<(ResidualStats, ResidualStats)>,
    pub acf: Vec<f64>,
    pub pacf: Vec<f64>,
    pub predictions: Vec<Prediction>,
}

/// Default ACF/PACF depth: 40 lags, or fewer for short series.
pub fn default_max_lag(n: usize) -> usize {
    40.min(n.saturating_sub(1) / 2)
}

/// Fit both models on the season-demeaned series and compare in-sample
/// one-step-ahead predictions `X̂_{nT+u} = m_u + c(u)(X_{(n−1)T+u} − m_u)`.
pub fn compare_models(series: &SeasonalSeries, delta: f64) -> Result<FitReport> {
    let t = series.period();
    if series.cycles() < 3 {
        return Err(invalid(format!("need at least 3 cycles, got {}", series.cycles())));
    }
    let means: Vec<f64> = (1..=t)
        .map(|u| {
            let s = series.season(u);
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect();
    let centered = SeasonalSeries::new(
        series.values().iter().enumerate().map(|(i, v)| v - means[i % t]).collect(),
        t,
    )?;
    let initial = initial_estimate(&centered, delta)?;
    let sfar = one_step(&initial.theta_hat, &additive_series(&centered))?.theta;
    let sar = fit_sar_baseline(&centered)?;
    let sfar_res = prediction_residuals(&centered, sfar.phis());
    let v = series.values();
    let predictions: Vec<Prediction> = (t..v.len())
        .map(|i| {
            let u = i % t;
            let lag = v[i - t] - means[u];
            Prediction {
                index: i,
                season: u + 1,
                actual: v[i],
                sfar: means[u] + sfar.phis()[u] * lag,
                sar: means[u] + sar.alpha[u] * lag,
            }
        })
        .collect();
    let season_stats = (0..t)
        .map(|u| {
            let pick = |r: &[f64]| r.iter().skip(u).step_by(t).copied().collect::<Vec<_>>();
            (ResidualStats::of(&pick(&sfar_res)), ResidualStats::of(&pick(&sar.residuals)))
        })
        .collect();
    let max_lag = default_max_lag(v.len());
    Ok(FitReport {
        period: t,
        season_means: means,
        sfar_initial: initial.theta_hat,
        sfar,
        sar_alpha: sar.alpha,
        sfar_stats: ResidualStats::of(&sfar_res),
        sar_stats: ResidualStats::of(&sar.residuals),
        season_stats,
        acf: sample_acf(v, max_lag)?,
        pacf: sample_pacf(v, max_lag)?,
        predictions,
    })
}

/// Read `index,season,value` rows as written by [`write_seasonal_csv`].
pub fn read_seasonal_csv<R: Read>(input: R, source_name: &str) -> Result<SeasonalSeries> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| from_csv(source_name, e))?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != ["index", "season", "value"] {
        return Err(parse_error(source_name, 1, format!("expected header index,season,value, found {}", names.join(","))));
    }
    let mut seasons = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| from_csv(source_name, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).map(str::trim).unwrap_or("");
        let index: usize = field(0)
            .parse()
            .map_err(|e| parse_error(source_name, line, format!("index `{}`: {e}", field(0))))?;
        if index != values.len() + 1 {
            return Err(parse_error(source_name, line, format!("expected index {}, found {index}", values.len() + 1)));
        }
        let season: usize = field(1)
            .parse()
            .map_err(|e| parse_error(source_name, line, format!("season `{}`: {e}", field(1))))?;
        let value: f64 = field(2)
            .parse()
            .map_err(|e| parse_error(source_name, line, format!("value `{}`: {e}", field(2))))?;
        if !value.is_finite() {
            return Err(parse_error(source_name, line, format!("non-finite value {value}")));
        }
        seasons.push((season, line));
        values.push(value);
    }
    let period = seasons.iter().map(|s| s.0).max().unwrap_or(0);
    if period == 0 {
        return Err(parse_error(source_name, 1, "no data rows".into()));
    }
    for (i, &(s, line)) in seasons.iter().enumerate() {
        if s != i % period + 1 {
            return Err(parse_error(source_name, line, format!("season {s} out of sequence, expected {}", i % period + 1)));
        }
    }
    if values.len() % period != 0 {
        return Err(parse_error(source_name, seasons.last().map_or(1, |s| s.1), "series ends inside a cycle".into()));
    }
    SeasonalSeries::new(values, period)
}

/// `index,season,value` with one-based index and season.
pub fn write_seasonal_csv<W: Write>(series: &SeasonalSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e| from_csv("series", e);
    w.write_record(["index", "season", "value"]).map_err(wrap)?;
    let t = series.period();
    for (i, v) in series.values().iter().enumerate() {
        w.write_record([(i + 1).to_string(), (i % t + 1).to_string(), v.to_string()])
            .map_err(wrap)?;
    }
    w.flush()?;
    Ok(())
}
