//! Replicated simulation and estimation experiments.
//!
//! Replicate `i` draws from stream `i` of the base seed, so results do not
//! depend on how replicates are scheduled across threads.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{from_csv, invalid, Error, Result};
use crate::estimators::{initial_estimate, DEFAULT_DELTA};
use crate::model::{additive_series, simulate_sfar_with, Theta, DEFAULT_BURNIN};
use crate::onestep::one_step;
use crate::rng::stream_rng;

#[derive(Debug, Clone)]
pub struct McConfig {
    pub theta: Theta,
    /// Cycles per replicate.
    pub cycles: usize,
    pub replicates: usize,
    pub delta: f64,
    pub seed: u64,
    pub one_step: bool,
    pub burnin: usize,
}

impl McConfig {
    pub fn new(theta: Theta, cycles: usize, replicates: usize, seed: u64) -> Self {
        McConfig {
            theta,
            cycles,
            replicates,
            delta: DEFAULT_DELTA,
            seed,
            one_step: true,
            burnin: DEFAULT_BURNIN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(invalid("at least one replicate is required"));
        }
        if self.cycles < 10 {
            return Err(invalid(format!("need at least 10 cycles, got {}", self.cycles)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta = {} is outside (0, 1)", self.delta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub bias: f64,
    pub rmse: f64,
}

/// Column-wise mean error and root mean squared error.
pub fn bias_rmse(errors: &[Vec<f64>]) -> Result<Vec<ErrorStats>> {
    let first = errors.first().ok_or_else(|| invalid("no error samples"))?;
    let d = first.len();
    if errors.iter().any(|r| r.len() != d) {
        return Err(invalid("error rows have unequal length"));
    }
    let m = errors.len() as f64;
    Ok((0..d)
        .map(|j| {
            let bias = errors.iter().map(|r| r[j]).sum::<f64>() / m;
            let mse = errors.iter().map(|r| r[j] * r[j]).sum::<f64>() / m;
            ErrorStats {
                bias,
                rmse: mse.sqrt(),
            }
        })
        .collect())
}

/// Errors `estimate − truth` of the successful replicates, in replicate order.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSamples {
    pub period: usize,
    pub replicates: Vec<usize>,
    pub initial: Vec<Vec<f64>>,
    pub one_step: Option<Vec<Vec<f64>>>,
}

impl ErrorSamples {
    pub fn param_names(&self) -> Vec<String> {
        param_names(self.period)
    }
}

pub fn param_names(period: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=period).map(|u| format!("phi{u}")).collect();
    names.push("H".into());
    names
}

#[derive(Debug, Clone)]
pub struct McReport {
    pub samples: ErrorSamples,
    pub initial: Vec<ErrorStats>,
    pub one_step: Option<Vec<ErrorStats>>,
    /// `(replicate, reason)` for excluded replicates.
    pub failures: Vec<(usize, String)>,
    pub elapsed: Duration,
}

impl PartialEq for McReport {
    /// Wall-clock time is excluded.
    fn eq(&self, other: &Self) -> bool {
        self.samples == other.samples
            && self.initial == other.initial
            && self.one_step == other.one_step
            && self.failures == other.failures
    }
}

impl McReport {
    /// CSV with columns `param,bias_ie,bias_os,rmse_ie,rmse_os`.
    pub fn write_table<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e| from_csv("report", e);
        w.write_record(["param", "bias_ie", "bias_os", "rmse_ie", "rmse_os"])
            .map_err(wrap)?;
        for (j, name) in self.samples.param_names().iter().enumerate() {
            let ie = self.initial[j];
            let (bo, ro) = match &self.one_step {
                Some(os) => (os[j].bias.to_string(), os[j].rmse.to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([name.clone(), ie.bias.to_string(), bo, ie.rmse.to_string(), ro])
                .map_err(wrap)?;
        }
        w.flush()?;
        Ok(())
    }
}

enum Outcome {
    Ok(Vec<f64>, Option<Vec<f64>>),
    Failed(String),
}

fn replicate(config: &McConfig, i: usize) -> Outcome {
    let run = || -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let mut rng = stream_rng(config.seed, i as u64);
        let series = simulate_sfar_with(&config.theta, config.cycles, config.burnin, &mut rng)?;
        let ie = initial_estimate(&series, config.delta)?;
        let truth = config.theta.to_vec();
        let err = |t: &Theta| t.to_vec().iter().zip(&truth).map(|(a, b)| a - b).collect::<Vec<_>>();
        let os = if config.one_step {
            Some(err(&one_step(&ie.theta_hat, &additive_series(&series))?.theta))
        } else {
            None
        };
        Ok((err(&ie.theta_hat), os))
    };
    match run() {
        Ok((ie, os)) => Outcome::Ok(ie, os),
        Err(e) => Outcome::Failed(e.to_string()),
    }
}

/// Run all replicates on the current rayon pool. Fails if more than 10% of
/// replicates fail.
pub fn run_experiment(config: &McConfig) -> Result<McReport> {
    config.validate()?;
    let start = Instant::now();
    let outcomes: Vec<Outcome> = (0..config.replicates)
        .into_par_iter()
        .map(|i| replicate(config, i))
        .collect();
    let mut samples = ErrorSamples {
        period: config.theta.period(),
        replicates: Vec::new(),
        initial: Vec::new(),
        one_step: config.one_step.then(Vec::new),
    };
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Outcome::Ok(ie, os) => {
                samples.replicates.push(i);
                samples.initial.push(ie);
                if let (Some(all), Some(e)) = (samples.one_step.as_mut(), os) {
                    all.push(e);
                }
            }
            Outcome::Failed(reason) => failures.push((i, reason)),
        }
    }
    if failures.len() * 10 > config.replicates || samples.initial.is_empty() {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total: config.replicates,
            first: failures.first().map(|f| f.1.clone()).unwrap_or_default(),
        });
    }
    let initial = bias_rmse(&samples.initial)?;
    let one_step = samples.one_step.as_deref().map(bias_rmse).transpose()?;
    Ok(McReport {
        samples,
        initial,
        one_step,
        failures,
        elapsed: start.elapsed(),
    })
}

/// Write one row per replicate: `rep, phi1_err_ie, …, H_err_ie, phi1_err_os, …, H_err_os`.
pub fn write_error_samples<W: Write>(samples: &ErrorSamples, out: W) -> Result<()> {
    let names = samples.param_names();
    let mut header = vec!["rep".to_string()];
    header.extend(names.iter().map(|n| format!("{n}_err_ie")));
    if samples.one_step.is_some() {
        header.extend(names.iter().map(|n| format!("{n}_err_os")));
    }
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e| from_csv("error samples", e);
    w.write_record(&header).map_err(wrap)?;
    for (k, rep) in samples.replicates.iter().enumerate() {
        let mut row = vec![rep.to_string()];
        row.extend(samples.initial[k].iter().map(f64::to_string));
        if let Some(os) = &samples.one_step {
            row.extend(os[k].iter().map(f64::to_string));
        }
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_error_samples(report: &McReport, path: &Path) -> Result<()> {
    if report.samples.replicates.is_empty() {
        return Err(invalid("report has no replicates"));
    }
    write_error_samples(&report.samples, File::create(path)?)
}

/// Inverse of [`write_error_samples`].
pub fn parse_error_samples<R: std::io::Read>(input: R, source_name: &str) -> Result<ErrorSamples> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| from_csv(source_name, e))?.clone();
    let parse_err = |line: u64, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };
    if header.get(0) != Some("rep") || header.len() < 3 {
        return Err(parse_err(1, "expected header starting with `rep`".into()));
    }
    let ie_cols = header.iter().filter(|h| h.ends_with("_err_ie")).count();
    let os_cols = header.iter().filter(|h| h.ends_with("_err_os")).count();
    if ie_cols < 2 || (os_cols != 0 && os_cols != ie_cols) || 1 + ie_cols + os_cols != header.len() {
        return Err(parse_err(1, "unexpected error-sample columns".into()));
    }
    let mut samples = ErrorSamples {
        period: ie_cols - 1,
        replicates: Vec::new(),
        initial: Vec::new(),
        one_step: (os_cols > 0).then(Vec::new),
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| from_csv(source_name, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let rep = rec[0]
            .parse::<usize>()
            .map_err(|e| parse_err(line, format!("replicate index: {e}")))?;
        let vals = rec
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>().map_err(|e| parse_err(line, format!("`{f}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        samples.replicates.push(rep);
        samples.initial.push(vals[..ie_cols].to_vec());
        if let Some(os) = samples.one_step.as_mut() {
            os.push(vals[ie_cols..].to_vec());
        }
    }
    Ok(samples)
}
