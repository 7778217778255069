use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;
use sfar::datafit::{self, FitReport};
use sfar::estimators::initial_estimate;
use sfar::model::{self, additive_series, SeasonalSeries, SpectralModel, Theta};
use sfar::montecarlo::{self, McConfig};
use sfar::onestep::one_step;
use sfar::{fgn, Hurst};

use crate::{usage, CliError, EstimateArgs, FitArgs, McArgs, ModelArgs, SimulateArgs, SpectrumArgs};

fn parse_list(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("--{name}: `{}` is not a number ({e})", s.trim())))
        })
        .collect()
}

fn theta_from(model: &ModelArgs) -> Result<Theta, CliError> {
    let phis = parse_list("phi", &model.phi)?;
    if phis.len() != model.period {
        return Err(usage(format!(
            "--phi has {} values but --T is {}",
            phis.len(),
            model.period
        )));
    }
    Ok(Theta::new(phis, model.hurst)?)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let theta = theta_from(&a.model)?;
    if a.cycles < 2 {
        return Err(usage("--cycles must be at least 2"));
    }
    let series = model::simulate_sfar(&theta, a.cycles, a.seed, a.burnin)?;
    let mut out = output(&a.out)?;
    datafit::write_seasonal_csv(&series, &mut out)?;
    out.flush()?;
    Ok(())
}

enum Which {
    Eps,
    Subseq(usize),
    Y,
    Y2,
}

fn parse_which(text: &str, period: usize) -> Result<Which, CliError> {
    match text {
        "eps" => Ok(Which::Eps),
        "Y" => Ok(Which::Y),
        "Y2" if period == 2 => Ok(Which::Y2),
        "Y2" => Err(usage("--which Y2 needs --T 2")),
        _ => match text.strip_prefix("subseq:").map(str::parse::<usize>) {
            Some(Ok(u)) if (1..=period).contains(&u) => Ok(Which::Subseq(u)),
            _ => Err(usage(format!("--which must be eps, subseq:<1..{period}>, Y or Y2, got `{text}`"))),
        },
    }
}

pub fn spectrum(a: SpectrumArgs) -> Result<(), CliError> {
    let theta = theta_from(&a.model)?;
    let which = parse_which(&a.which, a.model.period)?;
    if a.grid == 0 {
        return Err(usage("--grid must be at least 1"));
    }
    let h: Hurst = theta.hurst();
    let model = SpectralModel::new(theta.clone());
    let density = |l: f64| -> Result<f64, CliError> {
        Ok(match which {
            Which::Eps => fgn::spectral_density(l, h)?,
            Which::Subseq(u) => model::spectral_density_subseq(l, h, theta.phi(u), theta.period())?,
            Which::Y => model.density(l),
            Which::Y2 => model::spectral_density_y_t2(l, h, theta.phi(1), theta.phi(2))?,
        })
    };
    let positive: Vec<f64> = (1..=a.grid).map(|i| i as f64 * PI / a.grid as f64).collect();
    let mut out = output(&a.out)?;
    writeln!(out, "lambda,density")?;
    for l in positive.iter().rev().map(|l| -l).chain(positive.iter().copied()) {
        writeln!(out, "{l},{}", density(l)?)?;
    }
    out.flush()?;
    Ok(())
}

fn read_series(path: &Path) -> Result<SeasonalSeries, CliError> {
    let file = File::open(path)?;
    Ok(datafit::read_seasonal_csv(file, &path.display().to_string())?)
}

pub fn estimate(a: EstimateArgs) -> Result<(), CliError> {
    let series = read_series(&a.input)?;
    if let Some(t) = a.period {
        if t != series.period() {
            return Err(usage(format!("--T {t} does not match the file's period {}", series.period())));
        }
    }
    let ie = initial_estimate(&series, a.delta)?;
    let os = if a.onestep == "on" {
        Some(one_step(&ie.theta_hat, &additive_series(&series))?)
    } else {
        None
    };
    let names = montecarlo::param_names(series.period());
    let mut out = io::stdout().lock();
    match &os {
        Some(_) => writeln!(out, "{:<8} {:>12} {:>12}", "param", "initial", "one_step")?,
        None => writeln!(out, "{:<8} {:>12}", "param", "initial")?,
    }
    let iv = ie.theta_hat.to_vec();
    let ov = os.as_ref().map(|o| o.theta.to_vec());
    for (j, name) in names.iter().enumerate() {
        match &ov {
            Some(o) => writeln!(out, "{name:<8} {:>12.6} {:>12.6}", iv[j], o[j])?,
            None => writeln!(out, "{name:<8} {:>12.6}", iv[j])?,
        }
    }
    writeln!(
        out,
        "cycles {}, m {}, raw H {:.6}, clamped {}",
        series.cycles(),
        ie.gph.m,
        ie.gph.h_raw,
        ie.gph.clamped
    )?;
    if let Some(o) = &os {
        writeln!(out, "fisher condition {:.4e}, projected {}", o.fisher_condition, o.projected)?;
    }
    let split = |v: &[f64]| json!({"phi": v[..v.len() - 1], "H": v[v.len() - 1]});
    let mut summary = json!({
        "T": series.period(),
        "cycles": series.cycles(),
        "delta": a.delta,
        "m": ie.gph.m,
        "h_raw": ie.gph.h_raw,
        "clamped": ie.gph.clamped,
        "initial": split(&iv),
    });
    if let Some(o) = &os {
        summary["one_step"] = split(&o.theta.to_vec());
        summary["fisher_condition"] = json!(o.fisher_condition);
        summary["projected"] = json!(o.projected);
    }
    writeln!(out, "{summary}")?;
    Ok(())
}

pub fn mc(a: McArgs) -> Result<(), CliError> {
    let values = parse_list("theta", &a.theta)?;
    if values.len() != a.period + 1 {
        return Err(usage(format!(
            "--theta has {} values but --T {} needs {}",
            values.len(),
            a.period,
            a.period + 1
        )));
    }
    let theta = Theta::from_slice(&values)?;
    let mut config = McConfig::new(theta, a.n, a.replicates, a.seed);
    config.delta = a.delta;
    config.burnin = a.burnin;
    let report = montecarlo::run_experiment(&config)?;
    let mut out = output(&a.out_report)?;
    report.write_table(&mut out)?;
    out.flush()?;
    if let Some(p) = &a.out_errors {
        montecarlo::export_error_samples(&report, p)?;
    }
    eprintln!(
        "{} replicates ({} failed) in {:.2} s",
        a.replicates,
        report.failures.len(),
        report.elapsed.as_secs_f64()
    );
    Ok(())
}

fn parse_window(text: &str) -> Result<(i32, i32), CliError> {
    let bad = || usage(format!("--window must look like YYYY-YYYY, got `{text}`"));
    let (a, b) = text.split_once('-').ok_or_else(bad)?;
    let a: i32 = a.trim().parse().map_err(|_| bad())?;
    let b: i32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn write_fit(out: &mut dyn Write, r: &FitReport, stamps: &[(i32, usize)]) -> io::Result<()> {
    writeln!(out, "model,param,value")?;
    let names = montecarlo::param_names(r.period);
    for (model, theta) in [("sfar_initial", &r.sfar_initial), ("sfar", &r.sfar)] {
        for (n, v) in names.iter().zip(theta.to_vec()) {
            writeln!(out, "{model},{n},{v}")?;
        }
    }
    for (u, a) in r.sar_alpha.iter().enumerate() {
        writeln!(out, "sar,alpha{},{a}", u + 1)?;
    }
    for (u, m) in r.season_means.iter().enumerate() {
        writeln!(out, "mean,season{},{m}", u + 1)?;
    }
    writeln!(out)?;
    writeln!(out, "model,season,rmse,mae")?;
    writeln!(out, "sfar,all,{},{}", r.sfar_stats.rmse, r.sfar_stats.mae)?;
    writeln!(out, "sar,all,{},{}", r.sar_stats.rmse, r.sar_stats.mae)?;
    for (u, (s, b)) in r.season_stats.iter().enumerate() {
        writeln!(out, "sfar,{},{},{}", u + 1, s.rmse, s.mae)?;
        writeln!(out, "sar,{},{},{}", u + 1, b.rmse, b.mae)?;
    }
    writeln!(out)?;
    writeln!(out, "lag,acf,pacf")?;
    for (k, acf) in r.acf.iter().enumerate() {
        let pacf = if k == 0 { String::new() } else { r.pacf[k - 1].to_string() };
        writeln!(out, "{k},{acf},{pacf}")?;
    }
    writeln!(out)?;
    writeln!(out, "year,period,actual,sfar,sar")?;
    for p in &r.predictions {
        let (y, q) = stamps[p.index];
        writeln!(out, "{y},{q},{},{},{}", p.actual, p.sfar, p.sar)?;
    }
    writeln!(out)?;
    let summary = json!({
        "rmse_sfar": r.sfar_stats.rmse,
        "rmse_sar": r.sar_stats.rmse,
        "mae_sfar": r.sfar_stats.mae,
        "mae_sar": r.sar_stats.mae,
    });
    writeln!(out, "{summary}")
}

pub fn fit(a: FitArgs) -> Result<(), CliError> {
    if a.period == 0 || 12 % a.period != 0 {
        return Err(usage(format!("--T must divide 12, got {}", a.period)));
    }
    let monthly = datafit::load_csv(&a.input)?;
    let monthly = match &a.window {
        Some(w) => {
            let (from, to) = parse_window(w)?;
            monthly.window(from, to)?
        }
        None => monthly,
    };
    let seasonal = datafit::aggregate(&monthly, a.period)?;
    let report = datafit::compare_models(&seasonal.to_seasonal()?, a.delta)?;
    let mut out = output(&a.out)?;
    write_fit(&mut out, &report, &seasonal.stamps)?;
    out.flush()?;
    Ok(())
}
