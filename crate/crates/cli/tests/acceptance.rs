//! Acceptance criteria, one line per criterion.
//!
//! Runs without the libtest harness so every criterion reports even when an
//! earlier one fails. The exit status is non-zero when a criterion outside
//! [`KNOWN_FAILURES`] fails, or when a known failure starts passing.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use proptest::test_runner::{Config, TestRunner};
use sfar::datafit::compare_models;
use sfar::estimators::{glse_estimate, DEFAULT_DELTA};
use sfar::fgn::{autocovariance, spectral_constant, spectral_density, Hurst};
use sfar::model::{additive_series, simulate_sfar, spectral_density_y, spectral_density_y_t2};
use sfar::montecarlo::{run_experiment, McConfig};
use sfar::onestep::{build_bundle, fisher_information, likelihood_and_score, log_likelihood, score, y_autocovariance};
use sfar::quad::{power_head, GradedMesh};
use sfar::Theta;

/// Criteria a faithful implementation does not meet; see README.
const KNOWN_FAILURES: &[u32] = &[8, 10];

type Check = fn() -> Result<(bool, String), String>;

fn theta(v: &[f64]) -> Theta {
    Theta::from_slice(v).unwrap()
}

fn c1_duality() -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    for h in [0.55, 0.7, 0.9] {
        let hh = Hurst::new(h).map_err(|e| e.to_string())?;
        let a = 1.0 - 2.0 * h;
        for k in 0..=10 {
            let mesh = GradedMesh::for_frequency(k as f64);
            let body = mesh.integrate(|l| (k as f64 * l).cos() * spectral_density(l, hh).unwrap());
            let head = spectral_constant(hh) * power_head(mesh.inner, a);
            let err = (2.0 * (body + head) - autocovariance(k, hh)).abs();
            worst = worst.max(err);
        }
    }
    Ok((worst <= 1e-6, format!("max abs error {worst:.2e} (tol 1e-6)")))
}

fn c2_closed_form() -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    for v in [[0.6, 0.2, 0.8], [0.2, 0.8, 0.6], [-0.5, 0.9, 0.6]] {
        let th = theta(&v);
        for i in 0..200 {
            let l = -PI + (i as f64 + 0.5) * 2.0 * PI / 200.0;
            let g = spectral_density_y(l, &th).map_err(|e| e.to_string())?;
            let c = spectral_density_y_t2(l, th.hurst(), v[0], v[1]).map_err(|e| e.to_string())?;
            worst = worst.max((g - c).abs() / c.abs().max(1.0));
        }
    }
    Ok((worst <= 1e-10, format!("max error {worst:.2e} (tol 1e-10)")))
}

/// `Cov(Y_0, Y_k)` from the moving-average weights of the additive series.
fn ma_oracle(k: usize, th: &Theta) -> f64 {
    let t = th.period();
    let max_phi = th.phis().iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let cycles = if max_phi == 0.0 { 1 } else { (1e-16f64.ln() / max_phi.ln()).ceil() as usize + 1 };
    let len = cycles * t;
    let w: Vec<f64> = (0..len).map(|s| th.phi(t - s % t).powi((s / t) as i32)).collect();
    let mut c = 0.0;
    for (a, wa) in w.iter().enumerate() {
        for (b, wb) in w.iter().enumerate() {
            c += wa * wb * autocovariance((k * t) as i64 + a as i64 - b as i64, th.hurst());
        }
    }
    c
}

fn c3_ma_oracle() -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    for v in [[0.6, 0.2, 0.8], [0.2, 0.8, 0.6], [-0.5, 0.9, 0.6]] {
        let th = theta(&v);
        for k in 0..=5 {
            let q = y_autocovariance(k as i64, &th).map_err(|e| e.to_string())?;
            let o = ma_oracle(k, &th);
            worst = worst.max((q - o).abs() / o.abs());
        }
    }
    Ok((worst <= 1e-4, format!("max relative error {worst:.2e} (tol 1e-4)")))
}

fn c4_score() -> Result<(bool, String), String> {
    let v = [0.6, 0.2, 0.8];
    let th = theta(&v);
    let y = additive_series(&simulate_sfar(&th, 64, 2024, 1000).map_err(|e| e.to_string())?);
    let sc = score(&y, &th).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        let (mut up, mut dn) = (v.to_vec(), v.to_vec());
        up[i] += 1e-5;
        dn[i] -= 1e-5;
        let fd = (log_likelihood(&y, &theta(&up)).map_err(|e| e.to_string())?
            - log_likelihood(&y, &theta(&dn)).map_err(|e| e.to_string())?)
            / 2e-5;
        worst = worst.max((sc[i] - fd).abs() / fd.abs());
    }
    Ok((worst <= 1e-4, format!("max relative error {worst:.2e} (tol 1e-4)")))
}

fn c5_fisher() -> Result<(bool, String), String> {
    let th = theta(&[0.6, 0.2, 0.8]);
    let (n, m) = (512, 500);
    let bundle = build_bundle(n, &th).map_err(|e| e.to_string())?;
    let mut scores = Vec::with_capacity(m);
    for i in 0..m {
        let y = additive_series(&simulate_sfar(&th, n, 50_000 + i as u64, 1000).map_err(|e| e.to_string())?);
        scores.push(likelihood_and_score(y.values(), &bundle).map_err(|e| e.to_string())?.1);
    }
    let d = th.dim();
    let mean: Vec<f64> = (0..d).map(|i| scores.iter().map(|s| s[i]).sum::<f64>() / m as f64).collect();
    let fim = fisher_information(&th).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let cov = scores.iter().map(|s| (s[i] - mean[i]) * (s[j] - mean[j])).sum::<f64>() / (m - 1) as f64;
            let emp = cov / n as f64;
            worst = worst.max((emp - fim.entry(i, j)).abs() / fim.entry(i, j).abs());
        }
    }
    Ok((worst <= 0.2, format!("max entry-wise relative gap {worst:.3} (tol 0.2)")))
}

fn c6_glse_ols() -> Result<(bool, String), String> {
    let mut runner = TestRunner::new(Config { cases: 100, failure_persistence: None, ..Config::default() });
    let strategy = (proptest::collection::vec(-10.0f64..10.0, 3..80), 1usize..5);
    let half = Hurst::new(0.5).unwrap();
    runner
        .run(&strategy, |(values, t)| {
            let lag = &values[..values.len() - 1];
            let lead = &values[1..];
            let den: f64 = lag.iter().map(|x| x * x).sum();
            proptest::prop_assume!(den > 1e-6);
            let ols = lead.iter().zip(lag).map(|(a, b)| a * b).sum::<f64>() / den;
            let g = glse_estimate(&values, half, t).unwrap();
            proptest::prop_assert!((g - ols).abs() <= 1e-12 * ols.abs().max(1.0), "{} vs {}", g, ols);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok((true, "100 cases agree to 1e-12".into()))
}

fn hurst_rmse(v: &[f64], cycles: usize, seed: u64) -> Result<(f64, f64), String> {
    let config = McConfig::new(theta(v), cycles, 200, seed);
    let report = run_experiment(&config).map_err(|e| e.to_string())?;
    let h = v.len() - 1;
    let os = report.one_step.as_ref().ok_or("one-step statistics missing")?;
    Ok((report.initial[h].rmse, os[h].rmse))
}

fn banded(v: &[f64], ie_band: (f64, f64), os_band: (f64, f64)) -> Result<(bool, String), String> {
    let (ie, os) = hurst_rmse(v, 1000, 7)?;
    let pass = (ie_band.0..=ie_band.1).contains(&ie) && (os_band.0..=os_band.1).contains(&os) && os < ie;
    Ok((
        pass,
        format!(
            "RMSE_IE(H) {ie:.4} in [{:.4}, {:.4}], RMSE_OS(H) {os:.4} in [{:.4}, {:.4}], OS < IE",
            ie_band.0, ie_band.1, os_band.0, os_band.1
        ),
    ))
}

fn c7_table2() -> Result<(bool, String), String> {
    banded(&[0.6, 0.2, 0.8], (0.055, 0.22), (0.033, 0.132))
}

fn c8_table5() -> Result<(bool, String), String> {
    banded(&[0.2, 0.8, 0.6], (0.1644 / 2.0, 0.1644 * 2.0), (0.0736 / 2.0, 0.0736 * 2.0))
}

fn c9_consistency() -> Result<(bool, String), String> {
    let v = [0.6, 0.2, 0.8];
    let mut rmse = Vec::new();
    for n in [100, 1000, 2000] {
        let mut config = McConfig::new(theta(&v), n, 200, 11);
        config.one_step = false;
        let report = run_experiment(&config).map_err(|e| e.to_string())?;
        rmse.push(report.initial[2].rmse);
    }
    let pass = rmse.windows(2).all(|w| w[1] < w[0]);
    Ok((pass, format!("RMSE_IE(H) at n = 100, 1000, 2000: {:.4}, {:.4}, {:.4}", rmse[0], rmse[1], rmse[2])))
}

fn c10_model_comparison() -> Result<(bool, String), String> {
    let th = theta(&[0.96, 0.82, 0.80, 0.90, 0.60]);
    let mut wins = 0;
    for seed in 0..20 {
        let series = simulate_sfar(&th, 41, 700 + seed, 1000).map_err(|e| e.to_string())?;
        let report = compare_models(&series, DEFAULT_DELTA).map_err(|e| e.to_string())?;
        if report.sfar_stats.rmse <= report.sar_stats.rmse {
            wins += 1;
        }
    }
    Ok((wins >= 12, format!("RMSE_SFAR <= RMSE_SAR in {wins}/20 runs (need 12)")))
}

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample_monthly.csv")
}

/// Stdout plus the contents of every file written under `dir`.
fn run_cli(args: &[String], threads: Option<&str>, env_threads: Option<&str>, dir: &Path) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sfar"));
    cmd.env_remove("SFAR_THREADS");
    if let Some(t) = threads {
        cmd.args(["--threads", t]);
    }
    if let Some(t) = env_threads {
        cmd.env("SFAR_THREADS", t);
    }
    let out = cmd.args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let mut bytes = out.stdout;
    let mut files: Vec<_> = std::fs::read_dir(dir).map_err(|e| e.to_string())?.flatten().map(|e| e.path()).collect();
    files.sort();
    for f in files.iter().filter(|f| f.extension().is_some_and(|e| e == "out")) {
        bytes.extend(std::fs::read(f).map_err(|e| e.to_string())?);
        std::fs::remove_file(f).map_err(|e| e.to_string())?;
    }
    Ok(bytes)
}

fn c11_determinism() -> Result<(bool, String), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let sim = d.join("sim.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_sfar"))
        .args(["simulate", "--T", "2", "--phi", "0.6,0.2", "--hurst", "0.8", "--cycles", "300", "--seed", "3", "--out"])
        .arg(&sim)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err("simulate failed".into());
    }
    let p = |x: &Path| x.to_str().unwrap().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let mut commands = vec![
        s(&["simulate", "--T", "2", "--phi", "0.6,0.2", "--hurst", "0.8", "--cycles", "200", "--seed", "5"]),
        s(&["spectrum", "--T", "2", "--phi", "0.6,0.2", "--hurst", "0.8", "--grid", "200"]),
        [s(&["estimate", "--in"]), vec![p(&sim)]].concat(),
        [s(&["fit", "--in"]), vec![p(&sample())], s(&["--window", "1922-1962", "--out"]), vec![p(&d.join("fit.out"))]].concat(),
    ];
    commands.push(
        [
            s(&["mc", "--theta", "0.6,0.2,0.8", "--T", "2", "--n", "200", "--M", "8", "--seed", "4", "--out-report"]),
            vec![p(&d.join("report.out")), "--out-errors".into(), p(&d.join("errors.out"))],
        ]
        .concat(),
    );
    let settings: [(Option<&str>, Option<&str>); 4] = [(None, None), (Some("1"), None), (Some("4"), None), (None, Some("3"))];
    for args in &commands {
        let reference = run_cli(args, None, None, d)?;
        for (flag, env) in settings {
            if run_cli(args, flag, env, d)? != reference {
                return Ok((false, format!("`sfar {}` differs with threads {flag:?} / env {env:?}", args[0])));
            }
        }
    }
    Ok((true, format!("{} commands byte-identical across 5 runs and thread settings", commands.len())))
}

fn main() -> ExitCode {
    let checks: [(u32, &str, Check); 11] = [
        (1, "fGn spectral-covariance duality", c1_duality),
        (2, "general density equals T=2 closed form", c2_closed_form),
        (3, "quadrature covariance equals MA oracle", c3_ma_oracle),
        (4, "analytic score equals finite differences", c4_score),
        (5, "Fisher information equals score covariance", c5_fisher),
        (6, "GLSE collapses to OLS at H=0.5", c6_glse_ols),
        (7, "Table 2 RMSE bands", c7_table2),
        (8, "Table 5 RMSE bands", c8_table5),
        (9, "initial RMSE of H decreases with n", c9_consistency),
        (10, "SFAR beats SAR on simulated Table 7 model", c10_model_comparison),
        (11, "CLI outputs are deterministic", c11_determinism),
    ];
    let mut ok = true;
    for (id, name, check) in checks {
        let start = Instant::now();
        let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (passed, known) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known, see README)",
            (true, true) => "PASS (expected to fail)",
        };
        println!("[{tag}] #{id} {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
        ok &= passed != known;
    }
    if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
