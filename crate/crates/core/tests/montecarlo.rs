use nalgebra::SymmetricEigen;
use sfar::model::Theta;
use sfar::montecarlo::{run_experiment, McConfig};
use sfar::onestep::fisher_information;

fn config(v: &[f64], n: usize, m: usize, seed: u64, one_step: bool) -> McConfig {
    let mut c = McConfig::new(Theta::from_slice(v).unwrap(), n, m, seed);
    c.one_step = one_step;
    c
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn iqr(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.75) - quantile(&v, 0.25)
}

#[test]
fn short_samples_overestimate_hurst() {
    let r = run_experiment(&config(&[0.2, 0.8, 0.6], 100, 200, 11, false)).unwrap();
    let bias = r.initial[2].bias;
    assert!(bias > 0.1, "bias {bias}");
}

#[test]
fn initial_rmse_of_hurst_falls_with_sample_size() {
    for v in [[0.6, 0.2, 0.8], [0.2, 0.8, 0.6]] {
        let rmse: Vec<f64> = [100usize, 1000, 2000]
            .iter()
            .map(|&n| run_experiment(&config(&v, n, 200, 21, false)).unwrap().initial[2].rmse)
            .collect();
        assert!(rmse[0] > rmse[1] && rmse[1] > rmse[2], "θ={v:?}: {rmse:?}");
    }
}

#[test]
fn repeated_runs_are_identical() {
    let c = config(&[0.6, 0.2, 0.8], 120, 8, 5, true);
    assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
}

#[test]
fn one_step_tightens_hurst_errors_at_large_n() {
    let r = run_experiment(&config(&[0.6, 0.2, 0.8], 2000, 100, 31, true)).unwrap();
    let ie_h: Vec<f64> = r.samples.initial.iter().map(|e| e[2]).collect();
    let os_h: Vec<f64> = r.samples.one_step.as_ref().unwrap().iter().map(|e| e[2]).collect();
    assert!(iqr(os_h.clone()) < iqr(ie_h.clone()), "{} vs {}", iqr(os_h), iqr(ie_h));
}

/// Standardised one-step errors `√n·I^{1/2}(θ̃ − θ)` at n = 2000.
#[test]
#[ignore = "fails: heavy tails from replicates where GPH returns H near 0.99 (see README)"]
fn standardised_one_step_errors_look_normal() {
    let v = [0.6, 0.2, 0.8];
    let n = 2000;
    let r = run_experiment(&config(&v, n, 500, 31, true)).unwrap();
    let os = r.samples.one_step.as_ref().unwrap();
    let fim = fisher_information(&Theta::from_slice(&v).unwrap()).unwrap();
    let eig = SymmetricEigen::new(fim.matrix().clone());
    let root = &eig.eigenvectors
        * nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let m = os.len() as f64;
    let mut report = Vec::new();
    for j in 0..3 {
        let z: Vec<f64> = os
            .iter()
            .map(|e| (0..3).map(|k| root[(j, k)] * e[k]).sum::<f64>() * (n as f64).sqrt())
            .collect();
        let mean = z.iter().sum::<f64>() / m;
        let m2 = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m;
        let m3 = z.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / m;
        let m4 = z.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
        report.push((m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0));
    }
    eprintln!("standardised one-step errors (skewness, excess kurtosis): {report:?}");
    for (j, (skew, kurt)) in report.iter().enumerate() {
        assert!(skew.abs() < 0.3 && kurt.abs() < 0.5, "component {j}: skew {skew}, kurtosis {kurt}");
    }
}
