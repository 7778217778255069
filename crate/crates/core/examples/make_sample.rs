//! Writes the bundled synthetic monthly runoff file used by the `fit` examples.
//!
//! cargo run -p sfar-core --example make_sample -- crates/cli/data/sample_monthly.csv

use std::f64::consts::PI;
use std::io::Write;

use sfar::model::{simulate_sfar, Theta};

const FIRST_YEAR: i32 = 1920;
const YEARS: usize = 51;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "sample_monthly.csv".into());
    let phis = vec![0.55, 0.6, 0.5, 0.45, 0.7, 0.8, 0.75, 0.65, 0.5, 0.4, 0.45, 0.5];
    let theta = Theta::new(phis, 0.75)?;
    let x = simulate_sfar(&theta, YEARS, 1922, 1000)?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(out, "year,period,value")?;
    for (i, v) in x.values().iter().enumerate() {
        let month = i % 12 + 1;
        // Snowmelt peak in late spring.
        let level = 4000.0 + 14000.0 * (-((month as f64 - 6.0) / 1.6).powi(2)).exp()
            + 500.0 * (2.0 * PI * month as f64 / 12.0).cos();
        let value = (level + 1500.0 * v).max(50.0);
        writeln!(out, "{},{month},{value:.2}", FIRST_YEAR + (i / 12) as i32)?;
    }
    out.flush()?;
    Ok(())
}
