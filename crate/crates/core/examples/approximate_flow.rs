//! The flows mu_ts of branched increments compose up to a small defect.

use roughflow::branched::synthetic_level2;
use roughflow::branched_rde::{approximate_flow_check, mu_step};
use roughflow::calculus::PolynomialSystem;
use roughflow::ode::LogOdeConfig;
use roughflow::path::PiecewiseLinearPath;

fn main() -> roughflow::Result<()> {
    let fields = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/fields_2d.json");
    let system = PolynomialSystem::from_json_file(std::path::Path::new(fields))?;
    let x = synthetic_level2(PiecewiseLinearPath::smooth(2, 1024, 1.0, 0.1)?, 0.5)?;
    let cfg = LogOdeConfig::default();
    let samples = vec![vec![0.1, -0.2], vec![0.5, 0.3], vec![-0.4, 0.0]];

    let moved = mu_step(&system, &x.increment(0.0, 0.5)?, &samples[0], &cfg)?;
    println!("mu_(0,1/2) moves {:?} to {moved:?}", samples[0]);

    let mut last: Option<f64> = None;
    for level in 1..=7 {
        let h = 0.5f64.powi(level);
        let defect =
            approximate_flow_check(&system, &x, 0.25, 0.25 + h / 2.0, 0.25 + h, &samples, &cfg)?;
        let rate = last.map(|d| (d / defect).log2());
        println!(
            "|t - s| = {h:<10} defect {defect:.3e}  {}",
            rate.map_or(String::new(), |r| format!("local order {r:.2}"))
        );
        last = Some(defect);
    }
    Ok(())
}
