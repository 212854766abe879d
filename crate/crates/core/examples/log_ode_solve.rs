//! Solve a rough differential equation with the log-ODE method and watch
//! the endpoint settle as the partition is refined.

use roughflow::calculus::PolynomialSystem;
use roughflow::geometric::solve_rde;
use roughflow::ode::{dyadic_partition, LogOdeConfig};
use roughflow::path::PiecewiseLinearPath;
use roughflow::signature::GeometricRoughPath;

fn main() -> roughflow::Result<()> {
    let fields = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/fields_2d.json");
    let system = PolynomialSystem::from_json_file(std::path::Path::new(fields))?;
    let path = PiecewiseLinearPath::smooth(2, 1024, 1.0, 1.0)?;
    let z0 = [0.1, -0.2];
    let cfg = LogOdeConfig::default();

    let exact = solve_rde(
        &system,
        &GeometricRoughPath::lift(path.clone(), 2),
        path.times(),
        &z0,
        &cfg,
    )?;
    let reference = exact.final_state().to_vec();
    println!("endpoint on all knots: {reference:?}");

    for depth in [1, 2, 3] {
        let x = GeometricRoughPath::lift(path.clone(), depth);
        println!("depth {depth}:");
        for level in 1..=6 {
            let z = solve_rde(&system, &x, &dyadic_partition(0.0, 1.0, level), &z0, &cfg)?;
            let err: f64 = z
                .final_state()
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            println!("  {:>3} steps  error {err:.3e}", 1 << level);
        }
    }
    Ok(())
}
