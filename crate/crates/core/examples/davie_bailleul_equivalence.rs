//! Davie residuals against Bailleul residuals on a geometric experiment.

use roughflow::experiment::{Experiment, ExperimentConfig};

fn main() -> roughflow::Result<()> {
    for name in ["smoke_geometric.json", "geometric_p3.json"] {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("configs")
            .join(name);
        let outcome = Experiment::load(ExperimentConfig::from_file(&path)?)?.run()?;
        println!("{name} (depth {})", outcome.depth);
        for r in &outcome.reports {
            println!(
                "  {:<10} {:<9} slope {:>6.3}  R^2 {:.4}",
                r.kind,
                r.f_id,
                r.slope.unwrap_or(f64::NAN),
                r.r_squared.unwrap_or(f64::NAN)
            );
        }
        println!("  all checks passed: {}", outcome.passed);
    }
    Ok(())
}
