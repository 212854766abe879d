//! The same comparison for branched drivers: the lift of a smooth path and
//! a non-geometric level-2 path with an extra drift on `[b]_b`.

use roughflow::branched::{branched_lift, synthetic_level2};
use roughflow::experiment::{Experiment, ExperimentConfig};
use roughflow::path::PiecewiseLinearPath;

fn main() -> roughflow::Result<()> {
    let path = PiecewiseLinearPath::smooth(2, 64, 1.0, 0.5)?;
    let lift = branched_lift(path.clone(), 2)?;
    let synthetic = synthetic_level2(path, 0.5)?;
    let (s, t) = (0.25, 0.5);
    for (name, x) in [("lift", &lift), ("synthetic", &synthetic)] {
        let inc = x.increment(s, t)?;
        let a = inc.series().get_tree(&"a".parse()?);
        let aa = inc.series().get_tree(&"a[a]".parse()?);
        println!(
            "{name}: 2 X^[a]_a - (X^a)^2 = {:.6} on [{s}, {t}]",
            2.0 * aa - a * a
        );
    }

    for name in ["smoke_branched.json", "synthetic_branched.json"] {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("configs")
            .join(name);
        let outcome = Experiment::load(ExperimentConfig::from_file(&path)?)?.run()?;
        println!("{name}");
        for c in &outcome.checks {
            println!(
                "  {} {}: {}",
                if c.passed { "ok  " } else { "FAIL" },
                c.name,
                c.detail
            );
        }
    }
    Ok(())
}
