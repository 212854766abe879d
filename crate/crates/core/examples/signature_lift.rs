//! Lift a piecewise-linear path to its truncated signature and check Chen.

use roughflow::path::PiecewiseLinearPath;
use roughflow::signature::{holder_ratio, GeometricRoughPath};

fn main() -> roughflow::Result<()> {
    let path = PiecewiseLinearPath::smooth(2, 256, 1.0, 0.8)?;
    let x = GeometricRoughPath::lift(path, 3);

    let half = x.increment(0.0, 0.3)?;
    for k in 1..=3 {
        println!(
            "level {k} of X over [0, 0.3]: {:?}",
            half.as_tensor().level(k)
        );
    }

    let (s, u, t) = (0.125, 0.5, 0.875);
    let joined = x.increment(s, u)?.mul(&x.increment(u, t)?)?;
    let direct = x.increment(s, t)?;
    println!(
        "Chen defect on [{s}, {u}, {t}]: {:.2e}",
        joined.as_tensor().max_abs_diff(direct.as_tensor())
    );

    // area between the two coordinates
    let area = 0.5 * (direct.as_tensor().coeff(&[0, 1]) - direct.as_tensor().coeff(&[1, 0]));
    println!("Levy area on [{s}, {t}]: {area:.6}");

    for p in [2.5, 3.5] {
        println!(
            "p = {p}: sup ||X_st|| / |t-s|^(1/p) = {:.4}",
            holder_ratio(&x, p, 0..=6)?
        );
    }
    Ok(())
}
