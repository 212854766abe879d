//! Truncated tensor algebra: exp/log, products and the Dynkin projection.

use roughflow::tensor::TruncatedTensor;

fn main() -> roughflow::Result<()> {
    let (width, depth) = (2, 4);
    let a = TruncatedTensor::letter(width, depth, 0).scale(0.6);
    let b = TruncatedTensor::letter(width, depth, 1).scale(-0.4);

    // exp(a) exp(b) = exp(c) with c a Lie element
    let g = a.exp()?.mul(&b.exp()?)?;
    let c = g.log();
    println!("log(exp a exp b), level by level:");
    for k in 1..=depth {
        println!("  level {k}: {:?}", c.as_tensor().level(k));
    }
    println!(
        "Lie deviation of the logarithm: {:.2e}",
        c.as_tensor().lie_deviation()
    );

    // the level-2 part is half the commutator
    let bracket = a.bracket(&b)?;
    println!(
        "level-2 part vs [a, b] / 2: {:?} vs {:?}",
        c.as_tensor().level(2),
        bracket.scale(0.5).level(2)
    );

    let back = c.exp();
    println!(
        "exp(log g) - g: {:.2e}",
        back.as_tensor().max_abs_diff(g.as_tensor())
    );
    println!(
        "homogeneous norm of g: {:.6}",
        g.as_tensor().homogeneous_norm()
    );
    Ok(())
}
