//! Elementary differentials of polynomial driving fields and the
//! composition rule for forest operators.

use roughflow::calculus::{
    bracket_field, morphism_check, tree_field, PolynomialMap, PolynomialSystem, SquaredNorm,
    VectorField,
};
use roughflow::trees::{enumerate_trees, Forest};

fn main() -> roughflow::Result<()> {
    let system = PolynomialSystem::new(vec![
        PolynomialMap::vector(
            2,
            vec![
                vec![(vec![0, 0], 0.5), (vec![0, 1], -0.3)],
                vec![(vec![1, 0], 0.4)],
            ],
        )?,
        PolynomialMap::vector(
            2,
            vec![
                vec![(vec![2, 0], 0.2)],
                vec![(vec![1, 0], -0.5), (vec![0, 1], 0.1)],
            ],
        )?,
    ])?;
    let x = [0.3, -0.7];

    println!("tree fields at {x:?}:");
    for tree in enumerate_trees(3, 2) {
        let v = tree_field(&system, &tree)?.value(&x)?;
        println!(
            "  {:<8} sigma {}  V = [{:+.6}, {:+.6}]",
            tree.to_string(),
            tree.sigma(),
            v[0],
            v[1]
        );
    }

    let b = bracket_field(&system, &[0, 1])?.value(&x)?;
    println!("[V_a, V_b] at x: {b:?}");

    let f = SquaredNorm { dim: 2 };
    let phi: Forest = "[a,b]".parse()?;
    let psi: Forest = "[a[b]]".parse()?;
    println!(
        "V(phi*) V(psi*) f - V(phi* . psi*) f = {:.2e}",
        morphism_check(&system, &phi, &psi, &f, &x)?
    );
    Ok(())
}
