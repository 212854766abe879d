//! Labelled rooted trees, the coproduct, the antipode and tree series.

use roughflow::experiment::hopf_selftest;
use roughflow::trees::{
    antipode, coproduct_tree, trees_with_nodes, Forest, LabeledTree, TreeSeries,
};

fn main() -> roughflow::Result<()> {
    for n in 1..=5 {
        println!(
            "{n} nodes: {} unlabelled trees, {} with two labels",
            trees_with_nodes(n, 1).len(),
            trees_with_nodes(n, 2).len()
        );
    }

    let tree: LabeledTree = "a[b,c[a]]".parse()?;
    println!("\ncoproduct of {tree} (pruned forest (x) trunk):");
    for ((pruned, trunk), c) in coproduct_tree(&tree) {
        println!("  {c:+} {pruned:?} (x) {trunk:?}");
    }
    println!("\nantipode of {tree}:");
    for (forest, c) in antipode(&Forest::single(tree.clone())) {
        println!("  {c:+} {forest:?}");
    }
    println!("symmetry factor sigma({tree}) = {}", tree.sigma());

    // a tree-supported series exponentiates to a character and back
    let lie = TreeSeries::from_trees(2, 3, [(LabeledTree::leaf(0), 0.3), ("b[a]".parse()?, -0.2)])?;
    let group = lie.exp_star()?;
    println!(
        "\ncharacter defect of exp(L): {:.2e}",
        group.character_defect()
    );
    println!(
        "log(exp(L)) - L: {:.2e}",
        group.log_star()?.max_abs_diff(&lie)
    );

    let report = hopf_selftest(2, 4);
    println!(
        "\nself-test on {} forests: coassociativity failures {}, antipode failures {}",
        report.forest_counts.iter().sum::<usize>(),
        report.coassociativity_failures.len(),
        report.antipode_failures.len()
    );
    Ok(())
}
