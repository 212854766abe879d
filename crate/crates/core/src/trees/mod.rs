//! Labelled rooted trees, forests, and the Connes-Kreimer Hopf algebra
//! together with its dual (convolution, `exp_*`, `log_*`, characters).

pub mod hopf;
pub mod series;
pub mod tree;

pub use hopf::{antipode, coproduct, coproduct_tree, CoproductSum, ForestSum};
pub use series::{
    grouplike_check, BranchedGroupElement, GroupLikeCheck, TreeSeries, GROUPLIKE_TOLERANCE,
};
pub use tree::{
    enumerate_forests, enumerate_trees, forests_of_grade, trees_with_nodes, Forest, LabeledTree,
};
