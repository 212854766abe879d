//! Connes-Kreimer coproduct and antipode on forests.
//!
//! `Delta(t) = sum_{s in Sub(t)} (t \ s) (x) s`, where `s` runs over the
//! root subtrees of `t` including the empty one and `t` itself; `t \ s` is
//! the forest of branches cut away. Coefficients are integers.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use super::tree::{Forest, LabeledTree};

/// Formal integer combination of forests.
pub type ForestSum = BTreeMap<Forest, i64>;

/// Formal integer combination of `left (x) right` pairs.
pub type CoproductSum = BTreeMap<(Forest, Forest), i64>;

/// Every nonempty root subtree of `tree`, one entry per keep/cut choice,
/// as `(cut branches, trunk)`.
pub fn root_cuts(tree: &LabeledTree) -> Vec<(Vec<LabeledTree>, LabeledTree)> {
    // partial choices over the children seen so far: (pruned, kept children)
    let mut partial: Vec<(Vec<LabeledTree>, Vec<LabeledTree>)> = vec![(Vec::new(), Vec::new())];
    for child in tree.children() {
        let child_cuts = root_cuts(child);
        let mut next = Vec::with_capacity(partial.len() * (child_cuts.len() + 1));
        for (pruned, kept) in &partial {
            let mut cut_whole = pruned.clone();
            cut_whole.push(child.clone());
            next.push((cut_whole, kept.clone()));
            for (child_pruned, child_trunk) in &child_cuts {
                let mut p = pruned.clone();
                p.extend(child_pruned.iter().cloned());
                let mut k = kept.clone();
                k.push(child_trunk.clone());
                next.push((p, k));
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|(pruned, kept)| (pruned, LabeledTree::graft(tree.label(), kept)))
        .collect()
}

/// Coproduct of a single tree.
pub fn coproduct_tree(tree: &LabeledTree) -> CoproductSum {
    let mut out = CoproductSum::new();
    out.insert((Forest::single(tree.clone()), Forest::unit()), 1);
    for (pruned, trunk) in root_cuts(tree) {
        *out.entry((Forest::from_trees(pruned), Forest::single(trunk)))
            .or_insert(0) += 1;
    }
    out
}

/// Coproduct of a forest, extended multiplicatively from trees.
pub fn coproduct(forest: &Forest) -> CoproductSum {
    let mut acc = CoproductSum::new();
    acc.insert((Forest::unit(), Forest::unit()), 1);
    for tree in forest.trees() {
        let factor = coproduct_tree(tree);
        let mut next = CoproductSum::new();
        for ((l1, r1), c1) in &acc {
            for ((l2, r2), c2) in &factor {
                *next.entry((l1.mul(l2), r1.mul(r2))).or_insert(0) += c1 * c2;
            }
        }
        acc = next;
    }
    acc
}

/// Coproduct as a flat term list, memoized across calls.
pub fn coproduct_terms(forest: &Forest) -> Arc<Vec<(Forest, Forest, i64)>> {
    static CACHE: OnceLock<Mutex<HashMap<Forest, Arc<Vec<(Forest, Forest, i64)>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(forest) {
        return hit.clone();
    }
    let terms: Vec<_> = coproduct(forest)
        .into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|((l, r), c)| (l, r, c))
        .collect();
    let terms = Arc::new(terms);
    cache.lock().unwrap().insert(forest.clone(), terms.clone());
    terms
}

fn antipode_tree_memo(tree: &LabeledTree, memo: &mut HashMap<LabeledTree, ForestSum>) -> ForestSum {
    if let Some(hit) = memo.get(tree) {
        return hit.clone();
    }
    // S(t) = -t - sum_{proper nonempty s} S(t \ s) s
    let mut out = ForestSum::new();
    out.insert(Forest::single(tree.clone()), -1);
    for (pruned, trunk) in root_cuts(tree) {
        if pruned.is_empty() {
            continue;
        }
        let mut prod = ForestSum::new();
        prod.insert(Forest::single(trunk), 1);
        for branch in &pruned {
            let s = antipode_tree_memo(branch, memo);
            prod = multiply_sums(&prod, &s);
        }
        for (f, c) in prod {
            *out.entry(f).or_insert(0) -= c;
        }
    }
    out.retain(|_, c| *c != 0);
    memo.insert(tree.clone(), out.clone());
    out
}

pub fn multiply_sums(a: &ForestSum, b: &ForestSum) -> ForestSum {
    let mut out = ForestSum::new();
    for (fa, ca) in a {
        for (fb, cb) in b {
            *out.entry(fa.mul(fb)).or_insert(0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Antipode, multiplicative over the trees of the forest; `S(1) = 1`.
pub fn antipode(forest: &Forest) -> ForestSum {
    static CACHE: OnceLock<Mutex<HashMap<LabeledTree, ForestSum>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut memo = cache.lock().unwrap();
    let mut acc = ForestSum::new();
    acc.insert(Forest::unit(), 1);
    for tree in forest.trees() {
        let s = antipode_tree_memo(tree, &mut memo);
        acc = multiply_sums(&acc, &s);
    }
    acc
}

/// `(Delta (x) Id) Delta` and `(Id (x) Delta) Delta` as triple sums.
pub fn iterated_coproducts(
    forest: &Forest,
) -> (
    BTreeMap<(Forest, Forest, Forest), i64>,
    BTreeMap<(Forest, Forest, Forest), i64>,
) {
    let mut left = BTreeMap::new();
    let mut right = BTreeMap::new();
    for ((l, r), c) in coproduct(forest) {
        for ((ll, lr), c2) in coproduct(&l) {
            *left.entry((ll, lr, r.clone())).or_insert(0) += c * c2;
        }
        for ((rl, rr), c2) in coproduct(&r) {
            *right.entry((l.clone(), rl, rr)).or_insert(0) += c * c2;
        }
    }
    left.retain(|_, c| *c != 0);
    right.retain(|_, c| *c != 0);
    (left, right)
}

/// `M(S (x) Id) Delta` and `M(Id (x) S) Delta` applied to a forest.
pub fn antipode_contractions(forest: &Forest) -> (ForestSum, ForestSum) {
    let mut left = ForestSum::new();
    let mut right = ForestSum::new();
    for ((l, r), c) in coproduct(forest) {
        let mut single_r = ForestSum::new();
        single_r.insert(r.clone(), c);
        let mut single_l = ForestSum::new();
        single_l.insert(l.clone(), c);
        for (f, v) in multiply_sums(&antipode(&l), &single_r) {
            *left.entry(f).or_insert(0) += v;
        }
        for (f, v) in multiply_sums(&single_l, &antipode(&r)) {
            *right.entry(f).or_insert(0) += v;
        }
    }
    left.retain(|_, c| *c != 0);
    right.retain(|_, c| *c != 0);
    (left, right)
}
