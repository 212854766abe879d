//! Jet-level realizations of the differential operators.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_JET_ORDER};
use crate::trees::{Forest, LabeledTree, TreeSeries};

use super::{check_order, Coordinate, TestFunction, VectorField, VectorFieldSystem};

/// `V f = sum_j V^j d_j f`.
pub fn apply_field(v: &[Jet], f: &Jet) -> Result<Jet> {
    let mut acc: Option<Jet> = None;
    for (j, vj) in v.iter().enumerate() {
        let term = vj.mul(&f.deriv(j)?);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    acc.ok_or_else(|| Error::ShapeMismatch("empty vector field".into()))
}

/// `[V, W] = DW V - DV W`, the commutator of the two derivations.
pub fn lie_bracket(v: &[Jet], w: &[Jet]) -> Result<Vec<Jet>> {
    if v.len() != w.len() {
        return Err(Error::ShapeMismatch(
            "bracket of fields of different dimension".into(),
        ));
    }
    w.iter()
        .zip(v)
        .map(|(wk, vk)| Ok(apply_field(v, wk)?.sub(&apply_field(w, vk)?)))
        .collect()
}

/// `D^n g (W_1, ..., W_n)` with `x`-dependent arguments.
pub fn contract(g: &Jet, args: &[&[Jet]]) -> Result<Jet> {
    let Some((first, rest)) = args.split_first() else {
        return Ok(g.clone());
    };
    let mut acc: Option<Jet> = None;
    for (j, wj) in first.iter().enumerate() {
        let term = wj.mul(&contract(&g.deriv(j)?, rest)?);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    acc.ok_or_else(|| Error::ShapeMismatch("empty vector field".into()))
}

fn field_jets<S: VectorFieldSystem + ?Sized>(
    system: &S,
    x: &[f64],
    order: usize,
) -> Result<Vec<Vec<Jet>>> {
    check_order(order, system.max_order().min(MAX_JET_ORDER))?;
    (0..system.driver_dim())
        .map(|i| system.field_jet(i, x, order))
        .collect()
}

/// `(V_I f)(x) = V_{i_1}(...(V_{i_k} f))(x)`.
pub fn word_operator_apply<S, F>(system: &S, word: &[usize], f: &F, x: &[f64]) -> Result<f64>
where
    S: VectorFieldSystem + ?Sized,
    F: TestFunction + ?Sized,
{
    let k = word.len();
    check_order(k, f.max_order().min(MAX_JET_ORDER))?;
    let mut g = f.jet(x, k)?;
    if k == 0 {
        return Ok(g.value());
    }
    check_order(k - 1, system.max_order())?;
    for &i in word.iter().rev() {
        if i >= system.driver_dim() {
            return Err(Error::BadLabel {
                label: i,
                width: system.driver_dim(),
            });
        }
        g = apply_field(&system.field_jet(i, x, k - 1)?, &g)?;
    }
    Ok(g.value())
}

/// `(V_I f)(x)` for every word with `|I| <= depth`, grouped by level in
/// row-major word order; level 0 holds `f(x)`.
pub fn word_operator_values<S, F>(
    system: &S,
    f: &F,
    x: &[f64],
    depth: usize,
) -> Result<Vec<Vec<f64>>>
where
    S: VectorFieldSystem + ?Sized,
    F: TestFunction + ?Sized,
{
    check_order(depth, f.max_order().min(MAX_JET_ORDER))?;
    let base = field_jets(system, x, depth.saturating_sub(1))?;
    let mut level = vec![f.jet(x, depth)?];
    let mut out = vec![vec![level[0].value()]];
    for _ in 1..=depth {
        let mut next = Vec::with_capacity(level.len() * base.len());
        for v in &base {
            for g in &level {
                next.push(apply_field(v, g)?);
            }
        }
        out.push(next.iter().map(Jet::value).collect());
        level = next;
    }
    Ok(out)
}

/// `V_I(x) = (V_I Id)(x)` for every word with `1 <= |I| <= depth`; entry
/// `k - 1` holds level `k` in row-major word order.
pub fn word_field_values<S>(system: &S, x: &[f64], depth: usize) -> Result<Vec<Vec<Vec<f64>>>>
where
    S: VectorFieldSystem + ?Sized,
{
    let d = system.state_dim();
    let mut per_coord = Vec::with_capacity(d);
    for index in 0..d {
        per_coord.push(word_operator_values(
            system,
            &Coordinate { dim: d, index },
            x,
            depth,
        )?);
    }
    Ok((1..=depth)
        .map(|k| {
            (0..per_coord[0][k].len())
                .map(|w| per_coord.iter().map(|c| c[k][w]).collect())
                .collect()
        })
        .collect())
}

/// Jets of the bracket fields `V_[w]` for all words `1 <= |w| <= depth`,
/// each of order at least `order`. Entry `k - 1` holds level `k`.
pub fn bracket_jets<S>(
    system: &S,
    x: &[f64],
    depth: usize,
    order: usize,
) -> Result<Vec<Vec<Vec<Jet>>>>
where
    S: VectorFieldSystem + ?Sized,
{
    if depth == 0 {
        return Ok(Vec::new());
    }
    let base = field_jets(system, x, order + depth - 1)?;
    let mut out = vec![base.clone()];
    for _ in 2..=depth {
        let prev = out.last().unwrap();
        let mut next = Vec::with_capacity(prev.len() * base.len());
        for v in &base {
            for w in prev {
                next.push(lie_bracket(v, w)?);
            }
        }
        out.push(next);
    }
    Ok(out)
}

/// The field `V_[w] = [V_{w_1}, [V_{w_2}, ..., V_{w_k}]]`.
pub struct BracketField<'a, S: ?Sized> {
    system: &'a S,
    word: Vec<usize>,
}

pub fn bracket_field<'a, S>(system: &'a S, word: &[usize]) -> Result<BracketField<'a, S>>
where
    S: VectorFieldSystem + ?Sized,
{
    if word.is_empty() {
        return Err(Error::ShapeMismatch("bracket of the empty word".into()));
    }
    if let Some(&label) = word.iter().find(|&&i| i >= system.driver_dim()) {
        return Err(Error::BadLabel {
            label,
            width: system.driver_dim(),
        });
    }
    Ok(BracketField {
        system,
        word: word.to_vec(),
    })
}

impl<S: VectorFieldSystem + ?Sized> BracketField<'_, S> {
    fn jet_of(&self, word: &[usize], x: &[f64], order: usize) -> Result<Vec<Jet>> {
        match word {
            [i] => self.system.field_jet(*i, x, order),
            [i, rest @ ..] => {
                check_order(order + word.len() - 1, self.system.max_order())?;
                let v = self.system.field_jet(*i, x, order + 1)?;
                lie_bracket(&v, &self.jet_of(rest, x, order + 1)?)
            }
            [] => unreachable!(),
        }
    }
}

impl<S: VectorFieldSystem + ?Sized> VectorField for BracketField<'_, S> {
    fn dim(&self) -> usize {
        self.system.state_dim()
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.jet_of(&self.word, x, order)
    }
}

/// Memoized jets of tree fields `V(t*)` at one point.
///
/// `V(a*) = V_a` and `V([t_1 ... t_n]_a *) = D^n V_a(V(t_1*), ..., V(t_n*)) / m!`,
/// where `m!` is the product of factorials of the multiplicities among the
/// branches. With the branch fields already carrying their own symmetry
/// factors this is `F(t) / sigma(t)` for the unnormalized elementary
/// differential `F(t)`. Forest operators use the same multiplicity factor.
pub struct TreeJetCache<'a, S: ?Sized> {
    system: &'a S,
    x: Vec<f64>,
    order: usize,
    base: Vec<Option<Vec<Jet>>>,
    memo: HashMap<LabeledTree, Vec<Jet>>,
}

impl<'a, S: VectorFieldSystem + ?Sized> TreeJetCache<'a, S> {
    /// Driving fields are expanded to `order`; a tree with `n` nodes then
    /// comes out with order at least `order + 1 - n`.
    pub fn new(system: &'a S, x: &[f64], order: usize) -> Result<Self> {
        check_order(order, system.max_order().min(MAX_JET_ORDER))?;
        Ok(TreeJetCache {
            system,
            x: x.to_vec(),
            order,
            base: vec![None; system.driver_dim()],
            memo: HashMap::new(),
        })
    }

    fn base_jet(&mut self, label: usize) -> Result<&Vec<Jet>> {
        let width = self.base.len();
        let slot = self
            .base
            .get_mut(label)
            .ok_or(Error::BadLabel { label, width })?;
        if slot.is_none() {
            *slot = Some(self.system.field_jet(label, &self.x, self.order)?);
        }
        Ok(slot.as_ref().unwrap())
    }

    pub fn tree_jet(&mut self, tree: &LabeledTree) -> Result<Vec<Jet>> {
        if let Some(hit) = self.memo.get(tree) {
            return Ok(hit.clone());
        }
        let children = tree
            .children()
            .iter()
            .map(|c| self.tree_jet(c))
            .collect::<Result<Vec<_>>>()?;
        let factor =
            1.0 / Forest::from_trees(tree.children().to_vec()).multiplicity_factor() as f64;
        let args: Vec<&[Jet]> = children.iter().map(Vec::as_slice).collect();
        let base = self.base_jet(tree.label())?.clone();
        let out = base
            .iter()
            .map(|g| Ok(contract(g, &args)?.scale(factor)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| match e {
                Error::InsufficientJetOrder { .. } => Error::InsufficientJetOrder {
                    needed: tree.nodes() - 1,
                    available: self.order,
                },
                e => e,
            })?;
        self.memo.insert(tree.clone(), out.clone());
        Ok(out)
    }

    /// `V(phi*) g = D^n g(V(t_1*), ..., V(t_n*)) / m!`; the unit forest acts
    /// as the identity.
    pub fn forest_apply(&mut self, forest: &Forest, g: &Jet) -> Result<Jet> {
        if forest.is_unit() {
            return Ok(g.clone());
        }
        check_order(forest.len(), g.order())?;
        let jets = forest
            .trees()
            .iter()
            .map(|t| self.tree_jet(t))
            .collect::<Result<Vec<_>>>()?;
        let args: Vec<&[Jet]> = jets.iter().map(Vec::as_slice).collect();
        Ok(contract(g, &args)?.scale(1.0 / forest.multiplicity_factor() as f64))
    }
}

fn max_nodes<'t>(trees: impl Iterator<Item = &'t LabeledTree>) -> usize {
    trees.map(LabeledTree::nodes).max().unwrap_or(1)
}

/// The elementary differential `V(t*)` as a field.
pub struct TreeField<'a, S: ?Sized> {
    system: &'a S,
    tree: LabeledTree,
}

pub fn tree_field<'a, S>(system: &'a S, tree: &LabeledTree) -> Result<TreeField<'a, S>>
where
    S: VectorFieldSystem + ?Sized,
{
    if tree.max_label() >= system.driver_dim() {
        return Err(Error::BadLabel {
            label: tree.max_label(),
            width: system.driver_dim(),
        });
    }
    Ok(TreeField {
        system,
        tree: tree.clone(),
    })
}

impl<S: VectorFieldSystem + ?Sized> VectorField for TreeField<'_, S> {
    fn dim(&self) -> usize {
        self.system.state_dim()
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        let mut cache = TreeJetCache::new(self.system, x, order + self.tree.nodes() - 1)?;
        Ok(cache
            .tree_jet(&self.tree)?
            .iter()
            .map(|j| j.truncate(order))
            .collect())
    }
}

/// `V(L) = sum_t L_t V(t*)` for a tree-supported series `L`.
pub struct TreeCombinationField<'a, S: ?Sized> {
    system: &'a S,
    terms: Vec<(LabeledTree, f64)>,
}

impl<'a, S: VectorFieldSystem + ?Sized> TreeCombinationField<'a, S> {
    pub fn new(system: &'a S, terms: Vec<(LabeledTree, f64)>) -> Result<Self> {
        if let Some(t) = terms
            .iter()
            .find(|(t, _)| t.max_label() >= system.driver_dim())
        {
            return Err(Error::BadLabel {
                label: t.0.max_label(),
                width: system.driver_dim(),
            });
        }
        Ok(TreeCombinationField { system, terms })
    }

    /// Keeps the single-tree coefficients of `series`; forests with two or
    /// more trees and the unit coefficient are dropped.
    pub fn from_series(system: &'a S, series: &TreeSeries) -> Result<Self> {
        let terms = series
            .iter()
            .filter_map(|(f, c)| f.as_tree().map(|t| (t.clone(), c)))
            .filter(|(_, c)| *c != 0.0)
            .collect();
        Self::new(system, terms)
    }

    pub fn terms(&self) -> &[(LabeledTree, f64)] {
        &self.terms
    }
}

impl<S: VectorFieldSystem + ?Sized> VectorField for TreeCombinationField<'_, S> {
    fn dim(&self) -> usize {
        self.system.state_dim()
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        let d = self.system.state_dim();
        let mut acc = vec![Jet::constant(d, order, 0.0)?; d];
        if self.terms.is_empty() {
            return Ok(acc);
        }
        let m = order + max_nodes(self.terms.iter().map(|(t, _)| t)) - 1;
        let mut cache = TreeJetCache::new(self.system, x, m)?;
        for (tree, c) in &self.terms {
            let j = cache.tree_jet(tree)?;
            for (a, t) in acc.iter_mut().zip(&j) {
                *a = a.axpy(*c, t);
            }
        }
        Ok(acc)
    }
}

/// `(V(phi*) f)(x)`; the unit forest gives `f(x)`.
pub fn forest_operator_apply<S, F>(system: &S, forest: &Forest, f: &F, x: &[f64]) -> Result<f64>
where
    S: VectorFieldSystem + ?Sized,
    F: TestFunction + ?Sized,
{
    let n = forest.len();
    check_order(n, f.max_order().min(MAX_JET_ORDER))?;
    let mut cache = TreeJetCache::new(system, x, max_nodes(forest.trees().iter()) - 1)?;
    Ok(cache.forest_apply(forest, &f.jet(x, n)?)?.value())
}

/// `(V(a) f)(x) = sum_phi a_phi (V(phi*) f)(x)` for each function of `fs`,
/// sharing the tree jets.
pub fn series_operator_values<S>(
    system: &S,
    series: &TreeSeries,
    fs: &[&dyn TestFunction],
    x: &[f64],
) -> Result<Vec<f64>>
where
    S: VectorFieldSystem + ?Sized,
{
    let max_len = series.iter().map(|(f, _)| f.len()).max().unwrap_or(0);
    let nodes = max_nodes(series.iter().flat_map(|(f, _)| f.trees().iter()));
    let mut cache = TreeJetCache::new(system, x, nodes - 1)?;
    fs.iter()
        .map(|f| {
            check_order(max_len, f.max_order().min(MAX_JET_ORDER))?;
            let g = f.jet(x, max_len)?;
            let mut acc = 0.0;
            for (forest, c) in series.iter() {
                acc += c * cache.forest_apply(forest, &g)?.value();
            }
            Ok(acc)
        })
        .collect()
}

pub fn series_operator_apply<S, F>(system: &S, series: &TreeSeries, f: &F, x: &[f64]) -> Result<f64>
where
    S: VectorFieldSystem + ?Sized,
    F: TestFunction,
{
    Ok(series_operator_values(system, series, &[f as &dyn TestFunction], x)?[0])
}

/// `(V(a) Id)(x)`, applying the series to every coordinate function.
pub fn series_operator_vector<S>(system: &S, series: &TreeSeries, x: &[f64]) -> Result<Vec<f64>>
where
    S: VectorFieldSystem + ?Sized,
{
    let d = system.state_dim();
    let coords: Vec<Coordinate> = (0..d).map(|index| Coordinate { dim: d, index }).collect();
    let refs: Vec<&dyn TestFunction> = coords.iter().map(|c| c as &dyn TestFunction).collect();
    series_operator_values(system, series, &refs, x)
}

/// `|V(phi*)(V(psi*) f)(x) - V((phi* * psi*)) f(x)|`.
pub fn morphism_check<S, F>(system: &S, phi: &Forest, psi: &Forest, f: &F, x: &[f64]) -> Result<f64>
where
    S: VectorFieldSystem + ?Sized,
    F: TestFunction + ?Sized,
{
    let grade = phi.grade() + psi.grade();
    check_order(grade, f.max_order().min(MAX_JET_ORDER))?;
    let width = system.driver_dim();
    let mut cache = TreeJetCache::new(system, x, grade)?;
    let g = f.jet(x, grade)?;
    let inner = cache.forest_apply(psi, &g)?;
    let left = cache.forest_apply(phi, &inner)?.value();
    let cap = grade.max(1);
    let product = TreeSeries::dual(width, cap, phi.clone())?.convolve(&TreeSeries::dual(
        width,
        cap,
        psi.clone(),
    )?)?;
    let mut right = 0.0;
    for (theta, c) in product.iter() {
        right += c * cache.forest_apply(theta, &g)?.value();
    }
    Ok((left - right).abs())
}

#[cfg(test)]
mod tests {
    use super::super::{PolynomialMap, PolynomialSystem, SquaredNorm};
    use super::*;

    fn system_1d() -> PolynomialSystem {
        // V_1 = 1, V_2 = x
        PolynomialSystem::new(vec![
            PolynomialMap::vector(1, vec![vec![(vec![0], 1.0)]]).unwrap(),
            PolynomialMap::vector(1, vec![vec![(vec![1], 1.0)]]).unwrap(),
        ])
        .unwrap()
    }

    fn system_2d() -> PolynomialSystem {
        // V_1 = (1, 0), V_2 = (0, x_1)
        PolynomialSystem::new(vec![
            PolynomialMap::vector(2, vec![vec![(vec![0, 0], 1.0)], vec![]]).unwrap(),
            PolynomialMap::vector(2, vec![vec![], vec![(vec![1, 0], 1.0)]]).unwrap(),
        ])
        .unwrap()
    }

    fn square() -> PolynomialMap {
        PolynomialMap::scalar(1, vec![(vec![2], 1.0)]).unwrap()
    }

    #[test]
    fn word_operators_in_one_dimension() {
        let s = system_1d();
        let x = [1.7];
        // V_1 V_2 f = d/dx (x * 2x) = 4x
        assert!(
            (word_operator_apply(&s, &[0, 1], &square(), &x).unwrap() - 4.0 * 1.7).abs() < 1e-14
        );
        // V_2 V_1 f = x * d/dx(2x) = 2x
        assert!(
            (word_operator_apply(&s, &[1, 0], &square(), &x).unwrap() - 2.0 * 1.7).abs() < 1e-14
        );
        let table = word_operator_values(&s, &square(), &x, 2).unwrap();
        assert_eq!(table[0], vec![1.7 * 1.7]);
        assert!((table[2][1] - 4.0 * 1.7).abs() < 1e-14);
        assert!((table[2][2] - 2.0 * 1.7).abs() < 1e-14);
    }

    #[test]
    fn bracket_example() {
        let s = system_2d();
        let b = bracket_field(&s, &[0, 1]).unwrap();
        let v = b.value(&[0.3, 0.8]).unwrap();
        assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
        let same = bracket_field(&s, &[1, 1])
            .unwrap()
            .value(&[0.3, 0.8])
            .unwrap();
        assert_eq!(same, vec![0.0, 0.0]);
        let levels = bracket_jets(&s, &[0.3, 0.8], 2, 0).unwrap();
        assert!((levels[1][1][1].value() - 1.0).abs() < 1e-15);
        assert!((levels[1][2][1].value() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn insufficient_order_is_reported() {
        let s = system_2d();
        let w = vec![0; MAX_JET_ORDER + 1];
        assert!(matches!(
            word_operator_apply(&s, &w, &SquaredNorm { dim: 2 }, &[0.0, 0.0]),
            Err(Error::InsufficientJetOrder { .. })
        ));
        let mut cache = TreeJetCache::new(&s, &[0.0, 0.0], 0).unwrap();
        let t: LabeledTree = "a[b]".parse().unwrap();
        assert!(matches!(
            cache.tree_jet(&t),
            Err(Error::InsufficientJetOrder { .. })
        ));
    }

    #[test]
    fn unit_forest_and_leaf() {
        let s = system_1d();
        let x = [0.6];
        let unit = forest_operator_apply(&s, &Forest::unit(), &square(), &x).unwrap();
        assert!((unit - 0.36).abs() < 1e-15);
        let leaf: Forest = "b".parse().unwrap();
        let v = forest_operator_apply(&s, &leaf, &square(), &x).unwrap();
        assert!((v - 2.0 * 0.36).abs() < 1e-15);
        assert_eq!(
            morphism_check(&s, &Forest::unit(), &leaf, &square(), &x).unwrap(),
            0.0
        );
    }

    #[test]
    fn tree_field_symmetry_factor() {
        // V([b,b]_a*) = D^2 V_a(V_b, V_b) / 2 with V_a = x^2, V_b = x
        let s = PolynomialSystem::new(vec![
            PolynomialMap::vector(1, vec![vec![(vec![2], 1.0)]]).unwrap(),
            PolynomialMap::vector(1, vec![vec![(vec![1], 1.0)]]).unwrap(),
        ])
        .unwrap();
        let t: LabeledTree = "a[b,b]".parse().unwrap();
        let x = 0.9;
        let v = tree_field(&s, &t).unwrap().value(&[x]).unwrap();
        assert!((v[0] - 0.5 * 2.0 * x * x).abs() < 1e-15);
    }
}
