//! Finitely supported linear functionals on forests, truncated at a grade
//! cap, with the dual convolution product.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use super::hopf::{antipode, coproduct_terms};
use super::tree::{enumerate_forests, Forest, LabeledTree};
use crate::error::{Error, Result};

/// Tolerance on proper-forest mass for the group-like test.
pub const GROUPLIKE_TOLERANCE: f64 = 1e-10;

/// All forests of grade `<= cap` over `width` labels, memoized.
pub fn forest_basis(width: usize, cap: usize) -> Arc<Vec<Forest>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<Forest>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().unwrap();
    guard
        .entry((width, cap))
        .or_insert_with(|| Arc::new(enumerate_forests(cap, width)))
        .clone()
}

/// Map `Forest -> R` with grade `<= cap`; zero coefficients are not stored.
#[derive(Clone, PartialEq)]
pub struct TreeSeries {
    width: usize,
    cap: usize,
    coeffs: BTreeMap<Forest, f64>,
}

impl TreeSeries {
    pub fn zero(width: usize, cap: usize) -> Self {
        TreeSeries {
            width,
            cap,
            coeffs: BTreeMap::new(),
        }
    }

    /// The counit `1*`.
    pub fn unit(width: usize, cap: usize) -> Self {
        let mut s = Self::zero(width, cap);
        s.coeffs.insert(Forest::unit(), 1.0);
        s
    }

    /// Dual basis element `phi*`.
    pub fn dual(width: usize, cap: usize, forest: Forest) -> Result<Self> {
        let mut s = Self::zero(width, cap);
        s.set(forest, 1.0)?;
        Ok(s)
    }

    /// Series supported on single trees.
    pub fn from_trees<I>(width: usize, cap: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LabeledTree, f64)>,
    {
        let mut s = Self::zero(width, cap);
        for (t, c) in terms {
            s.add_to(Forest::single(t), c)?;
        }
        Ok(s)
    }

    /// Character with the given tree coefficients, extended multiplicatively
    /// to every forest up to the cap.
    pub fn character<F>(width: usize, cap: usize, tree_coeff: F) -> Self
    where
        F: Fn(&LabeledTree) -> f64,
    {
        let mut memo: HashMap<&LabeledTree, f64> = HashMap::new();
        let basis = forest_basis(width, cap);
        let mut s = Self::zero(width, cap);
        for forest in basis.iter() {
            let mut c = 1.0;
            for t in forest.trees() {
                c *= *memo.entry(t).or_insert_with(|| tree_coeff(t));
            }
            if c != 0.0 {
                s.coeffs.insert(forest.clone(), c);
            }
        }
        s
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn get(&self, forest: &Forest) -> f64 {
        self.coeffs.get(forest).copied().unwrap_or(0.0)
    }

    pub fn get_tree(&self, tree: &LabeledTree) -> f64 {
        self.get(&Forest::single(tree.clone()))
    }

    /// Coefficient of the empty forest.
    pub fn unit_coefficient(&self) -> f64 {
        self.get(&Forest::unit())
    }

    fn check_forest(&self, forest: &Forest) -> Result<()> {
        if forest.grade() > self.cap {
            return Err(Error::GradeTooLarge {
                grade: forest.grade(),
                cap: self.cap,
            });
        }
        if let Some(label) = forest.max_label().filter(|&l| l >= self.width) {
            return Err(Error::BadLabel {
                label,
                width: self.width,
            });
        }
        Ok(())
    }

    pub fn set(&mut self, forest: Forest, value: f64) -> Result<()> {
        self.check_forest(&forest)?;
        if value == 0.0 {
            self.coeffs.remove(&forest);
        } else {
            self.coeffs.insert(forest, value);
        }
        Ok(())
    }

    pub fn add_to(&mut self, forest: Forest, value: f64) -> Result<()> {
        let v = self.get(&forest) + value;
        self.set(forest, v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Forest, f64)> {
        self.coeffs.iter().map(|(f, c)| (f, *c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.width != other.width || self.cap != other.cap {
            return Err(Error::ShapeMismatch(format!(
                "(width {}, cap {}) vs (width {}, cap {})",
                self.width, self.cap, other.width, other.cap
            )));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, b_factor: f64) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (f, c) in &other.coeffs {
            let v = out.get(f) + b_factor * c;
            if v == 0.0 {
                out.coeffs.remove(f);
            } else {
                out.coeffs.insert(f.clone(), v);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = Self::zero(self.width, self.cap);
        if factor != 0.0 {
            for (f, c) in &self.coeffs {
                out.coeffs.insert(f.clone(), c * factor);
            }
        }
        out
    }

    /// Same coefficients under a different grade cap (higher grades dropped).
    pub fn with_cap(&self, cap: usize) -> Self {
        TreeSeries {
            width: self.width,
            cap,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(f, _)| f.grade() <= cap)
                .map(|(f, c)| (f.clone(), *c))
                .collect(),
        }
    }

    /// Dual convolution `(Y * X)(theta) = (Y (x) X)(Delta theta)`,
    /// truncated at the cap.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = Self::zero(self.width, self.cap);
        if self.is_empty() || other.is_empty() {
            return Ok(out);
        }
        for theta in forest_basis(self.width, self.cap).iter() {
            let mut acc = 0.0;
            for (l, r, c) in coproduct_terms(theta).iter() {
                let y = match self.coeffs.get(l) {
                    Some(y) => *y,
                    None => continue,
                };
                if let Some(x) = other.coeffs.get(r) {
                    acc += *c as f64 * y * x;
                }
            }
            if acc != 0.0 {
                out.coeffs.insert(theta.clone(), acc);
            }
        }
        Ok(out)
    }

    /// `[a, b]_* = a * b - b * a`.
    pub fn star_bracket(&self, other: &Self) -> Result<Self> {
        self.convolve(other)?.sub(&other.convolve(self)?)
    }

    /// Pull-back through the antipode: `a^{-1}(theta) = a(S theta)`.
    /// This is the convolution inverse whenever `a` is a character.
    pub fn dual_inverse(&self) -> Self {
        let mut out = Self::zero(self.width, self.cap);
        for theta in forest_basis(self.width, self.cap).iter() {
            let v: f64 = antipode(theta)
                .iter()
                .map(|(f, c)| *c as f64 * self.get(f))
                .sum();
            if v != 0.0 {
                out.coeffs.insert(theta.clone(), v);
            }
        }
        out
    }

    /// `sum_n a^{*n} / n!`; requires a zero unit coefficient.
    pub fn exp_star(&self) -> Result<Self> {
        if self.unit_coefficient() != 0.0 {
            return Err(Error::UnitCoefficient {
                expected: 0.0,
                found: self.unit_coefficient(),
            });
        }
        let mut sum = Self::unit(self.width, self.cap);
        let mut power = sum.clone();
        for n in 1..=self.cap {
            power = power.convolve(self)?.scale(1.0 / n as f64);
            sum = sum.add(&power)?;
        }
        Ok(sum)
    }

    /// `sum_{n>=1} (-1)^{n+1} (b - 1*)^{*n} / n`; requires a unit
    /// coefficient equal to one.
    pub fn log_star(&self) -> Result<Self> {
        if self.unit_coefficient() != 1.0 {
            return Err(Error::UnitCoefficient {
                expected: 1.0,
                found: self.unit_coefficient(),
            });
        }
        let x = self.sub(&Self::unit(self.width, self.cap))?;
        let mut sum = Self::zero(self.width, self.cap);
        let mut power = Self::unit(self.width, self.cap);
        for n in 1..=self.cap {
            power = power.convolve(&x)?;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            sum = sum.add(&power.scale(sign / n as f64))?;
        }
        Ok(sum)
    }

    /// Largest coefficient on forests with two or more trees.
    pub fn proper_forest_mass(&self) -> f64 {
        self.coeffs
            .iter()
            .filter(|(f, _)| f.len() >= 2)
            .map(|(_, c)| c.abs())
            .fold(0.0, f64::max)
    }

    /// Restriction to single trees (drops the unit and proper forests).
    pub fn tree_part(&self) -> Self {
        TreeSeries {
            width: self.width,
            cap: self.cap,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(f, _)| f.len() == 1)
                .map(|(f, c)| (f.clone(), *c))
                .collect(),
        }
    }

    /// Max over the basis of `|X(t_1...t_n) - prod X(t_i)|`, plus the
    /// deviation of the unit coefficient from one.
    pub fn character_defect(&self) -> f64 {
        let mut worst = (self.unit_coefficient() - 1.0).abs();
        for forest in forest_basis(self.width, self.cap).iter() {
            if forest.len() < 2 {
                continue;
            }
            let prod: f64 = forest
                .trees()
                .iter()
                .map(|t| self.get(&Forest::single(t.clone())))
                .product();
            worst = worst.max((self.get(forest) - prod).abs());
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (f, c) in &self.coeffs {
            worst = worst.max((c - other.get(f)).abs());
        }
        for (f, c) in &other.coeffs {
            if !self.coeffs.contains_key(f) {
                worst = worst.max(c.abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.abs()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for TreeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coeffs.iter()).finish()
    }
}

/// Outcome of the group-like test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupLikeCheck {
    pub grouplike: bool,
    pub deviation: f64,
}

/// Membership test for `exp_*` of tree-supported series: `log_*` must have
/// no mass on proper forests.
pub fn grouplike_check(x: &TreeSeries) -> GroupLikeCheck {
    match x.log_star() {
        Ok(log) => {
            let deviation = log.proper_forest_mass();
            GroupLikeCheck {
                grouplike: deviation <= GROUPLIKE_TOLERANCE,
                deviation,
            }
        }
        Err(_) => GroupLikeCheck {
            grouplike: false,
            deviation: f64::INFINITY,
        },
    }
}

/// Character of the tree Hopf algebra: unit coefficient one and
/// multiplicative over forests.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchedGroupElement(TreeSeries);

impl BranchedGroupElement {
    pub fn new(series: TreeSeries, tol: f64) -> Result<Self> {
        if series.unit_coefficient() != 1.0 {
            return Err(Error::UnitCoefficient {
                expected: 1.0,
                found: series.unit_coefficient(),
            });
        }
        let defect = series.character_defect();
        if defect > tol {
            return Err(Error::NotGroupLike(defect));
        }
        Ok(BranchedGroupElement(series))
    }

    pub fn identity(width: usize, cap: usize) -> Self {
        BranchedGroupElement(TreeSeries::unit(width, cap))
    }

    pub(crate) fn from_trusted(series: TreeSeries) -> Self {
        BranchedGroupElement(series)
    }

    pub fn series(&self) -> &TreeSeries {
        &self.0
    }

    pub fn into_series(self) -> TreeSeries {
        self.0
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(BranchedGroupElement(self.0.convolve(&other.0)?))
    }

    pub fn inverse(&self) -> Self {
        BranchedGroupElement(self.0.dual_inverse())
    }

    /// `log_*`, restricted to single trees.
    pub fn log(&self) -> TreeSeries {
        self.0
            .log_star()
            .expect("group elements have unit coefficient one")
            .tree_part()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(s: &str) -> LabeledTree {
        s.parse().unwrap()
    }

    fn forest(s: &str) -> Forest {
        s.parse().unwrap()
    }

    #[test]
    fn unit_is_neutral() {
        let a = TreeSeries::from_trees(2, 3, [(tree("a[b]"), 0.5), (tree("b"), -2.0)]).unwrap();
        let u = TreeSeries::unit(2, 3);
        assert_eq!(u.convolve(&a).unwrap(), a);
        assert_eq!(a.convolve(&u).unwrap(), a);
    }

    #[test]
    fn characters_add_on_leaves() {
        let y = TreeSeries::character(2, 3, |t| t.nodes() as f64 * 0.3 + t.label() as f64);
        let x = TreeSeries::character(2, 3, |t| -0.2 * t.nodes() as f64);
        let yx = y.convolve(&x).unwrap();
        for leaf in ["a", "b"] {
            let l = forest(leaf);
            assert!((yx.get(&l) - (y.get(&l) + x.get(&l))).abs() < 1e-15);
        }
    }

    #[test]
    fn square_of_leaf_dual() {
        let a = TreeSeries::dual(1, 2, forest("a")).unwrap();
        let sq = a.convolve(&a).unwrap();
        assert_eq!(sq.get(&forest("a[a]")), 1.0);
        assert_eq!(sq.get(&forest("[a,a]")), 2.0);
    }

    #[test]
    fn exp_star_examples() {
        assert_eq!(
            TreeSeries::zero(2, 3).exp_star().unwrap(),
            TreeSeries::unit(2, 3)
        );
        let lambda = 0.7;
        let a = TreeSeries::from_trees(1, 2, [(tree("a"), lambda)]).unwrap();
        let e = a.exp_star().unwrap();
        assert!((e.get(&forest("a")) - lambda).abs() < 1e-15);
        assert!((e.get(&forest("a[a]")) - lambda * lambda / 2.0).abs() < 1e-15);
        assert!(TreeSeries::unit(1, 2).exp_star().is_err());
        assert!(TreeSeries::zero(1, 2).log_star().is_err());
    }

    #[test]
    fn grouplike_examples() {
        let unit = grouplike_check(&TreeSeries::unit(2, 3));
        assert!(unit.grouplike);
        assert_eq!(unit.deviation, 0.0);
        let mut bad = TreeSeries::unit(2, 3);
        bad.set(forest("[a,b]"), 1.0).unwrap();
        assert!(!grouplike_check(&bad).grouplike);
    }

    #[test]
    fn rejects_out_of_range_forests() {
        let mut s = TreeSeries::zero(2, 2);
        assert!(matches!(
            s.set(forest("a[a,a]"), 1.0),
            Err(Error::GradeTooLarge { .. })
        ));
        assert!(matches!(
            s.set(forest("c"), 1.0),
            Err(Error::BadLabel { .. })
        ));
        let other = TreeSeries::zero(2, 3);
        assert!(s.convolve(&other).is_err());
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let mut s = TreeSeries::zero(2, 2);
        s.set(forest("a"), 1.0).unwrap();
        s.add_to(forest("a"), -1.0).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn group_element_inverse() {
        let x = TreeSeries::character(2, 3, |t| 0.1 * t.nodes() as f64 - 0.25 * t.label() as f64);
        let g = BranchedGroupElement::new(x, 1e-12).unwrap();
        let prod = g.inverse().mul(&g).unwrap();
        assert!(prod.series().max_abs_diff(&TreeSeries::unit(2, 3)) < 1e-12);
    }
}
