use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Rooted tree with vertex labels `0..width`, kept in canonical form:
/// children are sorted, so structural equality is tree isomorphism.
///
/// Labels print as letters (`a` is label 0), and a tree prints as
/// `a[b,c[d]]`: root `a` with children `b` and `c[d]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledTree {
    label: usize,
    children: Vec<LabeledTree>,
}

impl LabeledTree {
    pub fn leaf(label: usize) -> Self {
        LabeledTree {
            label,
            children: Vec::new(),
        }
    }

    /// `[children]_label`, with the children brought into canonical order.
    pub fn graft(label: usize, mut children: Vec<LabeledTree>) -> Self {
        children.sort();
        LabeledTree { label, children }
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn children(&self) -> &[LabeledTree] {
        &self.children
    }

    /// Number of vertices.
    pub fn nodes(&self) -> usize {
        1 + self.children.iter().map(|c| c.nodes()).sum::<usize>()
    }

    pub fn max_label(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.max_label())
            .fold(self.label, usize::max)
    }

    /// Symmetry factor: `prod_i n_i! sigma(t_i)^{n_i}` over the distinct
    /// children `t_i` with multiplicities `n_i`. Independent of the root label.
    pub fn sigma(&self) -> u64 {
        multiplicities(&self.children)
            .into_iter()
            .map(|(t, n)| factorial(n) * t.sigma().pow(n as u32))
            .product()
    }

    /// Canonical text encoding.
    pub fn encoding(&self) -> String {
        self.to_string()
    }

    pub fn with_root_label(&self, label: usize) -> Self {
        LabeledTree {
            label,
            children: self.children.clone(),
        }
    }
}

pub(crate) fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Distinct trees of a sorted list with their multiplicities.
pub(crate) fn multiplicities(trees: &[LabeledTree]) -> Vec<(&LabeledTree, usize)> {
    let mut out: Vec<(&LabeledTree, usize)> = Vec::new();
    for t in trees {
        match out.last_mut() {
            Some((last, n)) if *last == t => *n += 1,
            _ => out.push((t, 1)),
        }
    }
    out
}

fn label_char(label: usize) -> char {
    assert!(label < 26, "labels beyond 'z' have no text form");
    (b'a' + label as u8) as char
}

impl fmt::Display for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", label_char(self.label))?;
        if !self.children.is_empty() {
            write!(f, "[")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Finite multiset of trees, stored sorted. The empty forest is the unit.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Forest(Vec<LabeledTree>);

impl Forest {
    pub fn unit() -> Self {
        Forest(Vec::new())
    }

    pub fn single(tree: LabeledTree) -> Self {
        Forest(vec![tree])
    }

    pub fn from_trees(mut trees: Vec<LabeledTree>) -> Self {
        trees.sort();
        Forest(trees)
    }

    pub fn trees(&self) -> &[LabeledTree] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    /// The forest consists of exactly one tree.
    pub fn as_tree(&self) -> Option<&LabeledTree> {
        match self.0.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    /// `|phi|`, the total number of vertices.
    pub fn grade(&self) -> usize {
        self.0.iter().map(|t| t.nodes()).sum()
    }

    /// Commutative product of forests.
    pub fn mul(&self, other: &Forest) -> Forest {
        let mut trees = Vec::with_capacity(self.len() + other.len());
        trees.extend_from_slice(&self.0);
        trees.extend_from_slice(&other.0);
        Forest::from_trees(trees)
    }

    /// `prod_i n_i!` over the distinct trees with multiplicities `n_i`.
    pub fn multiplicity_factor(&self) -> u64 {
        multiplicities(&self.0)
            .into_iter()
            .map(|(_, n)| factorial(n))
            .product()
    }

    /// `sigma([t_1 ... t_n]_a)`, the symmetry factor of the grafted tree.
    pub fn grafted_sigma(&self) -> u64 {
        LabeledTree::graft(0, self.0.clone()).sigma()
    }

    pub fn max_label(&self) -> Option<usize> {
        self.0.iter().map(|t| t.max_label()).max()
    }
}

impl From<LabeledTree> for Forest {
    fn from(t: LabeledTree) -> Self {
        Forest::single(t)
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser {
            chars: s.chars().peekable(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.peek().is_some_and(|c| c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.peek().copied()
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.chars.next();
                Ok(())
            }
            other => Err(Error::Parse(format!("expected `{want}`, found {other:?}"))),
        }
    }

    fn tree(&mut self) -> Result<LabeledTree> {
        let label = match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {
                self.chars.next();
                (c as u8 - b'a') as usize
            }
            other => return Err(Error::Parse(format!("expected a label, found {other:?}"))),
        };
        let children = if self.peek() == Some('[') {
            self.list()?
        } else {
            Vec::new()
        };
        Ok(LabeledTree::graft(label, children))
    }

    fn list(&mut self) -> Result<Vec<LabeledTree>> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.peek() == Some(']') {
            self.chars.next();
            return Ok(out);
        }
        loop {
            out.push(self.tree()?);
            match self.peek() {
                Some(',') => {
                    self.chars.next();
                }
                Some(']') => {
                    self.chars.next();
                    return Ok(out);
                }
                other => {
                    return Err(Error::Parse(format!(
                        "expected `,` or `]`, found {other:?}"
                    )))
                }
            }
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(Error::Parse(format!("trailing input at `{c}`"))),
        }
    }
}

impl FromStr for LabeledTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser::new(s);
        let t = p.tree()?;
        p.finish()?;
        Ok(t)
    }
}

impl FromStr for Forest {
    type Err = Error;

    /// `[t1,t2,...]`; a bare tree is read as a one-tree forest.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser::new(s);
        let trees = if p.peek() == Some('[') {
            p.list()?
        } else {
            vec![p.tree()?]
        };
        p.finish()?;
        Ok(Forest::from_trees(trees))
    }
}

/// All canonical trees with exactly `nodes` vertices and labels `< width`.
pub fn trees_with_nodes(nodes: usize, width: usize) -> Vec<LabeledTree> {
    let mut by_size: Vec<Vec<LabeledTree>> = vec![Vec::new()];
    for n in 1..=nodes {
        let smaller: Vec<(usize, &LabeledTree)> = by_size
            .iter()
            .enumerate()
            .flat_map(|(k, ts)| ts.iter().map(move |t| (k, t)))
            .collect();
        let mut level = Vec::new();
        for child_set in multisets_with_weight(&smaller, n - 1) {
            for label in 0..width {
                level.push(LabeledTree::graft(label, child_set.clone()));
            }
        }
        level.sort();
        by_size.push(level);
    }
    by_size.swap_remove(nodes)
}

/// Multisets (non-decreasing index sequences) of weighted items whose
/// weights sum to `total`.
fn multisets_with_weight(items: &[(usize, &LabeledTree)], total: usize) -> Vec<Vec<LabeledTree>> {
    fn go(
        items: &[(usize, &LabeledTree)],
        from: usize,
        remaining: usize,
        current: &mut Vec<LabeledTree>,
        out: &mut Vec<Vec<LabeledTree>>,
    ) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for i in from..items.len() {
            let (w, t) = items[i];
            if w <= remaining {
                current.push(t.clone());
                go(items, i, remaining - w, current, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(items, 0, total, &mut Vec::new(), &mut out);
    out
}

/// All trees with at most `max_nodes` vertices, ordered by size.
pub fn enumerate_trees(max_nodes: usize, width: usize) -> Vec<LabeledTree> {
    (1..=max_nodes)
        .flat_map(|n| trees_with_nodes(n, width))
        .collect()
}

/// All forests of exactly the given grade.
pub fn forests_of_grade(grade: usize, width: usize) -> Vec<Forest> {
    let trees: Vec<(usize, LabeledTree)> = enumerate_trees(grade, width)
        .into_iter()
        .map(|t| (t.nodes(), t))
        .collect();
    let refs: Vec<(usize, &LabeledTree)> = trees.iter().map(|(n, t)| (*n, t)).collect();
    let mut out: Vec<Forest> = multisets_with_weight(&refs, grade)
        .into_iter()
        .map(Forest::from_trees)
        .collect();
    out.sort();
    out
}

/// All forests of grade at most `max_grade`, the unit first, ordered by grade.
pub fn enumerate_forests(max_grade: usize, width: usize) -> Vec<Forest> {
    (0..=max_grade)
        .flat_map(|g| forests_of_grade(g, width))
        .collect()
}

/// Groups a forest list by grade, counting entries.
pub fn count_by_grade(forests: &[Forest]) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for f in forests {
        *out.entry(f.grade()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> LabeledTree {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print() {
        let tree = t("a[c[d],b]");
        assert_eq!(tree.to_string(), "a[b,c[d]]");
        assert_eq!(tree.nodes(), 4);
        let forest: Forest = "[b, a[a]]".parse().unwrap();
        assert_eq!(forest.to_string(), "[a[a],b]");
        assert_eq!(forest.grade(), 3);
        assert_eq!("[]".parse::<Forest>().unwrap(), Forest::unit());
        assert!("a[".parse::<LabeledTree>().is_err());
        assert!("a]b".parse::<LabeledTree>().is_err());
        assert!("A".parse::<LabeledTree>().is_err());
    }

    #[test]
    fn canonical_equality() {
        assert_eq!(t("a[b,c[d]]"), t("a[c[d],b]"));
        assert_ne!(t("a[b]"), t("b[a]"));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(t("a").sigma(), 1);
        assert_eq!(t("b[a,a]").sigma(), 2);
        assert_eq!(t("c[a,b]").sigma(), 1);
        assert_eq!(t("a[b[c,c],b[c,c]]").sigma(), 8);
        assert_eq!(t("a[b,b,b]").sigma(), 6);
    }

    #[test]
    fn sigma_ignores_root_label() {
        for tree in enumerate_trees(5, 2) {
            assert_eq!(tree.sigma(), tree.with_root_label(1 - tree.label()).sigma());
        }
    }

    #[test]
    fn small_counts() {
        assert_eq!(trees_with_nodes(2, 2).len(), 4);
        assert_eq!(forests_of_grade(2, 1).len(), 2);
        assert_eq!(enumerate_forests(0, 3), vec![Forest::unit()]);
    }

    #[test]
    fn forest_factors() {
        let f: Forest = "[a[b,b],a[b,b],c]".parse().unwrap();
        assert_eq!(f.multiplicity_factor(), 2);
        assert_eq!(f.grafted_sigma(), 2 * 2 * 2);
    }
}
