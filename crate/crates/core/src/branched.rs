//! Branched rough paths over labelled trees: exact lifts of
//! piecewise-linear drivers and a synthetic non-geometric level-2 path.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::path::PiecewiseLinearPath;
use crate::residual::dyadic_windows;
use crate::trees::{
    enumerate_forests, enumerate_trees, BranchedGroupElement, LabeledTree, TreeSeries,
};

/// Polynomial in the local segment parameter `r`, lowest degree first.
type Poly = Vec<f64>;

fn poly_mul(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `start + scale * int_0^r p`.
fn poly_integral(p: &[f64], start: f64, scale: f64) -> Poly {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(start);
    out.extend(
        p.iter()
            .enumerate()
            .map(|(k, c)| scale * c / (k + 1) as f64),
    );
    out
}

fn poly_at_one(p: &[f64]) -> f64 {
    p.iter().sum()
}

/// Tree coefficients `H^t_ts` of a piecewise-linear path, by integrating
/// `H^{[t_1 ... t_n]_a}_{us} = int_s^u prod_i H^{t_i}_{vs} dh^a_v`
/// exactly, one linear piece at a time.
pub fn lift_tree_coefficients(
    path: &PiecewiseLinearPath,
    trees: &[LabeledTree],
    s: f64,
    t: f64,
) -> Result<HashMap<LabeledTree, f64>> {
    let mut order: Vec<&LabeledTree> = trees.iter().collect();
    order.sort_by_key(|t| t.nodes());
    let mut values: HashMap<LabeledTree, f64> = order.iter().map(|t| ((*t).clone(), 0.0)).collect();
    for (_, inc) in path.pieces(s, t)? {
        let mut polys: HashMap<&LabeledTree, Poly> = HashMap::with_capacity(order.len());
        for tree in &order {
            let mut integrand: Poly = vec![1.0];
            for child in tree.children() {
                let p = polys.get(child).ok_or_else(|| {
                    Error::InvalidConfig(format!("tree list is not closed under branches: {child}"))
                })?;
                integrand = poly_mul(&integrand, p);
            }
            let p = poly_integral(&integrand, values[*tree], inc[tree.label()]);
            polys.insert(tree, p);
        }
        for tree in &order {
            *values.get_mut(*tree).unwrap() = poly_at_one(&polys[tree]);
        }
    }
    Ok(values)
}

/// Branched `p`-rough path with increments `X_ts` for `s <= t`.
///
/// Either the exact lift of a piecewise-linear driver up to a grade cap,
/// or, when `drift` is set, the level-2 path
/// `X^{[b]_a}_ts = (geometric value) + drift * delta_ab * (t - s)`.
#[derive(Clone, Debug)]
pub struct BranchedRoughPath {
    path: PiecewiseLinearPath,
    cap: usize,
    drift: f64,
    trees: Vec<LabeledTree>,
}

/// Exact branched lift up to grade `cap`.
pub fn branched_lift(path: PiecewiseLinearPath, cap: usize) -> Result<BranchedRoughPath> {
    if cap == 0 {
        return Err(Error::InvalidConfig("grade cap must be positive".into()));
    }
    let trees = enumerate_trees(cap, path.width());
    Ok(BranchedRoughPath {
        path,
        cap,
        drift: 0.0,
        trees,
    })
}

/// Non-geometric level-2 path: the lift of `path` plus the correction
/// `drift * (t - s)` on every tree `[b]_b`.
pub fn synthetic_level2(path: PiecewiseLinearPath, drift: f64) -> Result<BranchedRoughPath> {
    if !drift.is_finite() {
        return Err(Error::InvalidConfig("drift must be finite".into()));
    }
    let mut x = branched_lift(path, 2)?;
    x.drift = drift;
    Ok(x)
}

impl BranchedRoughPath {
    pub fn path(&self) -> &PiecewiseLinearPath {
        &self.path
    }

    pub fn width(&self) -> usize {
        self.path.width()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn start(&self) -> f64 {
        self.path.start()
    }

    pub fn end(&self) -> f64 {
        self.path.end()
    }

    /// Tree coefficients of `X_ts`.
    pub fn tree_coefficients(&self, s: f64, t: f64) -> Result<HashMap<LabeledTree, f64>> {
        let mut values = lift_tree_coefficients(&self.path, &self.trees, s, t)?;
        if self.drift != 0.0 {
            for a in 0..self.width() {
                let tree = LabeledTree::graft(a, vec![LabeledTree::leaf(a)]);
                *values.get_mut(&tree).unwrap() += self.drift * (t - s);
            }
        }
        Ok(values)
    }

    /// `X_ts` as a character on all forests up to the cap.
    pub fn increment(&self, s: f64, t: f64) -> Result<BranchedGroupElement> {
        let values = self.tree_coefficients(s, t)?;
        let series = TreeSeries::character(self.width(), self.cap, |tree| values[tree]);
        Ok(BranchedGroupElement::from_trusted(series))
    }

    /// `X_{0t}` from the start of the domain.
    pub fn prefix(&self, t: f64) -> Result<BranchedGroupElement> {
        self.increment(self.start(), t)
    }
}

/// `X_s^{-1} * X_t`.
pub fn chen_star_increment(
    xs: &BranchedGroupElement,
    xt: &BranchedGroupElement,
) -> Result<BranchedGroupElement> {
    xs.inverse().mul(xt)
}

/// Largest coefficient gap between the central difference of `u -> X_{0u}`
/// at `t` and `X_{0t} * (sum_a h'^a_t a*)`.
pub fn lift_ode_check(x: &BranchedRoughPath, t: f64, step: f64) -> Result<f64> {
    let (a, b) = (x.start(), x.end());
    if t - step < a || t + step > b {
        return Err(Error::OutOfDomain {
            t,
            start: a + step,
            end: b - step,
        });
    }
    let forward = x.prefix(t + step)?;
    let backward = x.prefix(t - step)?;
    let slope = forward.series().sub(backward.series())?.scale(0.5 / step);
    let velocity = x.path().velocity_at(t)?;
    let direction = TreeSeries::from_trees(
        x.width(),
        x.cap(),
        velocity
            .iter()
            .enumerate()
            .map(|(i, v)| (LabeledTree::leaf(i), *v)),
    )?;
    let rhs = x.prefix(t)?.series().convolve(&direction)?;
    Ok(slope.max_abs_diff(&rhs))
}

/// `max_phi sup |X^phi_ts| / |t - s|^{|phi| / p}` over dyadic windows.
pub fn branched_norm(x: &BranchedRoughPath, p: f64, levels: &[u32]) -> Result<f64> {
    graded_sup(x, None, p, levels)
}

/// The same functional applied to `X - Y` coefficientwise.
pub fn branched_distance(
    x: &BranchedRoughPath,
    y: &BranchedRoughPath,
    p: f64,
    levels: &[u32],
) -> Result<f64> {
    if x.width() != y.width() || x.cap() != y.cap() {
        return Err(Error::ShapeMismatch(
            "paths of different width or grade cap".into(),
        ));
    }
    graded_sup(x, Some(y), p, levels)
}

fn graded_sup(
    x: &BranchedRoughPath,
    y: Option<&BranchedRoughPath>,
    p: f64,
    levels: &[u32],
) -> Result<f64> {
    let forests = enumerate_forests(x.cap(), x.width());
    let mut sup = 0.0f64;
    for &level in levels {
        for (s, t) in dyadic_windows(x.start(), x.end(), level) {
            let a = x.increment(s, t)?;
            let b = y.map(|y| y.increment(s, t)).transpose()?;
            for forest in forests.iter().filter(|f| !f.is_unit()) {
                let mut v = a.series().get(forest);
                if let Some(b) = &b {
                    v -= b.series().get(forest);
                }
                sup = sup.max(v.abs() / (t - s).powf(forest.grade() as f64 / p));
            }
        }
    }
    Ok(sup)
}
