//! Equations driven by branched rough paths: the flow `mu_ts` of
//! `V(log_* X_ts)`, the Gubinelli/Davie and Bailleul residuals, the Taylor
//! gap of the flow and the approximate-flow defect.

use crate::branched::BranchedRoughPath;
use crate::calculus::{
    series_operator_values, series_operator_vector, NamedFunction, TestFunction,
    TreeCombinationField, VectorFieldSystem,
};
use crate::error::{Error, Result};
use crate::ode::{integrate, time_one_flow, LogOdeConfig, Trajectory};
use crate::residual::{dyadic_sweep, euclidean_norm, reports_from_sweep, ResidualReport};
use crate::trees::{BranchedGroupElement, TreeSeries, GROUPLIKE_TOLERANCE};

/// Tree-supported series with zero unit coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchedLieSeries(TreeSeries);

impl BranchedLieSeries {
    /// Accepts `series` if its unit coefficient vanishes and its mass on
    /// proper forests is at most `tol`; that residue is then dropped.
    pub fn new(series: TreeSeries, tol: f64) -> Result<Self> {
        if series.unit_coefficient() != 0.0 {
            return Err(Error::UnitCoefficient {
                expected: 0.0,
                found: series.unit_coefficient(),
            });
        }
        let mass = series.proper_forest_mass();
        if mass > tol {
            return Err(Error::NotLie(mass));
        }
        Ok(BranchedLieSeries(series.tree_part()))
    }

    /// `log_* X`, projected onto single trees.
    pub fn log_of(x: &BranchedGroupElement) -> Result<Self> {
        Self::new(x.series().log_star()?, GROUPLIKE_TOLERANCE)
    }

    pub fn series(&self) -> &TreeSeries {
        &self.0
    }
}

/// `V(L) = sum_t L_t V(t*)`.
pub fn branched_field<'a, S>(
    system: &'a S,
    lambda: &BranchedLieSeries,
) -> Result<TreeCombinationField<'a, S>>
where
    S: VectorFieldSystem + ?Sized,
{
    TreeCombinationField::from_series(system, lambda.series())
}

/// `mu_ts(z)`, the time-1 flow of `V(log_* X_ts)`.
pub fn mu_step<S>(
    system: &S,
    x: &BranchedGroupElement,
    z: &[f64],
    config: &LogOdeConfig,
) -> Result<Vec<f64>>
where
    S: VectorFieldSystem + ?Sized,
{
    let lambda = BranchedLieSeries::log_of(x)?;
    let field = branched_field(system, &lambda)?;
    if field.terms().is_empty() {
        return Ok(z.to_vec());
    }
    time_one_flow(&field, z, config)
}

/// Composition of `mu` steps over `partition`.
pub fn solve_branched_rde<S>(
    system: &S,
    x: &BranchedRoughPath,
    partition: &[f64],
    z0: &[f64],
    config: &LogOdeConfig,
) -> Result<Trajectory>
where
    S: VectorFieldSystem + ?Sized,
{
    if z0.len() != system.state_dim() {
        return Err(Error::ShapeMismatch(format!(
            "state of dimension {} for a system on R^{}",
            z0.len(),
            system.state_dim()
        )));
    }
    integrate(partition, z0, |s, t, z| {
        mu_step(system, &x.increment(s, t)?, z, config)
    })
}

/// `sup_x |f(mu_ts(x)) - (V(X_ts) f)(x)|`; the unit forest contributes `f(x)`.
pub fn branched_taylor_gap<S, F>(
    system: &S,
    x: &BranchedGroupElement,
    f: &F,
    samples: &[Vec<f64>],
    config: &LogOdeConfig,
) -> Result<f64>
where
    S: VectorFieldSystem + ?Sized,
    F: TestFunction,
{
    let mut sup = 0.0f64;
    for p in samples {
        let moved = mu_step(system, x, p, config)?;
        let expansion =
            series_operator_values(system, x.series(), &[f as &dyn TestFunction], p)?[0];
        sup = sup.max((f.value(&moved)? - expansion).abs());
    }
    Ok(sup)
}

/// `z_t - (V(X_ts) Id)(z_s)`.
pub fn gubinelli_davie_residual<S>(
    system: &S,
    z: &Trajectory,
    x: &BranchedRoughPath,
    s: f64,
    t: f64,
) -> Result<Vec<f64>>
where
    S: VectorFieldSystem + ?Sized,
{
    let zs = z.state_at(s)?;
    let zt = z.state_at(t)?;
    let expansion = series_operator_vector(system, x.increment(s, t)?.series(), zs)?;
    Ok(zt.iter().zip(&expansion).map(|(a, b)| a - b).collect())
}

/// `f(z_t) - (V(X_ts) f)(z_s)`.
pub fn bailleul_branched_residual<S, F>(
    system: &S,
    f: &F,
    z: &Trajectory,
    x: &BranchedRoughPath,
    s: f64,
    t: f64,
) -> Result<f64>
where
    S: VectorFieldSystem + ?Sized,
    F: TestFunction,
{
    let zs = z.state_at(s)?;
    let zt = z.state_at(t)?;
    let expansion = series_operator_values(
        system,
        x.increment(s, t)?.series(),
        &[f as &dyn TestFunction],
        zs,
    )?[0];
    Ok(f.value(zt)? - expansion)
}

/// `sup_x |mu_tu(mu_us(x)) - mu_ts(x)|`.
#[allow(clippy::too_many_arguments)]
pub fn approximate_flow_check<S>(
    system: &S,
    x: &BranchedRoughPath,
    s: f64,
    u: f64,
    t: f64,
    samples: &[Vec<f64>],
    config: &LogOdeConfig,
) -> Result<f64>
where
    S: VectorFieldSystem + ?Sized,
{
    if !(s <= u && u <= t) {
        return Err(Error::InvalidInterval { s, t });
    }
    let (xsu, xut, xst) = (x.increment(s, u)?, x.increment(u, t)?, x.increment(s, t)?);
    let mut sup = 0.0f64;
    for p in samples {
        let two = mu_step(system, &xut, &mu_step(system, &xsu, p, config)?, config)?;
        let one = mu_step(system, &xst, p, config)?;
        let diff: Vec<f64> = two.iter().zip(&one).map(|(a, b)| a - b).collect();
        sup = sup.max(euclidean_norm(&diff));
    }
    Ok(sup)
}

/// Dyadic study of one branched solution: the Gubinelli/Davie residual
/// norm, Bailleul residuals and flow Taylor gaps per battery function, and
/// the approximate-flow defect at the window midpoint.
pub fn residual_study<S>(
    system: &S,
    x: &BranchedRoughPath,
    z: &Trajectory,
    battery: &[NamedFunction],
    levels: &[u32],
    config: &LogOdeConfig,
) -> Result<Vec<ResidualReport>>
where
    S: VectorFieldSystem + ?Sized,
{
    let mut labels = vec![("davie".to_string(), "-".to_string())];
    labels.extend(
        battery
            .iter()
            .map(|f| ("bailleul".to_string(), f.id.clone())),
    );
    labels.extend(
        battery
            .iter()
            .map(|f| ("branched_taylor_gap".to_string(), f.id.clone())),
    );
    labels.push(("flow_defect".to_string(), "-".to_string()));
    let functions: Vec<&dyn TestFunction> = battery.iter().map(|f| f.function.as_ref()).collect();
    let (scales, maxima) = dyadic_sweep(z.start(), z.end(), levels, |s, t| {
        let zs = z.state_at(s)?;
        let zt = z.state_at(t)?;
        let inc = x.increment(s, t)?;
        let expansion = series_operator_vector(system, inc.series(), zs)?;
        let davie: Vec<f64> = zt.iter().zip(&expansion).map(|(a, b)| a - b).collect();
        let mut row = vec![euclidean_norm(&davie)];
        let values = series_operator_values(system, inc.series(), &functions, zs)?;
        for (f, v) in functions.iter().zip(&values) {
            row.push(f.value(zt)? - v);
        }
        let moved = mu_step(system, &inc, zs, config)?;
        for (f, v) in functions.iter().zip(&values) {
            row.push(f.value(&moved)? - v);
        }
        let u = 0.5 * (s + t);
        row.push(approximate_flow_check(
            system,
            x,
            s,
            u,
            t,
            &[zs.to_vec()],
            config,
        )?);
        Ok(row)
    })?;
    Ok(reports_from_sweep(&scales, &maxima, &labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branched::branched_lift;
    use crate::calculus::{PolynomialMap, PolynomialSystem, SquaredNorm, VectorField};
    use crate::path::PiecewiseLinearPath;
    use crate::trees::LabeledTree;

    fn system() -> PolynomialSystem {
        PolynomialSystem::new(vec![
            PolynomialMap::vector(2, vec![vec![(vec![0, 1], 1.0)], vec![(vec![2, 0], 0.5)]])
                .unwrap(),
            PolynomialMap::affine(&[vec![0.1, 0.0], vec![0.0, -0.3]], &[1.0, 0.0]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn identity_element_does_not_move() {
        let s = system();
        let e = BranchedGroupElement::identity(2, 2);
        assert_eq!(
            mu_step(&s, &e, &[0.3, 0.1], &LogOdeConfig::default()).unwrap(),
            vec![0.3, 0.1]
        );
        let gap = branched_taylor_gap(
            &s,
            &e,
            &SquaredNorm { dim: 2 },
            &[vec![0.3, 0.1]],
            &LogOdeConfig::default(),
        )
        .unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn leaf_series_gives_driving_field() {
        let s = system();
        let lambda = BranchedLieSeries::new(
            TreeSeries::from_trees(2, 2, [(LabeledTree::leaf(1), 1.0)]).unwrap(),
            1e-12,
        )
        .unwrap();
        let v = branched_field(&s, &lambda)
            .unwrap()
            .value(&[0.2, 0.4])
            .unwrap();
        assert_eq!(v, s.field_value(1, &[0.2, 0.4]).unwrap());
    }

    #[test]
    fn proper_forests_are_rejected() {
        let mut t = TreeSeries::zero(2, 2);
        t.set("[a,b]".parse().unwrap(), 0.1).unwrap();
        assert!(BranchedLieSeries::new(t, 1e-10).is_err());
    }

    #[test]
    fn residuals_vanish_on_empty_windows() {
        let s = system();
        let x = branched_lift(PiecewiseLinearPath::smooth(2, 8, 1.0, 0.3).unwrap(), 2).unwrap();
        let cfg = LogOdeConfig::default();
        let z = solve_branched_rde(&s, &x, x.path().times(), &[0.1, 0.2], &cfg).unwrap();
        let r = gubinelli_davie_residual(&s, &z, &x, 0.5, 0.5).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-15));
        let d = approximate_flow_check(&s, &x, 0.25, 0.25, 0.75, &[vec![0.1, 0.2]], &cfg).unwrap();
        assert!(d < 1e-15);
    }
}
