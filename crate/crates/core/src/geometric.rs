//! Log-ODE scheme for equations driven by weak geometric rough paths, and
//! the Davie, Bailleul and flow-gap residuals.

use crate::calculus::{
    bracket_jets, word_field_values, word_operator_values, NamedFunction, TestFunction,
    VectorField, VectorFieldSystem,
};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::ode::{integrate, time_one_flow, LogOdeConfig, Trajectory};
use crate::residual::{dyadic_sweep, euclidean_norm, reports_from_sweep, ResidualReport};
use crate::signature::GeometricRoughPath;
use crate::tensor::{GroupTensor, LieTensor, TruncatedTensor};

/// `sum_w (l_w / |w|) V_[w]` for a Lie element with word coordinates `l_w`.
/// This realizes `sum_I L^I V_[I]` through the Dynkin decomposition.
pub struct LogOdeField<'a, S: ?Sized> {
    system: &'a S,
    /// Per level, the weights `l_w / |w|` in row-major word order.
    weights: Vec<Vec<f64>>,
}

pub fn log_ode_field<'a, S>(system: &'a S, lambda: &LieTensor) -> Result<LogOdeField<'a, S>>
where
    S: VectorFieldSystem + ?Sized,
{
    let t = lambda.as_tensor();
    if t.width() != system.driver_dim() {
        return Err(Error::ShapeMismatch(format!(
            "Lie element over {} letters for {} driving fields",
            t.width(),
            system.driver_dim()
        )));
    }
    let mut weights: Vec<Vec<f64>> = (1..=t.depth())
        .map(|k| t.level(k).iter().map(|c| c / k as f64).collect())
        .collect();
    while weights.last().is_some_and(|w| w.iter().all(|&c| c == 0.0)) {
        weights.pop();
    }
    Ok(LogOdeField { system, weights })
}

impl<S: VectorFieldSystem + ?Sized> LogOdeField<'_, S> {
    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }
}

impl<S: VectorFieldSystem + ?Sized> VectorField for LogOdeField<'_, S> {
    fn dim(&self) -> usize {
        self.system.state_dim()
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        let d = self.system.state_dim();
        let mut acc = vec![Jet::constant(d, order, 0.0)?; d];
        let brackets = bracket_jets(self.system, x, self.weights.len(), order)?;
        for (weights, level) in self.weights.iter().zip(&brackets) {
            for (&c, field) in weights.iter().zip(level) {
                if c != 0.0 {
                    for (a, f) in acc.iter_mut().zip(field) {
                        *a = a.axpy(c, f);
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// Time-1 flow of the log-ODE field of `lambda`, started at `z`.
pub fn log_ode_step<S>(
    system: &S,
    lambda: &LieTensor,
    z: &[f64],
    config: &LogOdeConfig,
) -> Result<Vec<f64>>
where
    S: VectorFieldSystem + ?Sized,
{
    let field = log_ode_field(system, lambda)?;
    if field.is_zero() {
        return Ok(z.to_vec());
    }
    time_one_flow(&field, z, config)
}

/// Log-ODE solution over `partition`, using `log X_ts` on each interval.
pub fn solve_rde<S>(
    system: &S,
    x: &GeometricRoughPath,
    partition: &[f64],
    z0: &[f64],
    config: &LogOdeConfig,
) -> Result<Trajectory>
where
    S: VectorFieldSystem + ?Sized,
{
    check_state(system, z0)?;
    integrate(partition, z0, |s, t, z| {
        log_ode_step(system, &x.increment(s, t)?.log(), z, config)
    })
}

fn check_state<S: VectorFieldSystem + ?Sized>(system: &S, z: &[f64]) -> Result<()> {
    if z.len() != system.state_dim() {
        return Err(Error::ShapeMismatch(format!(
            "state of dimension {} for a system on R^{}",
            z.len(),
            system.state_dim()
        )));
    }
    Ok(())
}

/// `sum_{1 <= |I| <= depth} X^I V_I(x)`.
fn taylor_increment<S>(system: &S, increment: &TruncatedTensor, x: &[f64]) -> Result<Vec<f64>>
where
    S: VectorFieldSystem + ?Sized,
{
    let fields = word_field_values(system, x, increment.depth())?;
    let mut out = vec![0.0; x.len()];
    for (k, level) in fields.iter().enumerate() {
        for (c, v) in increment.level(k + 1).iter().zip(level) {
            for (o, vi) in out.iter_mut().zip(v) {
                *o += c * vi;
            }
        }
    }
    Ok(out)
}

/// `sum_{1 <= |I| <= depth} X^I (V_I f)(x)`.
fn taylor_increment_scalar<S, F>(
    system: &S,
    f: &F,
    increment: &TruncatedTensor,
    x: &[f64],
) -> Result<f64>
where
    S: VectorFieldSystem + ?Sized,
    F: TestFunction + ?Sized,
{
    let table = word_operator_values(system, f, x, increment.depth())?;
    Ok((1..=increment.depth())
        .map(|k| {
            increment
                .level(k)
                .iter()
                .zip(&table[k])
                .map(|(c, v)| c * v)
                .sum::<f64>()
        })
        .sum())
}

/// `z_t - z_s - sum_{1 <= |I| <= [p]} X^I_ts V_I(z_s)`.
pub fn davie_residual<S>(
    system: &S,
    z: &Trajectory,
    x: &GeometricRoughPath,
    s: f64,
    t: f64,
) -> Result<Vec<f64>>
where
    S: VectorFieldSystem + ?Sized,
{
    let zs = z.state_at(s)?;
    let zt = z.state_at(t)?;
    let inc = x.increment(s, t)?;
    let taylor = taylor_increment(system, inc.as_tensor(), zs)?;
    Ok((0..zs.len()).map(|i| zt[i] - zs[i] - taylor[i]).collect())
}

/// `f(z_t) - f(z_s) - sum_{1 <= |I| <= [p]} X^I_ts (V_I f)(z_s)`.
pub fn bailleul_residual<S, F>(
    system: &S,
    f: &F,
    z: &Trajectory,
    x: &GeometricRoughPath,
    s: f64,
    t: f64,
) -> Result<f64>
where
    S: VectorFieldSystem + ?Sized,
    F: TestFunction + ?Sized,
{
    let zs = z.state_at(s)?;
    let zt = z.state_at(t)?;
    let inc = x.increment(s, t)?;
    Ok(f.value(zt)? - f.value(zs)? - taylor_increment_scalar(system, f, inc.as_tensor(), zs)?)
}

/// `sup_x |exp(sum L^I V_[I])(x) - x - sum X^I V_I(x)|` over the samples.
pub fn taylor_flow_gap<S>(
    system: &S,
    lambda: &LieTensor,
    increment: &GroupTensor,
    samples: &[Vec<f64>],
    config: &LogOdeConfig,
) -> Result<f64>
where
    S: VectorFieldSystem + ?Sized,
{
    let mut sup = 0.0f64;
    for x in samples {
        let flowed = log_ode_step(system, lambda, x, config)?;
        let taylor = taylor_increment(system, increment.as_tensor(), x)?;
        let gap: Vec<f64> = (0..x.len()).map(|i| flowed[i] - x[i] - taylor[i]).collect();
        sup = sup.max(euclidean_norm(&gap));
    }
    Ok(sup)
}

/// Dyadic study of one solution: the Davie residual norm, one Bailleul
/// residual per battery function and the flow gap at the window start.
pub fn residual_study<S>(
    system: &S,
    x: &GeometricRoughPath,
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
    labels.push(("taylor_gap".to_string(), "-".to_string()));
    let (scales, maxima) = dyadic_sweep(z.start(), z.end(), levels, |s, t| {
        let zs = z.state_at(s)?;
        let zt = z.state_at(t)?;
        let inc = x.increment(s, t)?;
        let taylor = taylor_increment(system, inc.as_tensor(), zs)?;
        let davie: Vec<f64> = (0..zs.len()).map(|i| zt[i] - zs[i] - taylor[i]).collect();
        let mut row = vec![euclidean_norm(&davie)];
        for f in battery {
            let f = f.function.as_ref();
            row.push(
                f.value(zt)?
                    - f.value(zs)?
                    - taylor_increment_scalar(system, f, inc.as_tensor(), zs)?,
            );
        }
        let flowed = log_ode_step(system, &inc.log(), zs, config)?;
        let gap: Vec<f64> = (0..zs.len())
            .map(|i| flowed[i] - zs[i] - taylor[i])
            .collect();
        row.push(euclidean_norm(&gap));
        Ok(row)
    })?;
    Ok(reports_from_sweep(&scales, &maxima, &labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{bracket_field, Coordinate, PolynomialMap, PolynomialSystem};
    use crate::path::PiecewiseLinearPath;

    fn linear_system() -> PolynomialSystem {
        // V_1(x) = A x, V_2(x) = B x
        PolynomialSystem::new(vec![
            PolynomialMap::affine(&[vec![0.0, -0.5], vec![0.5, 0.1]], &[0.0, 0.0]).unwrap(),
            PolynomialMap::affine(&[vec![0.2, 0.0], vec![0.3, -0.4]], &[0.0, 0.0]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn zero_lie_element_gives_identity() {
        let s = linear_system();
        let lambda = TruncatedTensor::zeros(2, 2).exp().unwrap().log();
        let z = log_ode_step(&s, &lambda, &[0.3, 0.4], &LogOdeConfig::default()).unwrap();
        assert_eq!(z, vec![0.3, 0.4]);
    }

    #[test]
    fn level_one_field_is_linear_combination() {
        let s = linear_system();
        let lambda = LieTensor::new(TruncatedTensor::from_vector(2, &[2.0, -1.0]), 1e-12).unwrap();
        let field = log_ode_field(&s, &lambda).unwrap();
        let v = field.value(&[1.0, 2.0]).unwrap();
        let a = s.field_value(0, &[1.0, 2.0]).unwrap();
        let b = s.field_value(1, &[1.0, 2.0]).unwrap();
        for i in 0..2 {
            assert!((v[i] - (2.0 * a[i] - b[i])).abs() < 1e-14);
        }
    }

    #[test]
    fn commutator_element_gives_bracket_field() {
        let s = linear_system();
        let e1 = TruncatedTensor::letter(2, 2, 0);
        let e2 = TruncatedTensor::letter(2, 2, 1);
        let lambda = LieTensor::new(e1.bracket(&e2).unwrap(), 1e-12).unwrap();
        let v = log_ode_field(&s, &lambda)
            .unwrap()
            .value(&[0.7, -0.2])
            .unwrap();
        let b = bracket_field(&s, &[0, 1])
            .unwrap()
            .value(&[0.7, -0.2])
            .unwrap();
        for i in 0..2 {
            assert!((v[i] - b[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_driver_gives_constant_solution() {
        let s = linear_system();
        let x = GeometricRoughPath::lift(PiecewiseLinearPath::zero(2, 8, 1.0).unwrap(), 2);
        let tr = solve_rde(
            &s,
            &x,
            x.path().times(),
            &[0.5, 0.5],
            &LogOdeConfig::default(),
        )
        .unwrap();
        assert!(tr.states.iter().all(|z| z == &vec![0.5, 0.5]));
        let r = davie_residual(&s, &tr, &x, 0.0, 1.0).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);
        let b =
            bailleul_residual(&s, &Coordinate { dim: 2, index: 0 }, &tr, &x, 0.25, 0.5).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn state_dimension_is_checked() {
        let s = linear_system();
        let x = GeometricRoughPath::lift(PiecewiseLinearPath::zero(2, 8, 1.0).unwrap(), 2);
        assert!(solve_rde(&s, &x, x.path().times(), &[0.5], &LogOdeConfig::default()).is_err());
    }
}
