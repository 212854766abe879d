//! Inner integrator for time-1 flows and solution trajectories.

use serde::{Deserialize, Serialize};

use crate::calculus::VectorField;
use crate::error::{Error, Result};

/// Step policy shared by the geometric and branched solvers. The inner
/// method is always classical fourth-order Runge-Kutta.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogOdeConfig {
    /// Runge-Kutta steps per unit of flow time.
    pub substeps: usize,
}

impl Default for LogOdeConfig {
    fn default() -> Self {
        LogOdeConfig { substeps: 4 }
    }
}

impl LogOdeConfig {
    pub fn new(substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::InvalidConfig("substeps must be at least 1".into()));
        }
        Ok(LogOdeConfig { substeps })
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("state {x:?}")))
    }
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Time-`time` flow of an autonomous field by RK4 with `steps` equal steps.
pub fn rk4_flow<V: VectorField + ?Sized>(
    field: &V,
    x0: &[f64],
    time: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    let h = time / steps as f64;
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let k1 = field.value(&x)?;
        let k2 = field.value(&axpy(&x, h / 2.0, &k1))?;
        let k3 = field.value(&axpy(&x, h / 2.0, &k2))?;
        let k4 = field.value(&axpy(&x, h, &k3))?;
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_finite(&x)?;
    }
    Ok(x)
}

/// Time-1 flow with the configured number of substeps.
pub fn time_one_flow<V: VectorField + ?Sized>(
    field: &V,
    x0: &[f64],
    config: &LogOdeConfig,
) -> Result<Vec<f64>> {
    rk4_flow(field, x0, 1.0, config.substeps)
}

/// Uniform partition of `[start, end]` into `2^level` intervals.
pub fn dyadic_partition(start: f64, end: f64, level: u32) -> Vec<f64> {
    let n = 1usize << level;
    (0..=n)
        .map(|k| start + (end - start) * k as f64 / n as f64)
        .collect()
}

pub fn validate_partition(partition: &[f64]) -> Result<()> {
    if partition.len() < 2 {
        return Err(Error::InvalidConfig(
            "partition needs at least two points".into(),
        ));
    }
    if partition.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig(
            "partition must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// States of a solution at the points of a partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    /// State at a partition time, matched up to rounding.
    pub fn state_at(&self, t: f64) -> Result<&[f64]> {
        let scale = (self.end() - self.start()).abs().max(1.0);
        let k = self.times.partition_point(|&s| s < t - 1e-12 * scale);
        match self.times.get(k) {
            Some(&s) if (s - t).abs() <= 1e-12 * scale => Ok(&self.states[k]),
            _ => Err(Error::OutOfDomain {
                t,
                start: self.start(),
                end: self.end(),
            }),
        }
    }
}

/// Composes one-step maps over a partition.
pub(crate) fn integrate<F>(partition: &[f64], z0: &[f64], mut step: F) -> Result<Trajectory>
where
    F: FnMut(f64, f64, &[f64]) -> Result<Vec<f64>>,
{
    validate_partition(partition)?;
    check_finite(z0)?;
    let mut states = Vec::with_capacity(partition.len());
    states.push(z0.to_vec());
    for w in partition.windows(2) {
        let next = step(w[0], w[1], states.last().unwrap())?;
        check_finite(&next)?;
        states.push(next);
    }
    Ok(Trajectory {
        times: partition.to_vec(),
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;

    struct Linear([[f64; 2]; 2]);

    impl VectorField for Linear {
        fn dim(&self) -> usize {
            2
        }

        fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
            let v: Vec<Jet> = (0..2)
                .map(|j| Jet::variable(x, order, j))
                .collect::<Result<_>>()?;
            Ok(self
                .0
                .iter()
                .map(|row| v[0].scale(row[0]).add(&v[1].scale(row[1])))
                .collect())
        }
    }

    #[test]
    fn rotation_flow() {
        let f = Linear([[0.0, -1.0], [1.0, 0.0]]);
        let x = rk4_flow(&f, &[1.0, 0.0], 1.0, 64).unwrap();
        assert!((x[0] - 1f64.cos()).abs() < 1e-9);
        assert!((x[1] - 1f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn blow_up_is_reported() {
        let f = Linear([[1e3, 0.0], [0.0, 1e3]]);
        assert!(rk4_flow(&f, &[1.0, 1.0], 1.0, 1).is_ok());
        assert!(matches!(
            rk4_flow(&f, &[1.0, 1.0], 1.0, 200),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn trajectory_lookup() {
        let tr = integrate(&dyadic_partition(0.0, 1.0, 2), &[0.0], |s, t, z| {
            Ok(vec![z[0] + t - s])
        })
        .unwrap();
        assert_eq!(tr.state_at(0.5).unwrap(), &[0.5]);
        assert!(tr.state_at(0.3).is_err());
        assert!(LogOdeConfig::new(0).is_err());
        assert!(validate_partition(&[0.0, 0.0]).is_err());
    }
}
