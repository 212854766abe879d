//! Driving vector fields, test functions and the differential operators
//! they generate: word operators, bracket fields, tree fields and forest
//! operators.

mod operators;
mod polynomial;

use std::sync::Arc;

pub use operators::{
    apply_field, bracket_field, bracket_jets, contract, forest_operator_apply, lie_bracket,
    morphism_check, series_operator_apply, series_operator_values, series_operator_vector,
    tree_field, word_field_values, word_operator_apply, word_operator_values, BracketField,
    TreeCombinationField, TreeField, TreeJetCache,
};
pub use polynomial::{Monomial, PolynomialMap, PolynomialSystem};

use crate::error::{Error, Result};
use crate::jet::{values, Jet, MAX_JET_ORDER};

/// The driving fields `V_1, ..., V_l` on `R^d`, with jets.
pub trait VectorFieldSystem: Send + Sync {
    fn state_dim(&self) -> usize;
    fn driver_dim(&self) -> usize;

    /// Highest derivative order the evaluators can supply.
    fn max_order(&self) -> usize {
        MAX_JET_ORDER
    }

    /// Declared smoothness, for reporting only.
    fn regularity(&self) -> f64 {
        f64::INFINITY
    }

    /// Jet of `V_i` at `x`, one scalar jet per component.
    fn field_jet(&self, i: usize, x: &[f64], order: usize) -> Result<Vec<Jet>>;

    fn field_value(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        Ok(values(&self.field_jet(i, x, 0)?))
    }
}

/// A real-valued function on the state space, with jets.
pub trait TestFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn max_order(&self) -> usize {
        MAX_JET_ORDER
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Jet>;

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.jet(x, 0)?.value())
    }
}

/// A first-order vector field on `R^d` with jets of any order.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>>;

    fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(values(&self.jet(x, 0)?))
    }
}

pub(crate) fn check_order(needed: usize, available: usize) -> Result<()> {
    if needed > available {
        return Err(Error::InsufficientJetOrder { needed, available });
    }
    Ok(())
}

/// `x -> x_index`.
#[derive(Clone, Debug)]
pub struct Coordinate {
    pub dim: usize,
    pub index: usize,
}

impl TestFunction for Coordinate {
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Jet> {
        Jet::variable(x, order, self.index)
    }
}

/// `x -> |x|^2`.
#[derive(Clone, Debug)]
pub struct SquaredNorm {
    pub dim: usize,
}

impl TestFunction for SquaredNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Jet> {
        let mut acc = Jet::constant(self.dim, order, 0.0)?;
        for j in 0..self.dim {
            let v = Jet::variable(x, order, j)?;
            acc = acc.add(&v.mul(&v));
        }
        Ok(acc)
    }
}

/// `x -> sin(x_0) exp(x_last / 2) + x_0 x_last`, a fixed non-polynomial
/// function with exact jets.
#[derive(Clone, Debug)]
pub struct Analytic {
    pub dim: usize,
}

impl TestFunction for Analytic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Jet> {
        let first = Jet::variable(x, order, 0)?;
        let last = Jet::variable(x, order, self.dim - 1)?;
        Ok(first
            .sin()
            .mul(&last.scale(0.5).exp())
            .add(&first.mul(&last)))
    }
}

/// Named test function, as used in residual batteries.
#[derive(Clone)]
pub struct NamedFunction {
    pub id: String,
    pub function: Arc<dyn TestFunction>,
}

impl std::fmt::Debug for NamedFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NamedFunction({})", self.id)
    }
}

/// Fixed quadratic `0.5 x_0^2 - x_0 x_last + 0.25 x_last^2 + x_0`.
pub fn fixed_quadratic(dim: usize) -> PolynomialMap {
    let mono = |pairs: &[(usize, u32)]| {
        let mut e = vec![0u32; dim];
        for &(j, k) in pairs {
            e[j] += k;
        }
        e
    };
    let last = dim - 1;
    PolynomialMap::scalar(
        dim,
        vec![
            (mono(&[(0, 2)]), 0.5),
            (mono(&[(0, 1), (last, 1)]), -1.0),
            (mono(&[(last, 2)]), 0.25),
            (mono(&[(0, 1)]), 1.0),
        ],
    )
    .expect("well-formed quadratic")
}

/// Looks up a test function by id: `coord<i>`, `norm2`, `quad`, `analytic`.
pub fn test_function(id: &str, dim: usize) -> Result<NamedFunction> {
    let function: Arc<dyn TestFunction> = match id {
        "norm2" => Arc::new(SquaredNorm { dim }),
        "quad" => Arc::new(fixed_quadratic(dim)),
        "analytic" => Arc::new(Analytic { dim }),
        _ => match id
            .strip_prefix("coord")
            .and_then(|s| s.parse::<usize>().ok())
        {
            Some(index) if index < dim => Arc::new(Coordinate { dim, index }),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown test function `{id}`"
                )))
            }
        },
    };
    Ok(NamedFunction {
        id: id.to_string(),
        function,
    })
}

/// Default battery: every coordinate, `|x|^2`, a quadratic and an analytic function.
pub fn standard_battery(dim: usize) -> Vec<NamedFunction> {
    let mut ids: Vec<String> = (0..dim).map(|i| format!("coord{i}")).collect();
    ids.extend(["norm2", "quad", "analytic"].map(String::from));
    ids.iter()
        .map(|id| test_function(id, dim).expect("battery ids are valid"))
        .collect()
}
