//! Polynomial maps `R^d -> R^k` with exact jets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_JET_ORDER};

use super::{TestFunction, VectorFieldSystem};

/// One monomial `coeff * x^exponents`.
pub type Monomial = (Vec<u32>, f64);

/// Polynomial map given by its monomials, one list per output component.
///
/// JSON form: `{"d": 2, "degree": 2, "coeffs": [{"0,0": 0.5, "1,1": -0.3}, ...]}`
/// where each key lists the exponent of every variable. A scalar map may
/// give `coeffs` as a single object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolynomial", into = "RawPolynomial")]
pub struct PolynomialMap {
    dim: usize,
    degree: usize,
    components: Vec<Vec<Monomial>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawCoeffs {
    Scalar(BTreeMap<String, f64>),
    Vector(Vec<BTreeMap<String, f64>>),
}

#[derive(Serialize, Deserialize)]
struct RawPolynomial {
    d: usize,
    degree: usize,
    coeffs: RawCoeffs,
}

fn parse_key(key: &str, dim: usize) -> Result<Vec<u32>> {
    let exps = key
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|e| Error::Parse(format!("bad multi-index `{key}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if exps.len() != dim {
        return Err(Error::Parse(format!(
            "multi-index `{key}` has {} entries, expected {dim}",
            exps.len()
        )));
    }
    Ok(exps)
}

fn format_key(exps: &[u32]) -> String {
    exps.iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl TryFrom<RawPolynomial> for PolynomialMap {
    type Error = Error;

    fn try_from(raw: RawPolynomial) -> Result<Self> {
        let maps = match raw.coeffs {
            RawCoeffs::Scalar(m) => vec![m],
            RawCoeffs::Vector(v) => v,
        };
        let components = maps
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .map(|(k, c)| Ok((parse_key(&k, raw.d)?, c)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        PolynomialMap::new(raw.d, raw.degree, components)
    }
}

impl From<PolynomialMap> for RawPolynomial {
    fn from(p: PolynomialMap) -> Self {
        let mut maps: Vec<BTreeMap<String, f64>> = p
            .components
            .iter()
            .map(|c| {
                let mut m = BTreeMap::new();
                for (e, v) in c {
                    *m.entry(format_key(e)).or_insert(0.0) += v;
                }
                m
            })
            .collect();
        let coeffs = if maps.len() == 1 {
            RawCoeffs::Scalar(maps.pop().unwrap())
        } else {
            RawCoeffs::Vector(maps)
        };
        RawPolynomial {
            d: p.dim,
            degree: p.degree,
            coeffs,
        }
    }
}

impl PolynomialMap {
    pub fn new(dim: usize, degree: usize, components: Vec<Vec<Monomial>>) -> Result<Self> {
        if dim == 0 || components.is_empty() {
            return Err(Error::InvalidConfig(
                "polynomial map needs d >= 1 and an output".into(),
            ));
        }
        for (e, c) in components.iter().flatten() {
            if e.len() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "monomial {e:?} in a map of {dim} variables"
                )));
            }
            if e.iter().sum::<u32>() as usize > degree {
                return Err(Error::InvalidConfig(format!(
                    "monomial {e:?} exceeds declared degree {degree}"
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidConfig("non-finite coefficient".into()));
            }
        }
        Ok(PolynomialMap {
            dim,
            degree,
            components,
        })
    }

    /// Scalar polynomial from monomials.
    pub fn scalar(dim: usize, monomials: Vec<Monomial>) -> Result<Self> {
        let degree = monomials
            .iter()
            .map(|(e, _)| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0);
        Self::new(dim, degree, vec![monomials])
    }

    /// Vector-valued polynomial; the degree is inferred.
    pub fn vector(dim: usize, components: Vec<Vec<Monomial>>) -> Result<Self> {
        let degree = components
            .iter()
            .flatten()
            .map(|(e, _)| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0);
        Self::new(dim, degree, components)
    }

    /// Affine map `x -> A x + b`.
    pub fn affine(matrix: &[Vec<f64>], offset: &[f64]) -> Result<Self> {
        let dim = offset.len();
        let components = matrix
            .iter()
            .zip(offset)
            .map(|(row, &b)| {
                let mut c = vec![(vec![0; dim], b)];
                for (j, &a) in row.iter().enumerate() {
                    let mut e = vec![0; dim];
                    e[j] = 1;
                    c.push((e, a));
                }
                c
            })
            .collect();
        Self::new(dim, 1, components)
    }

    pub fn input_dim(&self) -> usize {
        self.dim
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[Vec<Monomial>] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(e, a)| {
                        a * e
                            .iter()
                            .zip(x)
                            .map(|(&k, v)| v.powi(k as i32))
                            .product::<f64>()
                    })
                    .sum()
            })
            .collect()
    }

    /// Exact partial derivative along variable `j`.
    pub fn partial(&self, j: usize) -> PolynomialMap {
        let components = self
            .components
            .iter()
            .map(|c| {
                c.iter()
                    .filter(|(e, _)| e[j] > 0)
                    .map(|(e, a)| {
                        let mut lower = e.clone();
                        lower[j] -= 1;
                        (lower, a * e[j] as f64)
                    })
                    .collect()
            })
            .collect();
        PolynomialMap {
            dim: self.dim,
            degree: self.degree.saturating_sub(1),
            components,
        }
    }

    /// Jets of every component at `x`.
    pub fn jet(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        if x.len() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "point of dimension {} for a map of {} variables",
                x.len(),
                self.dim
            )));
        }
        let max_exp = self
            .components
            .iter()
            .flatten()
            .flat_map(|(e, _)| e.iter().copied())
            .max()
            .unwrap_or(0) as usize;
        // powers[j][k] = (x_j + delta_j)^k
        let mut powers = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let var = Jet::variable(x, order, j)?;
            let mut row = vec![Jet::constant(self.dim, order, 1.0)?];
            for k in 1..=max_exp {
                let next = row[k - 1].mul(&var);
                row.push(next);
            }
            powers.push(row);
        }
        let zero = Jet::constant(self.dim, order, 0.0)?;
        Ok(self
            .components
            .iter()
            .map(|c| {
                c.iter().fold(zero.clone(), |acc, (e, a)| {
                    let mono = e.iter().enumerate().filter(|(_, &k)| k > 0).fold(
                        None::<Jet>,
                        |m, (j, &k)| {
                            let p = &powers[j][k as usize];
                            Some(match m {
                                None => p.clone(),
                                Some(m) => m.mul(p),
                            })
                        },
                    );
                    match mono {
                        None => acc.add_constant(*a),
                        Some(m) => acc.axpy(*a, &m),
                    }
                })
            })
            .collect())
    }
}

impl TestFunction for PolynomialMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Jet> {
        Ok(PolynomialMap::jet(self, x, order)?.swap_remove(0))
    }
}

/// Driving fields given by polynomial maps `R^d -> R^d`, one per letter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PolynomialMap>", into = "Vec<PolynomialMap>")]
pub struct PolynomialSystem {
    fields: Vec<PolynomialMap>,
}

impl TryFrom<Vec<PolynomialMap>> for PolynomialSystem {
    type Error = Error;

    fn try_from(fields: Vec<PolynomialMap>) -> Result<Self> {
        PolynomialSystem::new(fields)
    }
}

impl From<PolynomialSystem> for Vec<PolynomialMap> {
    fn from(s: PolynomialSystem) -> Self {
        s.fields
    }
}

impl PolynomialSystem {
    pub fn new(fields: Vec<PolynomialMap>) -> Result<Self> {
        let Some(first) = fields.first() else {
            return Err(Error::InvalidConfig("no driving fields".into()));
        };
        let d = first.input_dim();
        if fields
            .iter()
            .any(|f| f.input_dim() != d || f.output_dim() != d)
        {
            return Err(Error::InvalidConfig(format!(
                "every field must map R^{d} to R^{d}"
            )));
        }
        Ok(PolynomialSystem { fields })
    }

    pub fn fields(&self) -> &[PolynomialMap] {
        &self.fields
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

impl VectorFieldSystem for PolynomialSystem {
    fn state_dim(&self) -> usize {
        self.fields[0].input_dim()
    }

    fn driver_dim(&self) -> usize {
        self.fields.len()
    }

    fn max_order(&self) -> usize {
        MAX_JET_ORDER
    }

    fn field_jet(&self, i: usize, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        let field = self.fields.get(i).ok_or(Error::BadLabel {
            label: i,
            width: self.fields.len(),
        })?;
        field.jet(x, order)
    }

    fn field_value(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        let field = self.fields.get(i).ok_or(Error::BadLabel {
            label: i,
            width: self.fields.len(),
        })?;
        Ok(field.eval(x))
    }
}
