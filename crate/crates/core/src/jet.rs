//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A jet of order `m` at a point `x0` stores the coefficients `c_alpha`,
//! `|alpha| <= m`, of `f(x0 + delta) = sum_alpha c_alpha delta^alpha`.
//! Monomials are ordered by total degree, so the jet of order `m` is a
//! prefix of the jet of any higher order and truncation is slicing. The
//! partial derivative `d^alpha f(x0)` is `alpha! c_alpha`; the symmetric
//! derivative tensors `D^k f(x0)` are read off the degree-`k` block.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Highest jet order supported.
pub const MAX_JET_ORDER: usize = 6;

const NONE: u32 = u32::MAX;

#[derive(Debug)]
struct MonomialTable {
    dim: usize,
    exponents: Vec<Vec<u8>>,
    /// `sizes[k]` = number of monomials of degree `<= k`.
    sizes: Vec<usize>,
    degree: Vec<usize>,
    /// Row-major product table over all monomials up to `MAX_JET_ORDER`.
    product: Vec<u32>,
    /// `derivative[j][i] = (alpha_j, index of alpha - e_j)`.
    derivative: Vec<Vec<(f64, u32)>>,
}

impl MonomialTable {
    fn build(dim: usize) -> Self {
        let mut exponents: Vec<Vec<u8>> = Vec::new();
        let mut sizes = Vec::with_capacity(MAX_JET_ORDER + 1);
        for deg in 0..=MAX_JET_ORDER {
            let mut block = Vec::new();
            compositions(dim, deg, &mut vec![0u8; dim], 0, &mut block);
            // graded reverse order so that x_0 comes first within a degree
            block.sort_by(|a, b| b.cmp(a));
            exponents.extend(block);
            sizes.push(exponents.len());
        }
        let index: HashMap<Vec<u8>, u32> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i as u32))
            .collect();
        let degree: Vec<usize> = exponents
            .iter()
            .map(|e| e.iter().map(|&v| v as usize).sum())
            .collect();
        let n = exponents.len();
        let mut product = vec![NONE; n * n];
        for i in 0..n {
            for j in 0..n {
                if degree[i] + degree[j] <= MAX_JET_ORDER {
                    let sum: Vec<u8> = exponents[i]
                        .iter()
                        .zip(&exponents[j])
                        .map(|(a, b)| a + b)
                        .collect();
                    product[i * n + j] = index[&sum];
                }
            }
        }
        let derivative = (0..dim)
            .map(|j| {
                exponents
                    .iter()
                    .map(|e| {
                        if e[j] == 0 {
                            (0.0, NONE)
                        } else {
                            let mut lower = e.clone();
                            lower[j] -= 1;
                            (e[j] as f64, index[&lower])
                        }
                    })
                    .collect()
            })
            .collect();
        MonomialTable {
            dim,
            exponents,
            sizes,
            degree,
            product,
            derivative,
        }
    }

    fn get(dim: usize) -> Arc<MonomialTable> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<MonomialTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        cache
            .lock()
            .unwrap()
            .entry(dim)
            .or_insert_with(|| Arc::new(MonomialTable::build(dim)))
            .clone()
    }
}

fn compositions(
    dim: usize,
    remaining: usize,
    current: &mut Vec<u8>,
    pos: usize,
    out: &mut Vec<Vec<u8>>,
) {
    if pos + 1 == dim {
        current[pos] = remaining as u8;
        out.push(current.clone());
        return;
    }
    for v in 0..=remaining {
        current[pos] = v as u8;
        compositions(dim, remaining - v, current, pos + 1, out);
    }
    current[pos] = 0;
}

/// Truncated Taylor expansion of a scalar function of `dim` variables.
#[derive(Clone, Debug)]
pub struct Jet {
    table: Arc<MonomialTable>,
    order: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    fn check_order(order: usize) -> Result<()> {
        if order > MAX_JET_ORDER {
            return Err(Error::InsufficientJetOrder {
                needed: order,
                available: MAX_JET_ORDER,
            });
        }
        Ok(())
    }

    pub fn constant(dim: usize, order: usize, value: f64) -> Result<Self> {
        Self::check_order(order)?;
        let table = MonomialTable::get(dim);
        let mut coeffs = vec![0.0; table.sizes[order]];
        coeffs[0] = value;
        Ok(Jet {
            table,
            order,
            coeffs,
        })
    }

    /// Jet of the coordinate function `x -> x_j` at the point `x0`.
    pub fn variable(x0: &[f64], order: usize, j: usize) -> Result<Self> {
        let mut jet = Self::constant(x0.len(), order, x0[j])?;
        if order >= 1 {
            // degree-1 monomials are e_0, e_1, ... in that order
            jet.coeffs[1 + j] = 1.0;
        }
        Ok(jet)
    }

    /// Builds a jet from raw Taylor coefficients in the internal monomial order.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        Self::check_order(order)?;
        let table = MonomialTable::get(dim);
        if coeffs.len() != table.sizes[order] {
            return Err(Error::ShapeMismatch(format!(
                "jet of order {order} in {dim} variables needs {} coefficients",
                table.sizes[order]
            )));
        }
        Ok(Jet {
            table,
            order,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.table.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Exponent vectors matching [`Jet::coeffs`].
    pub fn exponents(&self) -> impl Iterator<Item = &[u8]> {
        self.table.exponents[..self.coeffs.len()]
            .iter()
            .map(|e| e.as_slice())
    }

    /// Taylor coefficient of `delta^alpha`.
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.exponents()
            .position(|e| e == alpha)
            .map(|i| self.coeffs[i])
            .unwrap_or(0.0)
    }

    /// Partial derivative `d^alpha f(x0)`.
    pub fn partial(&self, alpha: &[u8]) -> f64 {
        let fact: f64 = alpha
            .iter()
            .map(|&a| (1..=a as u64).product::<u64>() as f64)
            .product();
        fact * self.coeff(alpha)
    }

    /// Full symmetric array of `D^m f(x0)`, row-major over `(j_1, ..., j_m)`.
    pub fn derivative_tensor(&self, m: usize) -> Result<Vec<f64>> {
        if m > self.order {
            return Err(Error::InsufficientJetOrder {
                needed: m,
                available: self.order,
            });
        }
        let d = self.dim();
        let mut out = Vec::with_capacity(d.pow(m as u32));
        for flat in 0..d.pow(m as u32) {
            let mut alpha = vec![0u8; d];
            let mut idx = flat;
            for _ in 0..m {
                alpha[idx % d] += 1;
                idx /= d;
            }
            out.push(self.partial(&alpha));
        }
        Ok(out)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet {
            table: self.table.clone(),
            order,
            coeffs: self.coeffs[..self.table.sizes[order]].to_vec(),
        }
    }

    fn zeros_like(&self, order: usize) -> Jet {
        Jet {
            table: self.table.clone(),
            order,
            coeffs: vec![0.0; self.table.sizes[order]],
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let n = self.table.sizes[order];
        Jet {
            table: self.table.clone(),
            order,
            coeffs: self.coeffs[..n]
                .iter()
                .zip(&other.coeffs[..n])
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.axpy(-1.0, other)
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let n = self.table.sizes[order];
        Jet {
            table: self.table.clone(),
            order,
            coeffs: self.coeffs[..n]
                .iter()
                .zip(&other.coeffs[..n])
                .map(|(a, b)| a + factor * b)
                .collect(),
        }
    }

    /// `self + value`.
    pub fn add_constant(&self, value: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += value;
        out
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            table: self.table.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Truncated product; the order is the smaller of the two.
    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut out = self.zeros_like(order);
        let t = &*self.table;
        let stride = t.exponents.len();
        for i in 0..t.sizes[order] {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            let room = order - t.degree[i];
            let row = &t.product[i * stride..];
            for j in 0..t.sizes[room] {
                let b = other.coeffs[j];
                if b != 0.0 {
                    out.coeffs[row[j] as usize] += a * b;
                }
            }
        }
        out
    }

    /// Partial derivative along variable `j`; lowers the order by one.
    pub fn deriv(&self, j: usize) -> Result<Jet> {
        if self.order == 0 {
            return Err(Error::InsufficientJetOrder {
                needed: 1,
                available: 0,
            });
        }
        let mut out = self.zeros_like(self.order - 1);
        let table = &self.table.derivative[j];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let (factor, target) = table[i];
            if target != NONE && c != 0.0 {
                out.coeffs[target as usize] += factor * c;
            }
        }
        Ok(out)
    }

    /// `g o self` for a univariate `g`, given `g^{(k)}(self.value())` for
    /// `k = 0..=order` (Faa di Bruno through powers of the non-constant part).
    pub fn compose(&self, derivatives: &[f64]) -> Jet {
        assert!(
            derivatives.len() > self.order,
            "not enough derivatives of the outer function"
        );
        let mut shifted = self.clone();
        shifted.coeffs[0] = 0.0;
        let mut out = self.zeros_like(self.order);
        out.coeffs[0] = derivatives[0];
        let mut power = Jet::constant(self.dim(), self.order, 1.0).unwrap();
        let mut fact = 1.0;
        for (k, d) in derivatives.iter().enumerate().take(self.order + 1).skip(1) {
            power = power.mul(&shifted);
            fact *= k as f64;
            out = out.axpy(d / fact, &power);
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Jet of a vector-valued map, one scalar jet per component.
pub type VectorJet = Vec<Jet>;

/// Values of a vector jet.
pub fn values(v: &[Jet]) -> Vec<f64> {
    v.iter().map(Jet::value).collect()
}

/// Lowest order among the components.
pub fn vector_order(v: &[Jet]) -> usize {
    v.iter().map(Jet::order).min().unwrap_or(MAX_JET_ORDER)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_layout() {
        let t = MonomialTable::get(2);
        assert_eq!(t.sizes[..4], [1, 3, 6, 10]);
        assert_eq!(t.exponents[1], vec![1, 0]);
        assert_eq!(t.exponents[2], vec![0, 1]);
        let t3 = MonomialTable::get(3);
        assert_eq!(t3.sizes[MAX_JET_ORDER], 84);
    }

    #[test]
    fn product_and_derivative_of_polynomials() {
        // f = x0 * x1 at (2, 3), expanded to order 2
        let x0 = Jet::variable(&[2.0, 3.0], 2, 0).unwrap();
        let x1 = Jet::variable(&[2.0, 3.0], 2, 1).unwrap();
        let f = x0.mul(&x1);
        assert_eq!(f.value(), 6.0);
        assert_eq!(f.coeff(&[1, 0]), 3.0);
        assert_eq!(f.coeff(&[0, 1]), 2.0);
        assert_eq!(f.coeff(&[1, 1]), 1.0);
        let df = f.deriv(0).unwrap();
        assert_eq!(df.order(), 1);
        assert_eq!(df.value(), 3.0);
        assert_eq!(df.coeff(&[0, 1]), 1.0);
        assert!(f.truncate(0).deriv(0).is_err());
    }

    #[test]
    fn truncation_of_products() {
        let x = Jet::variable(&[1.0], 3, 0).unwrap();
        let mut p = Jet::constant(1, 3, 1.0).unwrap();
        for _ in 0..5 {
            p = p.mul(&x);
        }
        // (1 + d)^5 truncated at degree 3
        assert_eq!(p.coeffs(), &[1.0, 5.0, 10.0, 10.0]);
    }

    #[test]
    fn elementary_functions() {
        let x = Jet::variable(&[0.3], 5, 0).unwrap();
        let s = x.sin();
        let c = x.cos();
        let e = x.exp();
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];
        for k in 0..=5 {
            let ds = [0.3f64.sin(), 0.3f64.cos(), -0.3f64.sin(), -0.3f64.cos()][k % 4];
            let dc = [0.3f64.cos(), -0.3f64.sin(), -0.3f64.cos(), 0.3f64.sin()][k % 4];
            assert!((s.coeffs()[k] * fact[k] - ds).abs() < 1e-14);
            assert!((c.coeffs()[k] * fact[k] - dc).abs() < 1e-14);
            assert!((e.coeffs()[k] * fact[k] - 0.3f64.exp()).abs() < 1e-14);
        }
        // sin^2 + cos^2 = 1 as jets
        let one = s.mul(&s).add(&c.mul(&c));
        assert!((one.value() - 1.0).abs() < 1e-15);
        assert!(one.coeffs()[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn order_cap() {
        assert!(Jet::constant(2, MAX_JET_ORDER + 1, 0.0).is_err());
    }
}
