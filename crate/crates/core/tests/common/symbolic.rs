//! Sparse symbolic polynomials, an independent differentiation oracle.

use std::collections::BTreeMap;

use roughflow::calculus::{PolynomialMap, PolynomialSystem};
use roughflow::trees::LabeledTree;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    pub dim: usize,
    pub terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Poly::zero(dim);
        p.terms.insert(vec![0; dim], c);
        p
    }

    pub fn variable(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        let mut p = Poly::zero(dim);
        p.terms.insert(e, 1.0);
        p
    }

    /// Components of a polynomial map.
    pub fn from_map(map: &PolynomialMap) -> Vec<Poly> {
        map.components()
            .iter()
            .map(|monos| {
                let mut p = Poly::zero(map.input_dim());
                for (e, c) in monos {
                    *p.terms.entry(e.clone()).or_insert(0.0) += c;
                }
                p
            })
            .collect()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            *out.terms.entry(e.clone()).or_insert(0.0) += c;
        }
        out
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        out
    }

    pub fn diff(&self, j: usize) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            if e[j] > 0 {
                let mut e2 = e.clone();
                e2[j] -= 1;
                *out.terms.entry(e2).or_insert(0.0) += c * e[j] as f64;
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(k, xi)| xi.powi(*k as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

pub type PolyField = Vec<Poly>;

/// `V f = sum_j V^j d_j f`.
pub fn apply(v: &PolyField, f: &Poly) -> Poly {
    v.iter()
        .enumerate()
        .fold(Poly::zero(f.dim), |acc, (j, vj)| {
            acc.add(&vj.mul(&f.diff(j)))
        })
}

/// `D^n g (W_1, ..., W_n)` with polynomial arguments.
pub fn contract(g: &Poly, args: &[&PolyField]) -> Poly {
    match args.split_first() {
        None => g.clone(),
        Some((first, rest)) => first
            .iter()
            .enumerate()
            .fold(Poly::zero(g.dim), |acc, (j, wj)| {
                acc.add(&wj.mul(&contract(&g.diff(j), rest)))
            }),
    }
}

pub fn eval_field(v: &PolyField, x: &[f64]) -> Vec<f64> {
    v.iter().map(|p| p.eval(x)).collect()
}

pub fn fields_of(system: &PolynomialSystem) -> Vec<PolyField> {
    system.fields().iter().map(Poly::from_map).collect()
}

/// Unnormalized `F(t) = D^n V_a (F(t_1), ..., F(t_n))`.
pub fn elementary(fields: &[PolyField], tree: &LabeledTree) -> PolyField {
    let children: Vec<PolyField> = tree
        .children()
        .iter()
        .map(|c| elementary(fields, c))
        .collect();
    let args: Vec<&PolyField> = children.iter().collect();
    fields[tree.label()]
        .iter()
        .map(|g| contract(g, &args))
        .collect()
}
