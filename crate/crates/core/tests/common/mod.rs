#![allow(dead_code)]

pub mod symbolic;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughflow::calculus::{Monomial, PolynomialMap, PolynomialSystem};
use roughflow::path::PiecewiseLinearPath;
use roughflow::tensor::TruncatedTensor;
use roughflow::trees::LabeledTree;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All exponent vectors in `dim` variables with total degree `<= degree`.
pub fn exponents(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for e in &out {
            let used: u32 = e.iter().sum();
            for k in 0..=degree - used {
                let mut e2 = e.clone();
                e2.push(k);
                next.push(e2);
            }
        }
        out = next;
    }
    out
}

pub fn random_polynomial(
    rng: &mut ChaCha8Rng,
    dim: usize,
    outputs: usize,
    degree: u32,
) -> PolynomialMap {
    let components = (0..outputs)
        .map(|_| {
            exponents(dim, degree)
                .into_iter()
                .map(|e| (e, rng.gen_range(-1.0..1.0)))
                .collect::<Vec<Monomial>>()
        })
        .collect();
    PolynomialMap::new(dim, degree as usize, components).unwrap()
}

pub fn random_system(
    rng: &mut ChaCha8Rng,
    dim: usize,
    width: usize,
    degree: u32,
) -> PolynomialSystem {
    PolynomialSystem::new(
        (0..width)
            .map(|_| random_polynomial(rng, dim, dim, degree))
            .collect(),
    )
    .unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_tensor(
    rng: &mut ChaCha8Rng,
    width: usize,
    depth: usize,
    scalar: f64,
) -> TruncatedTensor {
    let mut levels = vec![vec![scalar]];
    for k in 1..=depth {
        levels.push(
            (0..width.pow(k as u32))
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect(),
        );
    }
    TruncatedTensor::from_levels(width, depth, levels).unwrap()
}

/// Random piecewise-linear path on `[0, horizon]` with `segments` equal pieces.
pub fn random_path(
    rng: &mut ChaCha8Rng,
    width: usize,
    segments: usize,
    horizon: f64,
) -> PiecewiseLinearPath {
    let times = (0..=segments)
        .map(|k| horizon * k as f64 / segments as f64)
        .collect();
    let mut point = vec![0.0; width];
    let mut points = vec![point.clone()];
    for _ in 0..segments {
        for p in point.iter_mut() {
            *p += rng.gen_range(-0.5..0.5);
        }
        points.push(point.clone());
    }
    PiecewiseLinearPath::new(times, points).unwrap()
}

/// All trees on `n` nodes with labels below `width`, from every parent
/// array `parent[i] < i` and every labelling.
pub fn brute_force_trees(n: usize, width: usize) -> BTreeSet<LabeledTree> {
    fn build(node: usize, parent: &[usize], labels: &[usize]) -> LabeledTree {
        let children = (1..parent.len() + 1)
            .filter(|&c| parent[c - 1] == node)
            .map(|c| build(c, parent, labels))
            .collect();
        LabeledTree::graft(labels[node], children)
    }
    let mut out = BTreeSet::new();
    let parents: usize = (1..n).product();
    for mut code in 0..parents {
        let mut parent = Vec::with_capacity(n - 1);
        for i in 1..n {
            parent.push(code % i);
            code /= i;
        }
        for mut lcode in 0..width.pow(n as u32) {
            let labels: Vec<usize> = (0..n)
                .map(|_| {
                    let l = lcode % width;
                    lcode /= width;
                    l
                })
                .collect();
            out.insert(build(0, &parent, &labels));
        }
    }
    out
}
