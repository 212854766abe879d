//! Canonical lift of piecewise-linear drivers into the free nilpotent group.

use std::ops::RangeInclusive;

use crate::error::Result;
use crate::path::PiecewiseLinearPath;
use crate::tensor::{GroupTensor, TruncatedTensor};

/// Signature of a straight segment: the exponential of its increment.
pub fn segment_signature(increment: &[f64], depth: usize) -> GroupTensor {
    TruncatedTensor::from_vector(depth, increment)
        .exp()
        .expect("level-1 tensor has zero scalar part")
}

/// Weak geometric rough path obtained by lifting a piecewise-linear path.
#[derive(Clone, Debug)]
pub struct GeometricRoughPath {
    path: PiecewiseLinearPath,
    depth: usize,
}

impl GeometricRoughPath {
    pub fn lift(path: PiecewiseLinearPath, depth: usize) -> Self {
        assert!(depth >= 1, "depth must be positive");
        GeometricRoughPath { path, depth }
    }

    pub fn path(&self) -> &PiecewiseLinearPath {
        &self.path
    }

    pub fn width(&self) -> usize {
        self.path.width()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn start(&self) -> f64 {
        self.path.start()
    }

    pub fn end(&self) -> f64 {
        self.path.end()
    }

    /// `X_ts` over `[s, t]`: segment exponentials multiplied left to right.
    ///
    /// Pieces are multiplied directly rather than through prefix products so
    /// that short windows keep full relative precision.
    pub fn increment(&self, s: f64, t: f64) -> Result<GroupTensor> {
        let pieces = self.path.pieces(s, t)?;
        let mut acc = TruncatedTensor::unit(self.width(), self.depth);
        for (_, inc) in pieces {
            acc = acc.mul_unchecked(segment_signature(&inc, self.depth).as_tensor());
        }
        Ok(GroupTensor::from_trusted(acc))
    }

    /// `X_{0t}`, the signature from the start of the domain.
    pub fn prefix(&self, t: f64) -> Result<GroupTensor> {
        self.increment(self.start(), t)
    }
}

/// `sup ||X_ts|| / |t - s|^{1/p}` over all dyadic windows at the given levels.
pub fn holder_ratio(x: &GeometricRoughPath, p: f64, levels: RangeInclusive<usize>) -> Result<f64> {
    let (a, b) = (x.start(), x.end());
    let mut best: f64 = 0.0;
    for j in levels {
        let n = 1usize << j;
        let h = (b - a) / n as f64;
        for k in 0..n {
            let s = a + h * k as f64;
            let t = if k + 1 == n { b } else { s + h };
            let norm = x.increment(s, t)?.as_tensor().homogeneous_norm();
            best = best.max(norm / (t - s).powf(1.0 / p));
        }
    }
    Ok(best)
}
